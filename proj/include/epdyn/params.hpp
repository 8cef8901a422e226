#pragma once

#include <cmath>
#include <string>

#include "epdyn/errors.hpp"

namespace epdyn {

// Physical constants of the exciton-phonon chain, shared by every solver.
// Units are model units: any consistent system works, hbar/mass/elasticity
// must be positive.
struct ModelParams {
    double hbar = 1.0;           // action quantum
    double mass = 1.0;           // molecular mass per site
    double elasticity = 1.0;     // spring constant w
    double coupling_chi = 0.0;   // exciton-phonon coupling chi
    double site_energy = 0.0;    // on-site exciton energy eps
    double interaction_J = 1.0;  // exciton transfer constant J
    double exponent_s = 2.5;     // power-law exponent s (dimensionless)

    double sound_speed() const { return std::sqrt(elasticity / mass); }

    void validate() const {
        if (!(hbar > 0.0)) throw DomainError("ModelParams: hbar must be > 0");
        if (!(mass > 0.0)) throw DomainError("ModelParams: mass must be > 0");
        if (!(elasticity > 0.0)) throw DomainError("ModelParams: elasticity must be > 0");
        if (!std::isfinite(interaction_J)) throw DomainError("ModelParams: interaction_J must be finite");
    }
};

// Small-k behavior of the spectral gap selects the continuum model.
enum class Regime {
    Hilbert,      // s = 2,      G(k) ~ pi J |k|
    Fractional,   // 2 < s < 3,  G(k) ~ D_s |k|^{s-1}
    Logarithmic,  // s = 3,      G(k) ~ -J k^2 ln|k|
    Quadratic,    // s > 3,      G(k) ~ (J zeta(s-2)/2) k^2
};

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::Hilbert: return "hilbert";
        case Regime::Fractional: return "fractional";
        case Regime::Logarithmic: return "logarithmic";
        case Regime::Quadratic: return "quadratic";
    }
    return "?";
}

// Exact comparisons on s; the boundaries are part of the contract.
inline Regime classify_regime(double s) {
    if (!(s > 1.0)) throw DivergenceError("classify_regime: requires s > 1 (J(0) diverges)");
    if (s == 2.0) return Regime::Hilbert;
    if (s < 3.0 && s > 2.0) return Regime::Fractional;
    if (s == 3.0) return Regime::Logarithmic;
    if (s > 3.0) return Regime::Quadratic;
    // 1 < s < 2: summable but outside every reduced model
    throw DomainError("classify_regime: 1 < s < 2 is not covered by any regime");
}

}  // namespace epdyn
