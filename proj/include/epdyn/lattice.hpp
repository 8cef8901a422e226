#pragma once

// Discrete semiclassical exciton-phonon chain: equations of motion with
// long-range coupling, RK4 stepping, energy functionals and norm.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "epdyn/dispersion.hpp"
#include "epdyn/errors.hpp"
#include "epdyn/grid.hpp"
#include "epdyn/params.hpp"

namespace epdyn {

struct LatticeState {
    std::vector<complexd> psi;  // exciton amplitudes
    std::vector<double> xi;     // displacements
    std::vector<double> eta;    // momenta
    double time = 0.0;

    std::size_t size() const { return psi.size(); }

    static LatticeState zeros(std::size_t sites, double t0 = 0.0) {
        LatticeState s;
        s.psi.assign(sites, complexd{0.0, 0.0});
        s.xi.assign(sites, 0.0);
        s.eta.assign(sites, 0.0);
        s.time = t0;
        return s;
    }

    void validate() const {
        if (psi.size() < 2 || psi.size() != xi.size() || psi.size() != eta.size())
            throw DomainError("LatticeState: psi/xi/eta must share one length L >= 2");
    }
};

enum class Boundary { Periodic, Open };

enum class PhononSource {
    ForwardDifference,    // chi (|psi_{n+1}|^2 - |psi_n|^2), the printed form
    SymmetricDifference,  // chi (|psi_{n+1}|^2 - |psi_{n-1}|^2)/2
};

struct LatticeTopology {
    Boundary boundary = Boundary::Periodic;
    // 0 selects the default range: L/2 - 1 under periodic minimum image,
    // L - 1 (all pairs) for an open chain.
    std::size_t interaction_cutoff = 0;
    bool fft_coupling = false;  // optional fast path, periodic only
    PhononSource source = PhononSource::ForwardDifference;
    double source_prefactor = 1.0;  // lattice-vs-continuum comparison knob

    std::size_t effective_cutoff(std::size_t sites) const {
        std::size_t full =
            boundary == Boundary::Periodic ? sites / 2 - 1 : sites - 1;
        if (interaction_cutoff == 0) return full;
        if (boundary == Boundary::Periodic && interaction_cutoff >= sites / 2)
            throw DomainError("LatticeTopology: need cutoff R < L/2 under periodic boundary");
        return std::min(interaction_cutoff, full);
    }
};

struct LatticeDeriv {
    std::vector<complexd> dpsi;
    std::vector<double> dxi;
    std::vector<double> deta;
};

inline double norm(const LatticeState& s) {
    double n = 0.0;
    for (const auto& a : s.psi) n += std::norm(a);
    return n;
}

namespace detail {

inline double phonon_energy(const LatticeState& s, const ModelParams& p, Boundary b) {
    const std::size_t L = s.size();
    double e = 0.0;
    for (std::size_t n = 0; n < L; ++n) e += s.eta[n] * s.eta[n] / (2.0 * p.mass);
    const std::size_t bonds = b == Boundary::Periodic ? L : L - 1;
    for (std::size_t n = 0; n < bonds; ++n) {
        const double d = s.xi[(n + 1) % L] - s.xi[n];
        e += 0.5 * p.elasticity * d * d;
    }
    return e;
}

inline std::vector<double> coupling_table(const ModelParams& p, std::size_t cutoff) {
    std::vector<double> J(cutoff + 1, 0.0);
    for (std::size_t d = 1; d <= cutoff; ++d)
        J[d] = p.interaction_J * std::pow(static_cast<double>(d), -p.exponent_s);
    return J;
}

// sum_{m != n} J_{n-m} psi_m by direct summation, O(L R).
inline void coupling_sum_direct(const std::vector<complexd>& psi, const std::vector<double>& J,
                                Boundary b, std::vector<complexd>& out) {
    const std::size_t L = psi.size();
    const std::size_t R = J.size() - 1;
    out.assign(L, complexd{0.0, 0.0});
    if (b == Boundary::Periodic) {
        for (std::size_t n = 0; n < L; ++n) {
            complexd acc{0.0, 0.0};
            for (std::size_t d = 1; d <= R; ++d)
                acc += J[d] * (psi[(n + d) % L] + psi[(n + L - d % L) % L]);
            out[n] = acc;
        }
    } else {
        for (std::size_t n = 0; n < L; ++n) {
            complexd acc{0.0, 0.0};
            for (std::size_t d = 1; d <= R; ++d) {
                if (n + d < L) acc += J[d] * psi[n + d];
                if (n >= d) acc += J[d] * psi[n - d];
            }
            out[n] = acc;
        }
    }
}

}  // namespace detail

// Lambda(t) = eps + sum_n (eta_n^2/2m + (w/2)(xi_{n+1}-xi_n)^2); the phonon
// energy makes it time-dependent despite the printed name "constant".
inline double lambda_term(const LatticeState& s, const ModelParams& p,
                          Boundary b = Boundary::Periodic) {
    s.validate();
    return p.site_energy + detail::phonon_energy(s, p, b);
}

// Exciton + phonon + interaction energy of the configuration.
inline double total_energy(const LatticeState& s, const ModelParams& p,
                           const LatticeTopology& topo) {
    s.validate();
    const std::size_t L = s.size();
    const std::size_t R = topo.effective_cutoff(L);
    const auto J = detail::coupling_table(p, R);

    double e_ex = p.site_energy * norm(s);
    std::vector<complexd> conv;
    detail::coupling_sum_direct(s.psi, J, topo.boundary, conv);
    for (std::size_t n = 0; n < L; ++n) e_ex -= (std::conj(s.psi[n]) * conv[n]).real();

    const double e_ph = detail::phonon_energy(s, p, topo.boundary);

    double e_int = 0.0;
    const std::size_t bonds = topo.boundary == Boundary::Periodic ? L : L - 1;
    for (std::size_t n = 0; n < bonds; ++n)
        e_int += (s.xi[(n + 1) % L] - s.xi[n]) * std::norm(s.psi[n]);
    e_int *= p.coupling_chi;

    return e_ex + e_ph + e_int;
}

struct EnergyBreakdown {
    double exciton, phonon, interaction;
    double total() const { return exciton + phonon + interaction; }
};

inline EnergyBreakdown energy_breakdown(const LatticeState& s, const ModelParams& p,
                                        const LatticeTopology& topo) {
    s.validate();
    const std::size_t L = s.size();
    const auto J = detail::coupling_table(p, topo.effective_cutoff(L));
    double e_ex = p.site_energy * norm(s);
    std::vector<complexd> conv;
    detail::coupling_sum_direct(s.psi, J, topo.boundary, conv);
    for (std::size_t n = 0; n < L; ++n) e_ex -= (std::conj(s.psi[n]) * conv[n]).real();
    const double e_ph = detail::phonon_energy(s, p, topo.boundary);
    double e_int = 0.0;
    const std::size_t bonds = topo.boundary == Boundary::Periodic ? L : L - 1;
    for (std::size_t n = 0; n < bonds; ++n)
        e_int += (s.xi[(n + 1) % L] - s.xi[n]) * std::norm(s.psi[n]);
    e_int *= p.coupling_chi;
    return {e_ex, e_ph, e_int};
}

// Chain integrator with cached coupling table (and optional FFT fast path
// for the long-range sum under periodic boundary).
class LatticeModel {
  public:
    LatticeModel(std::size_t sites, const ModelParams& params, const LatticeTopology& topo)
        : sites_(sites), params_(params), topo_(topo) {
        params_.validate();
        if (sites < 2) throw DomainError("LatticeModel: need L >= 2");
        if (!(params_.exponent_s > 1.0))
            throw DivergenceError("LatticeModel: requires s > 1 (J(0) diverges)");
        cutoff_ = topo_.effective_cutoff(sites_);
        couplings_ = detail::coupling_table(params_, cutoff_);
        if (topo_.fft_coupling) {
            if (topo_.boundary != Boundary::Periodic)
                throw ConfigError("LatticeModel: FFT coupling requires a periodic chain");
            grid_ = make_grid(static_cast<double>(sites_), sites_);
            std::vector<complexd> kernel(sites_, complexd{0.0, 0.0});
            for (std::size_t m = 1; m < sites_; ++m) {
                const std::size_t d = std::min(m, sites_ - m);
                if (d >= 1 && d <= cutoff_) kernel[m] = couplings_[d];
            }
            kernel_spectrum_.resize(sites_);
            grid_->forward(kernel, kernel_spectrum_);
        }
    }

    const ModelParams& params() const { return params_; }
    const LatticeTopology& topology() const { return topo_; }
    std::size_t sites() const { return sites_; }
    std::size_t cutoff() const { return cutoff_; }

    void coupling_sum(const std::vector<complexd>& psi, std::vector<complexd>& out) const {
        if (topo_.fft_coupling) {
            out.resize(sites_);
            std::vector<complexd> spec(sites_);
            grid_->forward(psi, spec);
            for (std::size_t j = 0; j < sites_; ++j) spec[j] *= kernel_spectrum_[j];
            grid_->inverse(spec, out);
        } else {
            detail::coupling_sum_direct(psi, couplings_, topo_.boundary, out);
        }
    }

    void rhs(const LatticeState& s, LatticeDeriv& d) const {
        const std::size_t L = sites_;
        const double lambda = lambda_term(s, params_, topo_.boundary);
        const double chi = params_.coupling_chi;
        const double w = params_.elasticity;
        const bool periodic = topo_.boundary == Boundary::Periodic;

        coupling_sum(s.psi, conv_);
        d.dpsi.resize(L);
        d.dxi.resize(L);
        d.deta.resize(L);
        const complexd minus_i_over_hbar{0.0, -1.0 / params_.hbar};
        for (std::size_t n = 0; n < L; ++n) {
            double bond = 0.0;
            if (periodic || n + 1 < L) bond = s.xi[(n + 1) % L] - s.xi[n];
            d.dpsi[n] =
                minus_i_over_hbar * (lambda * s.psi[n] - conv_[n] + chi * bond * s.psi[n]);
            d.dxi[n] = s.eta[n] / params_.mass;

            double lap;
            if (periodic) {
                lap = s.xi[(n + 1) % L] - 2.0 * s.xi[n] + s.xi[(n + L - 1) % L];
            } else if (n == 0) {
                lap = s.xi[1] - s.xi[0];
            } else if (n + 1 == L) {
                lap = s.xi[L - 2] - s.xi[L - 1];
            } else {
                lap = s.xi[n + 1] - 2.0 * s.xi[n] + s.xi[n - 1];
            }

            double src;
            const double rho = std::norm(s.psi[n]);
            const double rho_next = (periodic || n + 1 < L) ? std::norm(s.psi[(n + 1) % L]) : rho;
            if (topo_.source == PhononSource::ForwardDifference) {
                src = rho_next - rho;
            } else {
                const double rho_prev = (periodic || n > 0) ? std::norm(s.psi[(n + L - 1) % L]) : rho;
                src = 0.5 * (rho_next - rho_prev);
            }
            d.deta[n] = w * lap + chi * topo_.source_prefactor * src;
        }
    }

    LatticeDeriv rhs(const LatticeState& s) const {
        LatticeDeriv d;
        rhs(s, d);
        return d;
    }

    // Classical RK4 on the full coupled system; Lambda is re-evaluated in
    // every substage.
    LatticeState step_rk4(const LatticeState& s, double dt) const {
        if (!(dt > 0.0)) throw ConfigError("step_rk4: dt must be > 0");
        s.validate();
        const std::size_t L = sites_;
        LatticeDeriv k1, k2, k3, k4;
        rhs(s, k1);
        LatticeState tmp = s;
        auto blend = [&](const LatticeState& base, const LatticeDeriv& k, double h) {
            for (std::size_t n = 0; n < L; ++n) {
                tmp.psi[n] = base.psi[n] + h * k.dpsi[n];
                tmp.xi[n] = base.xi[n] + h * k.dxi[n];
                tmp.eta[n] = base.eta[n] + h * k.deta[n];
            }
            tmp.time = base.time + h;
        };
        blend(s, k1, 0.5 * dt);
        rhs(tmp, k2);
        blend(s, k2, 0.5 * dt);
        rhs(tmp, k3);
        blend(s, k3, dt);
        rhs(tmp, k4);

        LatticeState out = s;
        out.time = s.time + dt;
        for (std::size_t n = 0; n < L; ++n) {
            out.psi[n] = s.psi[n] + dt / 6.0 *
                         (k1.dpsi[n] + 2.0 * k2.dpsi[n] + 2.0 * k3.dpsi[n] + k4.dpsi[n]);
            out.xi[n] = s.xi[n] + dt / 6.0 *
                        (k1.dxi[n] + 2.0 * k2.dxi[n] + 2.0 * k3.dxi[n] + k4.dxi[n]);
            out.eta[n] = s.eta[n] + dt / 6.0 *
                         (k1.deta[n] + 2.0 * k2.deta[n] + 2.0 * k3.deta[n] + k4.deta[n]);
        }
        check_finite(out);
        return out;
    }

    // dt <= 0.5 min(hbar/(|eps| + J(0) + |chi| max|dxi|), sqrt(m/w)/2)
    double stability_dt(const LatticeState& s) const {
        const double J0 = 2.0 * std::abs(params_.interaction_J) *
                          detail::riemann_zeta(params_.exponent_s);
        double max_bond = 0.0;
        const std::size_t L = sites_;
        const std::size_t bonds = topo_.boundary == Boundary::Periodic ? L : L - 1;
        for (std::size_t n = 0; n < bonds; ++n)
            max_bond = std::max(max_bond, std::abs(s.xi[(n + 1) % L] - s.xi[n]));
        const double exciton_scale =
            params_.hbar / (std::abs(params_.site_energy) + J0 +
                            std::abs(params_.coupling_chi) * max_bond + 1e-300);
        const double phonon_scale = std::sqrt(params_.mass / params_.elasticity) / 2.0;
        return 0.5 * std::min(exciton_scale, phonon_scale);
    }

  private:
    void check_finite(const LatticeState& s) const {
        auto bad = [](double v) { return !std::isfinite(v); };
        for (std::size_t n = 0; n < sites_; ++n) {
            if (bad(s.psi[n].real()) || bad(s.psi[n].imag()))
                throw BlowupError("step_rk4: non-finite psi at site " + std::to_string(n) +
                                  ", t = " + std::to_string(s.time));
            if (bad(s.xi[n]))
                throw BlowupError("step_rk4: non-finite xi at site " + std::to_string(n) +
                                  ", t = " + std::to_string(s.time));
            if (bad(s.eta[n]))
                throw BlowupError("step_rk4: non-finite eta at site " + std::to_string(n) +
                                  ", t = " + std::to_string(s.time));
        }
    }

    std::size_t sites_;
    ModelParams params_;
    LatticeTopology topo_;
    std::size_t cutoff_;
    std::vector<double> couplings_;
    GridPtr grid_;
    std::vector<complexd> kernel_spectrum_;
    mutable std::vector<complexd> conv_;
};

// One-shot conveniences over a throwaway model.
inline LatticeDeriv rhs(const LatticeState& s, const ModelParams& p, const LatticeTopology& topo) {
    s.validate();
    return LatticeModel(s.size(), p, topo).rhs(s);
}

inline LatticeState step_rk4(const LatticeState& s, const ModelParams& p,
                             const LatticeTopology& topo, double dt) {
    s.validate();
    return LatticeModel(s.size(), p, topo).step_rk4(s, dt);
}

}  // namespace epdyn
