#pragma once

// Traveling-wave profiles of the fractional and Hilbert Ginzburg-Landau
// equations on a periodic co-moving domain: residual evaluation, the
// strain slaving relation, and a Petviashvili solver with a Newton-Krylov
// fallback.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "epdyn/dispersion.hpp"
#include "epdyn/errors.hpp"
#include "epdyn/grid.hpp"
#include "epdyn/params.hpp"

namespace epdyn {

enum class ProfileDispersion { Fractional, Hilbert, Classical };

inline const char* to_string(ProfileDispersion d) {
    switch (d) {
        case ProfileDispersion::Fractional: return "fractional";
        case ProfileDispersion::Hilbert: return "hilbert";
        case ProfileDispersion::Classical: return "classical";
    }
    return "?";
}

// gamma = 2 chi^2 / (m (v^2 - v_s^2)); reduces to -2 chi^2 / w at v = 0.
inline double gamma_coefficient(double wave_speed, const ModelParams& p) {
    p.validate();
    const double vs = p.sound_speed();
    if (std::abs(wave_speed) == vs)
        throw SonicSingularityError("gamma_coefficient: |v| equals the sound speed sqrt(w/m)");
    return 2.0 * p.coupling_chi * p.coupling_chi /
           (p.mass * (wave_speed * wave_speed - vs * vs));
}

// Strain profile slaved to the density in the co-moving frame, zero-mean.
inline Field sigma_profile(const Field& psi, double wave_speed, const ModelParams& p) {
    p.validate();
    const double vs = p.sound_speed();
    if (std::abs(wave_speed) == vs)
        throw SonicSingularityError("sigma_profile: |v| equals the sound speed sqrt(w/m)");
    const double c = 2.0 * p.coupling_chi / (p.mass * (wave_speed * wave_speed - vs * vs));
    Field out(psi.grid);
    const std::size_t M = psi.size();
    double mean = 0.0;
    for (std::size_t j = 0; j < M; ++j) mean += std::norm(psi[j]);
    mean /= static_cast<double>(M);
    for (std::size_t j = 0; j < M; ++j) out[j] = c * (std::norm(psi[j]) - mean);
    return out;
}

struct TravelingWaveProblem {
    double wave_speed;
    ModelParams params;
    GridPtr grid;
    double gamma;
    ProfileDispersion dispersion_mode;

    TravelingWaveProblem(double v, const ModelParams& p, GridPtr g,
                         ProfileDispersion mode = ProfileDispersion::Fractional)
        : wave_speed(v), params(p), grid(std::move(g)),
          gamma(gamma_coefficient(v, p)), dispersion_mode(mode) {
        validate();
    }

    TravelingWaveProblem(double v, const ModelParams& p, GridPtr g, double gamma_override,
                         ProfileDispersion mode)
        : wave_speed(v), params(p), grid(std::move(g)), gamma(gamma_override),
          dispersion_mode(mode) {
        validate();
    }

    void validate() const {
        params.validate();
        if (std::abs(wave_speed) == params.sound_speed())
            throw SonicSingularityError("TravelingWaveProblem: |v| equals the sound speed");
        if (dispersion_mode == ProfileDispersion::Fractional)
            fractional_coefficient(params);  // throws outside 2 <= s < 3
        if (dispersion_mode == ProfileDispersion::Classical && !(params.exponent_s > 3.0))
            throw DomainError("TravelingWaveProblem: classical dispersion requires s > 3");
    }

    // Multiplier of the dispersive term: +G_op(q).
    std::vector<double> dispersion_table() const {
        const std::size_t M = grid->size();
        std::vector<double> t(M);
        switch (dispersion_mode) {
            case ProfileDispersion::Fractional: {
                const double D = fractional_coefficient(params);
                const double sm1 = params.exponent_s - 1.0;
                for (std::size_t j = 0; j < M; ++j)
                    t[j] = D * std::pow(std::abs(grid->wavenumber(j)), sm1);
                break;
            }
            case ProfileDispersion::Hilbert: {
                const double c = std::numbers::pi * params.interaction_J;
                for (std::size_t j = 0; j < M; ++j) t[j] = c * std::abs(grid->wavenumber(j));
                break;
            }
            case ProfileDispersion::Classical: {
                const double A =
                    0.5 * params.interaction_J * detail::riemann_zeta(params.exponent_s - 2.0);
                for (std::size_t j = 0; j < M; ++j) {
                    const double q = grid->wavenumber(j);
                    t[j] = A * q * q;
                }
                break;
            }
        }
        return t;
    }
};

// R = i hbar v phi' + G_op phi - gamma |phi|^2 phi, all derivatives spectral.
inline Field fgl_residual(const Field& phi, const TravelingWaveProblem& prob) {
    if (phi.grid.get() != prob.grid.get())
        throw DomainError("fgl_residual: field grid does not match problem grid");
    const std::size_t M = phi.size();
    const auto gap = prob.dispersion_table();
    const std::size_t nyq = prob.grid->nyquist_index();
    std::vector<complexd> spec(M);
    prob.grid->forward(phi.values, spec);
    for (std::size_t j = 0; j < M; ++j) {
        // i hbar v (iq) + G_op(q) acting per mode
        const double hvq = j == nyq ? 0.0 : prob.params.hbar * prob.wave_speed *
                                            prob.grid->wavenumber(j);
        spec[j] *= gap[j] - hvq;
    }
    Field out(phi.grid);
    prob.grid->inverse(spec, out.values);
    for (std::size_t j = 0; j < M; ++j) out[j] -= prob.gamma * std::norm(phi[j]) * phi[j];
    return out;
}

struct SolveOptions {
    std::size_t max_iter = 400;
    double residual_tol = 1e-10;  // on ||R - mu phi||_inf
    bool allow_newton_fallback = true;
    double boundary_decay_warn = 1e-10;
};

struct SolveReport {
    std::size_t iterations = 0;
    double residual = 0.0;
    bool used_newton = false;
    bool boundary_warning = false;
};

namespace detail {

inline double residual_inf(const Field& phi, const TravelingWaveProblem& prob, double mu) {
    Field r = fgl_residual(phi, prob);
    double m = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) m = std::max(m, std::abs(r[j] - mu * phi[j]));
    return m;
}

// Symbol of the linear part L = G_op - hbar v q - mu.
inline std::vector<double> linear_symbol(const TravelingWaveProblem& prob, double mu) {
    auto d = prob.dispersion_table();
    const std::size_t nyq = prob.grid->nyquist_index();
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (j != nyq) d[j] -= prob.params.hbar * prob.wave_speed * prob.grid->wavenumber(j);
        d[j] -= mu;
    }
    return d;
}

// Damped Newton with restarted GMRES on the real-linear Jacobian
// J h = L h - gamma (2|u|^2 h + u^2 conj(h)). A residual-proportional
// Tikhonov shift keeps the phase/translation null modes harmless.
inline Field newton_profile(const TravelingWaveProblem& prob, Field u, double mu,
                            const SolveOptions& opt, SolveReport& rep) {
    const std::size_t M = u.size();
    const auto L = linear_symbol(prob, mu);
    const auto& g = *prob.grid;

    auto apply_L = [&](const std::vector<complexd>& in, std::vector<complexd>& out) {
        std::vector<complexd> spec(M);
        g.forward(in, spec);
        for (std::size_t j = 0; j < M; ++j) spec[j] *= L[j];
        out.resize(M);
        g.inverse(spec, out);
    };

    auto F = [&](const std::vector<complexd>& v) {
        std::vector<complexd> out;
        apply_L(v, out);
        for (std::size_t j = 0; j < M; ++j) out[j] -= prob.gamma * std::norm(v[j]) * v[j];
        return out;
    };

    auto inner = [&](const std::vector<complexd>& a, const std::vector<complexd>& b) {
        // real inner product on C^M viewed as R^{2M}
        double s = 0.0;
        for (std::size_t j = 0; j < M; ++j)
            s += a[j].real() * b[j].real() + a[j].imag() * b[j].imag();
        return s;
    };
    auto nrm2 = [&](const std::vector<complexd>& a) { return std::sqrt(inner(a, a)); };

    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        auto r = F(u.values);
        double rn = 0.0;
        for (auto& z : r) rn = std::max(rn, std::abs(z));
        rep.iterations = it;
        rep.residual = rn;
        if (rn < opt.residual_tol) return u;

        const double tau = 0.5 * rn;
        auto jacobian = [&](const std::vector<complexd>& h) {
            std::vector<complexd> out;
            apply_L(h, out);
            for (std::size_t j = 0; j < M; ++j) {
                const complexd uj = u.values[j];
                out[j] -= prob.gamma * (2.0 * std::norm(uj) * h[j] + uj * uj * std::conj(h[j]));
                out[j] += tau * h[j];
            }
            return out;
        };

        // GMRES(40) for J h = -r
        std::vector<complexd> rhs(M);
        for (std::size_t j = 0; j < M; ++j) rhs[j] = -r[j];
        const std::size_t restart = 40;
        std::vector<std::vector<complexd>> basis;
        std::vector<std::vector<double>> h(restart + 1, std::vector<double>(restart, 0.0));
        const double beta = nrm2(rhs);
        if (beta == 0.0) return u;
        basis.push_back(rhs);
        for (auto& z : basis[0]) z /= beta;
        std::vector<double> gvec(restart + 1, 0.0);
        gvec[0] = beta;
        std::vector<double> cs(restart, 0.0), sn(restart, 0.0);
        std::size_t kdim = 0;
        for (std::size_t k = 0; k < restart; ++k) {
            auto w = jacobian(basis[k]);
            for (std::size_t i = 0; i <= k; ++i) {
                h[i][k] = inner(w, basis[i]);
                for (std::size_t j = 0; j < M; ++j) w[j] -= h[i][k] * basis[i][j];
            }
            h[k + 1][k] = nrm2(w);
            if (h[k + 1][k] > 1e-14 * beta)
                for (auto& z : w) z /= h[k + 1][k];
            basis.push_back(std::move(w));
            for (std::size_t i = 0; i < k; ++i) {
                const double t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            const double denom = std::hypot(h[k][k], h[k + 1][k]);
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            gvec[k + 1] = -sn[k] * gvec[k];
            gvec[k] = cs[k] * gvec[k];
            kdim = k + 1;
            if (std::abs(gvec[k + 1]) < 1e-4 * beta) break;
        }
        std::vector<double> y(kdim, 0.0);
        for (std::size_t i = kdim; i-- > 0;) {
            double s = gvec[i];
            for (std::size_t j = i + 1; j < kdim; ++j) s -= h[i][j] * y[j];
            y[i] = s / h[i][i];
        }
        std::vector<complexd> delta(M, complexd{0.0, 0.0});
        for (std::size_t i = 0; i < kdim; ++i)
            for (std::size_t j = 0; j < M; ++j) delta[j] += y[i] * basis[i][j];

        // backtracking on the L2 residual
        const double f0 = nrm2(r);
        double step = 1.0;
        Field trial = u;
        bool accepted = false;
        for (int half = 0; half < 10; ++half) {
            for (std::size_t j = 0; j < M; ++j)
                trial.values[j] = u.values[j] + step * delta[j];
            if (nrm2(F(trial.values)) < f0) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            throw ConvergenceError("newton_profile: line search stalled, residual = " +
                                   std::to_string(rn));
        u = trial;
    }
    throw ConvergenceError("newton_profile: no convergence after " +
                           std::to_string(opt.max_iter) +
                           " iterations, residual = " + std::to_string(rep.residual));
}

}  // namespace detail

// Petviashvili fixed point for L u = gamma |u|^2 u with L = G_op - hbar v q - mu.
// The shift mu plays the role of the profile's frequency in the co-moving
// gauge; the converged field satisfies fgl_residual(u) = mu u.
inline Field solve_profile(const TravelingWaveProblem& prob, const Field& initial_guess,
                           double frequency_shift, const SolveOptions& opt = {},
                           SolveReport* report = nullptr) {
    if (initial_guess.grid.get() != prob.grid.get())
        throw DomainError("solve_profile: guess grid does not match problem grid");
    const std::size_t M = initial_guess.size();
    double gmax = 0.0;
    for (std::size_t j = 0; j < M; ++j) gmax = std::max(gmax, std::abs(initial_guess[j]));
    if (gmax == 0.0) throw DomainError("solve_profile: initial guess must be nonzero");

    const auto L = detail::linear_symbol(prob, frequency_shift);
    for (std::size_t j = 0; j < M; ++j)
        if (!(L[j] > 0.0))
            throw DomainError("solve_profile: linear symbol G_op(q) - hbar v q - mu is not "
                              "positive at mode " + std::to_string(j) +
                              "; no Petviashvili branch here");

    SolveReport rep;
    Field u = initial_guess;
    const auto& g = *prob.grid;
    std::vector<complexd> uhat(M), nhat(M), nl(M);

    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        g.forward(u.values, uhat);
        for (std::size_t j = 0; j < M; ++j)
            nl[j] = prob.gamma * std::norm(u.values[j]) * u.values[j];
        g.forward(nl, nhat);

        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            num += L[j] * std::norm(uhat[j]);
            den += (std::conj(uhat[j]) * nhat[j]).real();
        }
        if (!(den > 0.0) || !(num > 0.0))
            throw TrivialAttractorError("solve_profile: stabilizing factor lost positivity "
                                        "(repulsive branch or collapsing iterate)");
        const double S = std::pow(num / den, 1.5);
        for (std::size_t j = 0; j < M; ++j) uhat[j] = S * nhat[j] / L[j];
        g.inverse(uhat, u.values);

        double umax = 0.0;
        for (std::size_t j = 0; j < M; ++j) umax = std::max(umax, std::abs(u.values[j]));
        if (umax < 1e-14)
            throw TrivialAttractorError("solve_profile: iterate collapsed to zero");

        rep.iterations = it;
        rep.residual = detail::residual_inf(u, prob, frequency_shift);
        if (rep.residual < opt.residual_tol) break;
        if (it == opt.max_iter) {
            if (!opt.allow_newton_fallback)
                throw ConvergenceError("solve_profile: no convergence after " +
                                       std::to_string(opt.max_iter) +
                                       " iterations, residual = " + std::to_string(rep.residual));
            rep.used_newton = true;
            u = detail::newton_profile(prob, u, frequency_shift, opt, rep);
        }
    }

    // localized profiles should decay below the warning floor at the ends
    const double edge = std::max(std::abs(u.values.front()), std::abs(u.values.back()));
    double peak = 0.0;
    for (std::size_t j = 0; j < M; ++j) peak = std::max(peak, std::abs(u.values[j]));
    rep.boundary_warning = edge > opt.boundary_decay_warn * peak;
    if (report) *report = rep;
    return u;
}

// Direct Newton entry point, used to cross-check the Petviashvili result.
inline Field solve_profile_newton(const TravelingWaveProblem& prob, const Field& initial_guess,
                                  double frequency_shift, const SolveOptions& opt = {},
                                  SolveReport* report = nullptr) {
    if (initial_guess.grid.get() != prob.grid.get())
        throw DomainError("solve_profile_newton: guess grid does not match problem grid");
    SolveReport rep;
    Field u = detail::newton_profile(prob, initial_guess, frequency_shift, opt, rep);
    rep.used_newton = true;
    if (report) *report = rep;
    return u;
}

}  // namespace epdyn
