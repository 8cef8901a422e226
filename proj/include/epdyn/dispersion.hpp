#pragma once

// Exact lattice dispersion J(k), spectral gap G(k) = J(0) - J(k), their
// polylogarithm-asymptotic forms, and the nonlocal kernel diagnostic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>

#include "epdyn/errors.hpp"
#include "epdyn/params.hpp"

namespace epdyn {

namespace detail {

inline double riemann_zeta(double s) { return std::riemann_zeta(s); }

// Asymptotic (integration-by-parts) evaluation of
//   type 0:  int_a^inf cos(k x) x^{-s} dx
//   type 1:  int_a^inf sin(k x) x^{-s} dx
// Valid when k*a is large; terms shrink by ~ s/(k a) per order.
inline double oscillatory_power_integral(double k, double s, double a, int type, double tol_abs) {
    const double sin_ka = std::sin(k * a);
    const double cos_ka = std::cos(k * a);
    double acc = 0.0;
    double factor = 1.0;  // accumulated (+-) s(s+1).../k^j
    double cur_s = s;
    int cur_type = type;
    double prev_mag = HUGE_VAL;
    for (int j = 0; j < 64; ++j) {
        const double boundary =
            (cur_type == 0 ? -sin_ka : cos_ka) * std::pow(a, -cur_s) / k;
        const double term = factor * boundary;
        const double mag = std::abs(factor) * std::pow(a, -cur_s) / k;
        if (mag > prev_mag) break;  // asymptotic series turned; stop at smallest term
        acc += term;
        if (mag < tol_abs && j > 0) break;
        prev_mag = mag;
        factor *= (cur_type == 0 ? cur_s : -cur_s) / k;
        cur_s += 1.0;
        cur_type ^= 1;
    }
    return acc;
}

struct LatticeSums {
    double cos_sum;  // sum_{n>=1} cos(k n)/n^s
    double gap_sum;  // sum_{n>=1} (1 - cos(k n))/n^s
};

// Truncated direct summation with Euler-Maclaurin tail, the oscillatory
// integral handled by oscillatory_power_integral. Requires s > 1 and
// 0 < |k| <= pi after reduction to the Brillouin zone.
inline LatticeSums lattice_sums(double k, double s, double tol) {
    const double ak = std::abs(k);
    const double zs = riemann_zeta(s);
    const double tol_abs = tol * std::max(1.0, zs);

    // Truncation point: k*N >= 40 keeps the tail series convergent; the
    // second bound controls the leading Euler-Maclaurin truncation error
    // ~ k^5 N^{-s}/30240.
    double n_osc = 40.0 / ak;
    double n_em = std::pow(std::pow(ak, 5) / (30240.0 * tol_abs), 1.0 / s);
    auto N = static_cast<std::int64_t>(std::ceil(std::max({n_osc, n_em, 1000.0})));
    N = std::min<std::int64_t>(N, 200'000'000);

    double cos_sum = 0.0, gap_sum = 0.0;
    double cos_c = 0.0, gap_c = 0.0;  // Kahan compensation
    for (std::int64_t n = N; n >= 1; --n) {  // ascending magnitude
        const double inv = std::pow(static_cast<double>(n), -s);
        const double sh = std::sin(0.5 * ak * static_cast<double>(n));
        const double one_minus_cos = 2.0 * sh * sh;
        {
            const double y = one_minus_cos * inv - gap_c;
            const double t = gap_sum + y;
            gap_c = (t - gap_sum) - y;
            gap_sum = t;
        }
        {
            const double y = (1.0 - one_minus_cos) * inv - cos_c;
            const double t = cos_sum + y;
            cos_c = (t - cos_sum) - y;
            cos_sum = t;
        }
    }

    // Euler-Maclaurin tails starting at a = N+1:
    //   sum_{n>=a} g(n) = int_a^inf g + g(a)/2 - g'(a)/12 + g'''(a)/720 ...
    const double a = static_cast<double>(N) + 1.0;

    // pure power tail: g(x) = x^{-s}
    const double pa = std::pow(a, -s);
    double zeta_tail = std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * pa + s * pa / (12.0 * a)
                       - s * (s + 1.0) * (s + 2.0) * pa / (720.0 * a * a * a);

    // oscillatory tail: g(x) = cos(k x) x^{-s}
    const double ca = std::cos(ak * a), sa = std::sin(ak * a);
    const double g_half = 0.5 * ca * pa;
    const double gp = -ak * sa * pa - s * ca * pa / a;
    const double gppp = ak * ak * ak * sa * pa + 3.0 * ak * ak * s * ca * pa / a
                        - 3.0 * ak * s * (s + 1.0) * sa * pa / (a * a)
                        - s * (s + 1.0) * (s + 2.0) * ca * pa / (a * a * a);
    double cos_tail = oscillatory_power_integral(ak, s, a, 0, std::max(1e-3 * tol_abs, 1e-18))
                      + g_half - gp / 12.0 + gppp / 720.0;

    return {cos_sum + cos_tail, gap_sum + zeta_tail - cos_tail};
}

// Reduce a wavenumber to (-pi, pi]; the lattice sums are 2pi-periodic.
inline double reduce_wavenumber(double k) {
    double r = std::remainder(k, 2.0 * std::numbers::pi);
    return r;
}

}  // namespace detail

// J / |n - m|^s; self-coupling is undefined.
inline double coupling(std::int64_t n, std::int64_t m, const ModelParams& p) {
    if (n == m) throw DomainError("coupling: self-coupling n == m is undefined");
    const double d = std::abs(static_cast<double>(n - m));
    return p.interaction_J * std::pow(d, -p.exponent_s);
}

// J(k) = 2 J sum_{n>=1} cos(k n)/n^s; J(0) = 2 J zeta(s).
inline double lattice_dispersion(double k, const ModelParams& p, double tol = 1e-12) {
    const double s = p.exponent_s;
    if (!(s > 1.0)) throw DivergenceError("lattice_dispersion: requires s > 1");
    if (!(tol > 0.0)) throw DomainError("lattice_dispersion: tol must be > 0");
    const double kr = detail::reduce_wavenumber(k);
    if (kr == 0.0) return 2.0 * p.interaction_J * detail::riemann_zeta(s);
    if (std::abs(kr) < 1e-7)
        throw DomainError("lattice_dispersion: |k| below 1e-7 (and nonzero) is outside the "
                          "summation domain; use k = 0 exactly or the asymptotic form");
    return 2.0 * p.interaction_J * detail::lattice_sums(kr, s, tol).cos_sum;
}

// G(k) = J(0) - J(k), evaluated without the J(0) cancellation.
inline double spectral_gap(double k, const ModelParams& p, double tol = 1e-12) {
    const double s = p.exponent_s;
    if (!(s > 1.0)) throw DivergenceError("spectral_gap: requires s > 1");
    if (!(tol > 0.0)) throw DomainError("spectral_gap: tol must be > 0");
    const double kr = detail::reduce_wavenumber(k);
    if (kr == 0.0) return 0.0;
    if (std::abs(kr) < 1e-7)
        throw DomainError("spectral_gap: |k| below 1e-7 (and nonzero) is outside the "
                          "summation domain; use k = 0 exactly or the asymptotic form");
    return 2.0 * p.interaction_J * detail::lattice_sums(kr, s, tol).gap_sum;
}

// D_s = pi J / (Gamma(s) sin(pi (s-1)/2)), valid on 2 <= s < 3.
inline double fractional_coefficient(const ModelParams& p) {
    const double s = p.exponent_s;
    if (s == 3.0)
        throw DomainError("fractional_coefficient: sin(pi(s-1)/2) vanishes at s = 3 "
                          "(logarithmic regime)");
    if (!(s >= 2.0 && s < 3.0))
        throw DomainError("fractional_coefficient: valid window is 2 <= s < 3");
    return std::numbers::pi * p.interaction_J /
           (std::tgamma(s) * std::sin(std::numbers::pi * (s - 1.0) / 2.0));
}

// Leading small-k form of G(k), piecewise by regime.
inline double asymptotic_gap(double k, const ModelParams& p) {
    const double s = p.exponent_s;
    const double J = p.interaction_J;
    const double ak = std::abs(k);
    if (!(s >= 2.0)) throw DomainError("asymptotic_gap: regimes start at s = 2");
    switch (classify_regime(s)) {
        case Regime::Hilbert:
        case Regime::Fractional:
            return fractional_coefficient(p) * std::pow(ak, s - 1.0);
        case Regime::Logarithmic:
            if (ak == 0.0) throw DomainError("asymptotic_gap: ln|k| singular at k = 0 for s = 3");
            return -J * k * k * std::log(ak);
        case Regime::Quadratic:
            return 0.5 * J * detail::riemann_zeta(s - 2.0) * k * k;
    }
    throw DomainError("asymptotic_gap: unreachable");
}

namespace detail {

// int_0^kmax cos(k x) k^alpha dk for alpha > -1, via geometric panels toward
// the origin with composite Simpson per panel; the lowest decades are summed
// from the Taylor expansion of cos.
inline double cos_power_moment(double x, double alpha, double kmax, double tol_abs) {
    const double ax = std::abs(x);
    // analytic bottom: cos(kx) ~ 1 - (kx)^2/2 + (kx)^4/24 below k0
    double k0 = kmax * std::pow(2.0, -40.0);
    if (ax > 0.0) k0 = std::min(k0, 1e-4 / ax);
    double acc = std::pow(k0, alpha + 1.0) / (alpha + 1.0)
                 - ax * ax * std::pow(k0, alpha + 3.0) / (2.0 * (alpha + 3.0))
                 + ax * ax * ax * ax * std::pow(k0, alpha + 5.0) / (24.0 * (alpha + 5.0));
    // geometric panels [lo, hi] from k0 up to kmax
    double lo = k0;
    while (lo < kmax) {
        double hi = std::min(2.0 * lo, kmax);
        // Simpson subdivision: resolve both the panel and the oscillation
        int m = 16 + static_cast<int>(std::ceil(4.0 * (hi - lo) * ax));
        m += m % 2;  // even
        const double h = (hi - lo) / m;
        double simpson = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double kk = lo + h * i;
            const double f = std::cos(kk * x) * std::pow(kk, alpha);
            const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            simpson += w * f;
        }
        acc += simpson * h / 3.0;
        lo = hi;
        (void)tol_abs;
    }
    return acc;
}

}  // namespace detail

// Diagnostic-only evaluation of K(x) = (1/pi) int e^{ikx} G(k)/k^2 dk over a
// symmetric wavenumber window [-kmax, kmax]. The |k|^{s-3} singularity and
// the constant offset are integrated semi-analytically; the smooth remainder
// by trapezoid over nwave uniformly spaced wavenumbers (an Euler-Maclaurin
// boundary correction keeps the two-resolution agreement tight).
// Supported for non-integer s > 2 only; never used inside time stepping.
inline double kernel_K(double x, const ModelParams& p, double kmax, std::size_t nwave,
                       double tol = 1e-12) {
    const double s = p.exponent_s;
    const double J = p.interaction_J;
    if (!(s > 2.0)) throw DomainError("kernel_K: requires s > 2 (integrability at k = 0)");
    if (s == std::floor(s))
        throw DomainError("kernel_K: integer s unsupported (logarithmic corrections)");
    if (nwave < 8) throw DomainError("kernel_K: need at least 8 wavenumbers");
    if (!(kmax > 0.0)) throw DomainError("kernel_K: kmax must be > 0");

    const double pi = std::numbers::pi;
    // fractional coefficient C_s = -2 J Gamma(1-s) cos(pi(s-1)/2); by the
    // reflection formula this coincides with D_s on 2 < s < 3 and analytically
    // continues it to non-integer s > 3.
    const double C_s = pi * J / (std::tgamma(s) * std::sin(pi * (s - 1.0) / 2.0));
    const double z2 = detail::riemann_zeta(s - 2.0);

    // singular part: (C_s/pi) * 2 int_0^kmax cos(kx) k^{s-3} dk
    double acc = (C_s / pi) * 2.0 * detail::cos_power_moment(x, s - 3.0, kmax, tol);
    // constant part: (J zeta(s-2)/pi) * 2 sin(kmax x)/x
    acc += (J * z2 / pi) * 2.0 * (x == 0.0 ? kmax : std::sin(kmax * x) / x);

    // smooth remainder R(k) = G/k^2 - C_s|k|^{s-3} - J zeta(s-2), even in k
    auto remainder = [&](double k) {
        const double ak = std::abs(k);
        if (ak == 0.0) return 0.0;
        const double G = spectral_gap(k, p, tol);
        return G / (k * k) - C_s * std::pow(ak, s - 3.0) - J * z2;
    };
    const double dk = 2.0 * kmax / static_cast<double>(nwave);
    double trap = 0.0;
    for (std::size_t j = 0; j < nwave; ++j) {
        const double k = -kmax + dk * static_cast<double>(j);
        trap += remainder(k) * std::cos(k * x);
    }
    trap *= dk;
    // trapezoid boundary correction -dk^2/12 (f'(kmax) - f'(-kmax)) with
    // f(k) = R(k) cos(kx); R is even so f'(kmax) - f'(-kmax) = 2 f'(kmax).
    const double h = 1e-4;
    const double Rp = (remainder(kmax + h) - remainder(kmax - h)) / (2.0 * h);
    const double fp = Rp * std::cos(kmax * x) - x * remainder(kmax) * std::sin(kmax * x);
    trap -= dk * dk / 12.0 * 2.0 * fp;
    acc += trap / pi;
    return acc;
}

}  // namespace epdyn
