#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "epdyn/dispersion.hpp"
#include "epdyn/lattice.hpp"

using namespace epdyn;
using Catch::Approx;

namespace {
constexpr double pi = std::numbers::pi;

LatticeState random_state(std::size_t L, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    auto s = LatticeState::zeros(L);
    for (std::size_t n = 0; n < L; ++n) {
        s.psi[n] = complexd{u(rng), u(rng)};
        s.xi[n] = u(rng);
        s.eta[n] = u(rng);
    }
    return s;
}
}  // namespace

TEST_CASE("lambda term") {
    ModelParams p;
    p.site_energy = 0.7;
    auto s = LatticeState::zeros(16);
    CHECK(lambda_term(s, p) == Approx(0.7).epsilon(1e-15));

    // one stretched bond on an open chain
    auto s2 = LatticeState::zeros(8);
    s2.xi[3] = 0.0;
    s2.xi[4] = 0.4;
    p.elasticity = 2.0;
    // the displaced site stretches both adjacent bonds
    CHECK(lambda_term(s2, p, Boundary::Open) ==
          Approx(0.7 + 2.0 * 0.5 * 2.0 * 0.16).epsilon(1e-14));

    // random state: Lambda - eps equals an independently summed phonon energy
    auto s3 = random_state(32, 3);
    double eph = 0.0;
    for (std::size_t n = 0; n < 32; ++n) {
        eph += s3.eta[n] * s3.eta[n] / (2.0 * p.mass);
        const double d = s3.xi[(n + 1) % 32] - s3.xi[n];
        eph += 0.5 * p.elasticity * d * d;
    }
    CHECK(lambda_term(s3, p) - p.site_energy == Approx(eph).epsilon(1e-13));
}

TEST_CASE("rhs stencils and dispersion") {
    ModelParams p;
    p.exponent_s = 6.0;
    LatticeTopology topo;

    SECTION("phonon Laplacian with psi = 0") {
        auto s = LatticeState::zeros(16);
        s.xi[5] = 1.0;
        auto d = rhs(s, p, topo);
        for (std::size_t n = 0; n < 16; ++n) {
            double expect = 0.0;
            if (n == 4 || n == 6) expect = 1.0;
            if (n == 5) expect = -2.0;
            CHECK(d.deta[n] == Approx(p.elasticity * expect).margin(1e-14));
            CHECK(std::abs(d.dpsi[n]) == 0.0);
        }
    }

    SECTION("uniform exciton sees eps - J(0)") {
        p.site_energy = 0.3;
        auto s = LatticeState::zeros(128);
        const complexd c{0.6, 0.2};
        for (auto& a : s.psi) a = c;
        auto d = rhs(s, p, topo);
        const double J0 = lattice_dispersion(0.0, p);
        const complexd expect = complexd{0.0, -1.0 / p.hbar} * (p.site_energy - J0) * c;
        for (std::size_t n = 0; n < 128; ++n) {
            CHECK(std::abs(d.dpsi[n] - expect) < 1e-8);
            CHECK(d.deta[n] == Approx(0.0).margin(1e-14));
        }
    }

    SECTION("plane wave frequency matches (Lambda - J(k))/hbar") {
        auto s = LatticeState::zeros(256);
        const double k = 2.0 * pi * 8.0 / 256.0;
        for (std::size_t n = 0; n < 256; ++n)
            s.psi[n] = std::polar(1.0, k * static_cast<double>(n));
        auto d = rhs(s, p, topo);
        const double lam = lambda_term(s, p);
        const double Jk = lattice_dispersion(k, p);
        for (std::size_t n = 0; n < 256; n += 37) {
            const complexd ratio = d.dpsi[n] / s.psi[n];
            const complexd expect = complexd{0.0, -1.0 / p.hbar} * (lam - Jk);
            CHECK(std::abs(ratio - expect) / std::abs(expect) < 1e-10);
        }
    }
}

TEST_CASE("fft coupling path agrees with direct summation") {
    ModelParams p;
    p.exponent_s = 2.5;
    p.coupling_chi = 0.4;
    auto s = random_state(64, 9);
    LatticeTopology direct;
    LatticeTopology fast;
    fast.fft_coupling = true;
    auto dd = rhs(s, p, direct);
    auto df = rhs(s, p, fast);
    for (std::size_t n = 0; n < 64; ++n) {
        CHECK(std::abs(dd.dpsi[n] - df.dpsi[n]) < 1e-12);
        CHECK(dd.deta[n] == Approx(df.deta[n]).margin(1e-13));
    }
    LatticeTopology open_fft;
    open_fft.boundary = Boundary::Open;
    open_fft.fft_coupling = true;
    CHECK_THROWS_AS(LatticeModel(64, p, open_fft), ConfigError);
}

TEST_CASE("open boundary ends") {
    ModelParams p;
    p.exponent_s = 3.0;
    p.coupling_chi = 0.5;
    LatticeTopology topo;
    topo.boundary = Boundary::Open;
    auto s = random_state(4, 17);
    auto d = rhs(s, p, topo);
    // brute force on 4 sites
    const double w = p.elasticity;
    CHECK(d.deta[0] == Approx(w * (s.xi[1] - s.xi[0]) +
                              p.coupling_chi * (std::norm(s.psi[1]) - std::norm(s.psi[0])))
                           .margin(1e-14));
    CHECK(d.deta[3] == Approx(w * (s.xi[2] - s.xi[3])).margin(1e-14));
    // coupling sum by hand at site 1
    complexd conv{0.0, 0.0};
    for (std::size_t m = 0; m < 4; ++m)
        if (m != 1) conv += coupling(1, m, p) * s.psi[m];
    const double lam = lambda_term(s, p, Boundary::Open);
    const complexd expect = complexd{0.0, -1.0 / p.hbar} *
                            (lam * s.psi[1] - conv +
                             p.coupling_chi * (s.xi[2] - s.xi[1]) * s.psi[1]);
    CHECK(std::abs(d.dpsi[1] - expect) < 1e-13);
}

TEST_CASE("nearest-neighbour limit with cutoff 1") {
    ModelParams p;
    p.exponent_s = 2.5;
    p.coupling_chi = 0.3;
    LatticeTopology topo;
    topo.interaction_cutoff = 1;
    auto s = random_state(24, 21);
    auto d = rhs(s, p, topo);
    // independent nearest-neighbour rhs
    const double lam = lambda_term(s, p);
    for (std::size_t n = 0; n < 24; ++n) {
        const std::size_t l = (n + 23) % 24, r = (n + 1) % 24;
        const complexd expect =
            complexd{0.0, -1.0 / p.hbar} *
            (lam * s.psi[n] - p.interaction_J * (s.psi[l] + s.psi[r]) +
             p.coupling_chi * (s.xi[r] - s.xi[n]) * s.psi[n]);
        CHECK(std::abs(d.dpsi[n] - expect) < 1e-10);
        const double deta = p.elasticity * (s.xi[r] - 2.0 * s.xi[n] + s.xi[l]) +
                            p.coupling_chi * (std::norm(s.psi[r]) - std::norm(s.psi[n]));
        CHECK(d.deta[n] == Approx(deta).margin(1e-12));
    }
}

TEST_CASE("source variants") {
    ModelParams p;
    p.coupling_chi = 1.0;
    LatticeTopology fwd;
    LatticeTopology sym;
    sym.source = PhononSource::SymmetricDifference;
    auto s = random_state(16, 33);
    s.xi.assign(16, 0.0);
    auto df = rhs(s, p, fwd);
    auto ds = rhs(s, p, sym);
    for (std::size_t n = 0; n < 16; ++n) {
        const double rf = std::norm(s.psi[(n + 1) % 16]) - std::norm(s.psi[n]);
        const double rs =
            0.5 * (std::norm(s.psi[(n + 1) % 16]) - std::norm(s.psi[(n + 15) % 16]));
        CHECK(df.deta[n] == Approx(rf).margin(1e-13));
        CHECK(ds.deta[n] == Approx(rs).margin(1e-13));
    }
    LatticeTopology scaled;
    scaled.source_prefactor = 2.0;
    auto d2 = rhs(s, p, scaled);
    for (std::size_t n = 0; n < 16; ++n)
        CHECK(d2.deta[n] == Approx(2.0 * df.deta[n]).margin(1e-13));
}

TEST_CASE("total energy values") {
    ModelParams p;
    p.exponent_s = 6.0;
    p.site_energy = 0.9;
    LatticeTopology topo;

    auto z = LatticeState::zeros(32);
    CHECK(total_energy(z, p, topo) == 0.0);

    auto one = LatticeState::zeros(32);
    one.psi[0] = 1.0;
    CHECK(total_energy(one, p, topo) == Approx(0.9).epsilon(1e-14));

    auto pw = LatticeState::zeros(256);
    const double k = 2.0 * pi * 12.0 / 256.0;
    for (std::size_t n = 0; n < 256; ++n)
        pw.psi[n] = std::polar(1.0 / 16.0, k * static_cast<double>(n));
    const double expect = p.site_energy - lattice_dispersion(k, p);
    CHECK(total_energy(pw, p, topo) == Approx(expect).epsilon(1e-10));

    auto parts = energy_breakdown(pw, p, topo);
    CHECK(parts.total() == Approx(total_energy(pw, p, topo)).epsilon(1e-13));
}

TEST_CASE("rk4 stepping") {
    ModelParams p;
    p.exponent_s = 2.5;
    p.coupling_chi = 0.5;
    LatticeTopology topo;
    topo.fft_coupling = true;
    LatticeModel model(64, p, topo);

    SECTION("zero state stays zero") {
        auto s = LatticeState::zeros(64);
        auto s2 = model.step_rk4(s, 0.25);
        CHECK(s2.time == Approx(0.25));
        CHECK(norm(s2) == 0.0);
        for (std::size_t n = 0; n < 64; ++n) {
            CHECK(s2.xi[n] == 0.0);
            CHECK(s2.eta[n] == 0.0);
        }
    }

    SECTION("norm conserved, energy drift bounded by the source anomaly") {
        auto s = LatticeState::zeros(64);
        double nn = 0.0;
        for (std::size_t n = 0; n < 64; ++n) {
            const double x = static_cast<double>(n) - 32.0;
            s.psi[n] = std::exp(-x * x / 72.0) * std::polar(1.0, 0.4 * x);
            nn += std::norm(s.psi[n]);
        }
        for (auto& a : s.psi) a /= std::sqrt(nn);
        const double n0 = norm(s);
        const double e0 = total_energy(s, p, topo);
        for (int i = 0; i < 200; ++i) s = model.step_rk4(s, 0.01);
        CHECK(std::abs(norm(s) - n0) < 1e-9);
        // the printed forward-difference source is not the exact gradient of
        // the energy functional; the induced drift stays small on this horizon
        CHECK(std::abs(total_energy(s, p, topo) - e0) / std::abs(e0) < 1e-4);
    }

    SECTION("free phonons conserve energy to integrator accuracy") {
        ModelParams pf = p;
        pf.coupling_chi = 0.0;
        LatticeModel free_model(64, pf, LatticeTopology{});
        auto s = LatticeState::zeros(64);
        for (std::size_t n = 0; n < 64; ++n)
            s.xi[n] = 0.3 * std::cos(2.0 * pi * 3.0 * static_cast<double>(n) / 64.0);
        const double e0 = total_energy(s, pf, LatticeTopology{});
        for (int i = 0; i < 500; ++i) s = free_model.step_rk4(s, 0.02);
        CHECK(std::abs(total_energy(s, pf, LatticeTopology{}) - e0) / std::abs(e0) < 1e-8);
    }

    SECTION("divergence detection") {
        auto s = LatticeState::zeros(64);
        s.psi[5] = complexd{std::numeric_limits<double>::infinity(), 0.0};
        CHECK_THROWS_AS(model.step_rk4(s, 0.01), BlowupError);
        CHECK_THROWS_AS(model.step_rk4(LatticeState::zeros(64), 0.0), ConfigError);
    }
}

TEST_CASE("topology validation") {
    ModelParams p;
    LatticeTopology topo;
    topo.interaction_cutoff = 40;  // >= L/2 for L = 64
    CHECK_THROWS_AS(LatticeModel(64, p, topo), DomainError);
    ModelParams bad;
    bad.exponent_s = 1.0;
    CHECK_THROWS_AS(LatticeModel(64, bad, LatticeTopology{}), DivergenceError);
    auto s = LatticeState::zeros(3);
    s.xi.resize(2);
    CHECK_THROWS_AS(s.validate(), DomainError);
}
