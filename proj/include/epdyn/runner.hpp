#pragma once

// Configuration-driven orchestration: JSON run configs, deterministic CSV
// products, manifests, and the subcommand helpers behind the CLI.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "epdyn/continuum.hpp"
#include "epdyn/dispersion.hpp"
#include "epdyn/errors.hpp"
#include "epdyn/io.hpp"
#include "epdyn/lattice.hpp"
#include "epdyn/params.hpp"
#include "epdyn/traveling_wave.hpp"
#include "epdyn/version.hpp"

namespace epdyn {

using json = nlohmann::ordered_json;

enum class RunKind { Continuum, Lattice, TravelingWave };

inline const char* to_string(RunKind k) {
    switch (k) {
        case RunKind::Continuum: return "continuum";
        case RunKind::Lattice: return "lattice";
        case RunKind::TravelingWave: return "traveling_wave";
    }
    return "?";
}

struct InitialCondition {
    enum class Family { GaussianPacket, PlaneWave, SechSoliton, Zero };
    Family family = Family::Zero;
    double x0 = 0.0;
    double width = 1.0;
    double k0 = 0.0;
    double amplitude = 1.0;
    double eta = 1.0;
};

struct IntegratorConfig {
    double dt = 0.01;
    double t_end = 1.0;
    double snapshot_every = 0.0;  // 0: resolved to t_end
    double series_every = 0.0;    // 0: resolved to dt
};

struct OutputConfig {
    std::string directory = "out";
    bool snapshots = true;
    bool series = true;
};

struct RunConfig {
    RunKind run_kind = RunKind::Continuum;
    ModelParams params;

    // continuum
    ScenarioSpec scenario;
    std::string initial_sigma = "zero";  // or "stationary"

    // lattice
    std::size_t sites = 0;
    LatticeTopology topology;

    // spectral grid (continuum / traveling wave)
    double length = 0.0;
    std::size_t points = 0;

    // traveling wave
    double wave_speed = 0.0;
    ProfileDispersion profile_dispersion = ProfileDispersion::Fractional;
    double frequency_shift = 0.0;
    std::optional<double> gamma_override;
    bool jitter_guess = false;

    InitialCondition initial;
    IntegratorConfig integrator;
    OutputConfig outputs;
    unsigned long seed = 0;

    json resolved;  // every default filled in, echoed to the manifest
};

namespace detail {

inline void check_keys(const json& obj, const std::vector<std::string>& allowed,
                       const std::string& where, std::vector<std::string>& violations) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            violations.push_back("unknown key \"" + it.key() + "\" in " + where);
    }
}

inline double get_num(const json& obj, const std::string& key, double def,
                      std::vector<std::string>& violations, const std::string& where) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number()) {
        violations.push_back(where + "." + key + " must be a number");
        return def;
    }
    return obj[key].get<double>();
}

inline std::string iso_time_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tmv{};
    gmtime_r(&t, &tmv);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tmv);
    return buf;
}

inline std::size_t stride_of(double every, double dt, const std::string& name,
                             std::vector<std::string>& violations) {
    const double ratio = every / dt;
    const auto m = static_cast<long long>(std::llround(ratio));
    if (m < 1 || std::abs(every - static_cast<double>(m) * dt) >
                     1e-12 * std::max(1.0, std::abs(every))) {
        violations.push_back(name + " must be a positive multiple of dt");
        return 1;
    }
    return static_cast<std::size_t>(m);
}

}  // namespace detail

inline RunConfig parse_config_json(const json& doc);

// Parse + validate a JSON run configuration. Unknown keys are rejected and
// every violated rule is reported, not just the first.
inline RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config_json(doc);
}

inline RunConfig parse_config_json(const json& doc) {
    std::vector<std::string> v;
    RunConfig cfg;
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    detail::check_keys(doc, {"scenario", "params", "grid", "initial_condition", "integrator",
                             "outputs", "seed"},
                       "config", v);

    // params
    const json params_in = doc.value("params", json::object());
    if (!params_in.is_object()) v.push_back("params must be an object");
    detail::check_keys(params_in, {"hbar", "mass", "elasticity", "coupling_chi", "site_energy",
                                   "interaction_J", "exponent_s"},
                       "params", v);
    cfg.params.hbar = detail::get_num(params_in, "hbar", 1.0, v, "params");
    cfg.params.mass = detail::get_num(params_in, "mass", 1.0, v, "params");
    cfg.params.elasticity = detail::get_num(params_in, "elasticity", 1.0, v, "params");
    cfg.params.coupling_chi = detail::get_num(params_in, "coupling_chi", 0.0, v, "params");
    cfg.params.site_energy = detail::get_num(params_in, "site_energy", 0.0, v, "params");
    cfg.params.interaction_J = detail::get_num(params_in, "interaction_J", 1.0, v, "params");
    cfg.params.exponent_s = detail::get_num(params_in, "exponent_s", 2.5, v, "params");
    try {
        cfg.params.validate();
        if (!(cfg.params.exponent_s > 1.0))
            throw DivergenceError("params.exponent_s <= 1: the coupling sum J(0) diverges");
    } catch (const std::exception& e) {
        v.push_back(e.what());
    }

    // scenario
    const json sc = doc.value("scenario", json::object());
    if (!sc.is_object()) v.push_back("scenario must be an object");
    const std::string type = sc.value("type", "continuum");
    if (type == "continuum") {
        cfg.run_kind = RunKind::Continuum;
        detail::check_keys(sc, {"type", "kind", "dispersion_mode", "nonlinearity_g",
                                "lambda_shift", "phonon_source_prefactor", "initial_sigma"},
                           "scenario", v);
        const std::string kind = sc.value("kind", "nlfse");
        if (kind == "general_nonlocal") cfg.scenario.kind = ScenarioKind::GeneralNonlocal;
        else if (kind == "fractional_zakharov") cfg.scenario.kind = ScenarioKind::FractionalZakharov;
        else if (kind == "hilbert_zakharov") cfg.scenario.kind = ScenarioKind::HilbertZakharov;
        else if (kind == "nlfse") cfg.scenario.kind = ScenarioKind::NLFSE;
        else if (kind == "hilbert_nls") cfg.scenario.kind = ScenarioKind::HilbertNLS;
        else if (kind == "classical_nls") cfg.scenario.kind = ScenarioKind::ClassicalNLS;
        else v.push_back("scenario.kind \"" + kind + "\" is not a known scenario");
        const std::string mode = sc.value("dispersion_mode", "asymptotic");
        if (mode == "exact_gap") cfg.scenario.dispersion_mode = DispersionMode::ExactGap;
        else if (mode == "asymptotic") cfg.scenario.dispersion_mode = DispersionMode::Asymptotic;
        else v.push_back("scenario.dispersion_mode must be \"exact_gap\" or \"asymptotic\"");
        if (sc.contains("nonlinearity_g") && sc["nonlinearity_g"].is_string()) {
            if (sc["nonlinearity_g"].get<std::string>() != "auto")
                v.push_back("scenario.nonlinearity_g must be a number or \"auto\"");
            cfg.scenario.nonlinearity_g = effective_nonlinearity(cfg.params);
        } else {
            cfg.scenario.nonlinearity_g = detail::get_num(sc, "nonlinearity_g", 0.0, v, "scenario");
        }
        cfg.scenario.lambda_shift = detail::get_num(sc, "lambda_shift", 0.0, v, "scenario");
        cfg.scenario.phonon_source_prefactor =
            detail::get_num(sc, "phonon_source_prefactor", 2.0, v, "scenario");
        cfg.initial_sigma = sc.value("initial_sigma", "zero");
        if (cfg.initial_sigma != "zero" && cfg.initial_sigma != "stationary")
            v.push_back("scenario.initial_sigma must be \"zero\" or \"stationary\"");
        try {
            cfg.scenario.validate(cfg.params);
        } catch (const std::exception& e) {
            std::string msg = e.what();
            if (cfg.params.exponent_s == 3.0 &&
                (cfg.scenario.kind == ScenarioKind::NLFSE ||
                 cfg.scenario.kind == ScenarioKind::FractionalZakharov))
                msg += " (the fractional coefficient D_s is singular at s = 3, logarithmic regime)";
            v.push_back(msg);
        }
    } else if (type == "lattice") {
        cfg.run_kind = RunKind::Lattice;
        detail::check_keys(sc, {"type", "boundary", "interaction_cutoff", "fft_coupling",
                                "source", "source_prefactor"},
                           "scenario", v);
        const std::string b = sc.value("boundary", "periodic");
        if (b == "periodic") cfg.topology.boundary = Boundary::Periodic;
        else if (b == "open") cfg.topology.boundary = Boundary::Open;
        else v.push_back("scenario.boundary must be \"periodic\" or \"open\"");
        cfg.topology.interaction_cutoff =
            static_cast<std::size_t>(detail::get_num(sc, "interaction_cutoff", 0.0, v, "scenario"));
        cfg.topology.fft_coupling = sc.value("fft_coupling", false);
        const std::string src = sc.value("source", "forward");
        if (src == "forward") cfg.topology.source = PhononSource::ForwardDifference;
        else if (src == "symmetric") cfg.topology.source = PhononSource::SymmetricDifference;
        else v.push_back("scenario.source must be \"forward\" or \"symmetric\"");
        cfg.topology.source_prefactor = detail::get_num(sc, "source_prefactor", 1.0, v, "scenario");
    } else if (type == "traveling_wave") {
        cfg.run_kind = RunKind::TravelingWave;
        detail::check_keys(sc, {"type", "wave_speed", "profile_dispersion", "frequency_shift",
                                "gamma", "jitter_guess"},
                           "scenario", v);
        cfg.wave_speed = detail::get_num(sc, "wave_speed", 0.0, v, "scenario");
        const std::string pd = sc.value("profile_dispersion", "fractional");
        if (pd == "fractional") cfg.profile_dispersion = ProfileDispersion::Fractional;
        else if (pd == "hilbert") cfg.profile_dispersion = ProfileDispersion::Hilbert;
        else if (pd == "classical") cfg.profile_dispersion = ProfileDispersion::Classical;
        else v.push_back("scenario.profile_dispersion must be fractional, hilbert, or classical");
        cfg.frequency_shift = detail::get_num(sc, "frequency_shift", 0.0, v, "scenario");
        if (sc.contains("gamma") && sc["gamma"].is_number())
            cfg.gamma_override = sc["gamma"].get<double>();
        else if (sc.contains("gamma") && sc["gamma"] != "auto")
            v.push_back("scenario.gamma must be a number or \"auto\"");
        cfg.jitter_guess = sc.value("jitter_guess", false);
        if (std::abs(cfg.wave_speed) == cfg.params.sound_speed())
            v.push_back("scenario.wave_speed hits the sonic singularity |v| = sqrt(w/m)");
    } else {
        v.push_back("scenario.type must be continuum, lattice, or traveling_wave");
    }

    // grid
    const json grid_in = doc.value("grid", json::object());
    if (cfg.run_kind == RunKind::Lattice) {
        detail::check_keys(grid_in, {"sites"}, "grid", v);
        cfg.sites = static_cast<std::size_t>(detail::get_num(grid_in, "sites", 256.0, v, "grid"));
        if (cfg.sites < 2) v.push_back("grid.sites must be >= 2");
    } else {
        detail::check_keys(grid_in, {"length", "points"}, "grid", v);
        cfg.length = detail::get_num(grid_in, "length", 256.0, v, "grid");
        cfg.points = static_cast<std::size_t>(detail::get_num(grid_in, "points", 256.0, v, "grid"));
        if (!(cfg.length > 0.0)) v.push_back("grid.length must be > 0");
        if (cfg.points < 8 || cfg.points % 2 != 0)
            v.push_back("grid.points must be even and >= 8");
    }

    // initial condition
    const json ic = doc.value("initial_condition", json::object());
    const std::string family = ic.value("family", "zero");
    if (family == "gaussian_packet") {
        cfg.initial.family = InitialCondition::Family::GaussianPacket;
        detail::check_keys(ic, {"family", "x0", "width", "k0", "amplitude"},
                           "initial_condition", v);
        cfg.initial.x0 = detail::get_num(ic, "x0", 0.0, v, "initial_condition");
        cfg.initial.width = detail::get_num(ic, "width", 1.0, v, "initial_condition");
        cfg.initial.k0 = detail::get_num(ic, "k0", 0.0, v, "initial_condition");
        cfg.initial.amplitude = detail::get_num(ic, "amplitude", 1.0, v, "initial_condition");
        if (!(cfg.initial.width > 0.0)) v.push_back("initial_condition.width must be > 0");
    } else if (family == "plane_wave") {
        cfg.initial.family = InitialCondition::Family::PlaneWave;
        detail::check_keys(ic, {"family", "k0", "amplitude"}, "initial_condition", v);
        cfg.initial.k0 = detail::get_num(ic, "k0", 0.0, v, "initial_condition");
        cfg.initial.amplitude = detail::get_num(ic, "amplitude", 1.0, v, "initial_condition");
    } else if (family == "sech_soliton") {
        cfg.initial.family = InitialCondition::Family::SechSoliton;
        detail::check_keys(ic, {"family", "eta", "x0"}, "initial_condition", v);
        cfg.initial.eta = detail::get_num(ic, "eta", 1.0, v, "initial_condition");
        cfg.initial.x0 = detail::get_num(ic, "x0", 0.0, v, "initial_condition");
        if (!(cfg.initial.eta > 0.0)) v.push_back("initial_condition.eta must be > 0");
    } else if (family == "zero") {
        cfg.initial.family = InitialCondition::Family::Zero;
        detail::check_keys(ic, {"family"}, "initial_condition", v);
    } else {
        v.push_back("initial_condition.family \"" + family + "\" is not a known family");
    }

    // integrator
    const json it = doc.value("integrator", json::object());
    detail::check_keys(it, {"dt", "t_end", "snapshot_every", "series_every"}, "integrator", v);
    cfg.integrator.dt = detail::get_num(it, "dt", 0.01, v, "integrator");
    cfg.integrator.t_end = detail::get_num(it, "t_end", 1.0, v, "integrator");
    if (!(cfg.integrator.dt > 0.0)) v.push_back("integrator.dt must be > 0");
    if (!(cfg.integrator.t_end > 0.0)) v.push_back("integrator.t_end must be > 0");
    cfg.integrator.snapshot_every =
        detail::get_num(it, "snapshot_every", cfg.integrator.t_end, v, "integrator");
    cfg.integrator.series_every =
        detail::get_num(it, "series_every", cfg.integrator.dt, v, "integrator");
    if (cfg.integrator.dt > 0.0) {
        detail::stride_of(cfg.integrator.snapshot_every, cfg.integrator.dt,
                          "integrator.snapshot_every", v);
        detail::stride_of(cfg.integrator.series_every, cfg.integrator.dt,
                          "integrator.series_every", v);
    }

    // outputs, seed
    const json out = doc.value("outputs", json::object());
    detail::check_keys(out, {"directory", "snapshots", "series"}, "outputs", v);
    cfg.outputs.directory = out.value("directory", "out");
    cfg.outputs.snapshots = out.value("snapshots", true);
    cfg.outputs.series = out.value("series", true);
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer()) v.push_back("seed must be an integer");
        else cfg.seed = doc["seed"].get<unsigned long>();
    }

    if (!v.empty()) {
        std::string msg = "config validation failed:";
        for (const auto& s : v) msg += "\n  - " + s;
        throw ConfigError(msg);
    }

    // resolved echo: every default appears explicitly
    json r;
    json rsc;
    rsc["type"] = to_string(cfg.run_kind);
    if (cfg.run_kind == RunKind::Continuum) {
        rsc["kind"] = to_string(cfg.scenario.kind);
        rsc["dispersion_mode"] = to_string(cfg.scenario.dispersion_mode);
        rsc["nonlinearity_g"] = cfg.scenario.nonlinearity_g;
        rsc["lambda_shift"] = cfg.scenario.lambda_shift;
        rsc["phonon_source_prefactor"] = cfg.scenario.phonon_source_prefactor;
        rsc["initial_sigma"] = cfg.initial_sigma;
    } else if (cfg.run_kind == RunKind::Lattice) {
        rsc["boundary"] = cfg.topology.boundary == Boundary::Periodic ? "periodic" : "open";
        rsc["interaction_cutoff"] = cfg.topology.interaction_cutoff;
        rsc["fft_coupling"] = cfg.topology.fft_coupling;
        rsc["source"] = cfg.topology.source == PhononSource::ForwardDifference ? "forward"
                                                                               : "symmetric";
        rsc["source_prefactor"] = cfg.topology.source_prefactor;
    } else {
        rsc["wave_speed"] = cfg.wave_speed;
        rsc["profile_dispersion"] = to_string(cfg.profile_dispersion);
        rsc["frequency_shift"] = cfg.frequency_shift;
        if (cfg.gamma_override) rsc["gamma"] = *cfg.gamma_override;
        else rsc["gamma"] = "auto";
        rsc["jitter_guess"] = cfg.jitter_guess;
    }
    r["scenario"] = rsc;
    r["params"] = {{"hbar", cfg.params.hbar},
                   {"mass", cfg.params.mass},
                   {"elasticity", cfg.params.elasticity},
                   {"coupling_chi", cfg.params.coupling_chi},
                   {"site_energy", cfg.params.site_energy},
                   {"interaction_J", cfg.params.interaction_J},
                   {"exponent_s", cfg.params.exponent_s}};
    if (cfg.run_kind == RunKind::Lattice) r["grid"] = {{"sites", cfg.sites}};
    else r["grid"] = {{"length", cfg.length}, {"points", cfg.points}};
    json ric;
    switch (cfg.initial.family) {
        case InitialCondition::Family::GaussianPacket:
            ric = {{"family", "gaussian_packet"}, {"x0", cfg.initial.x0},
                   {"width", cfg.initial.width}, {"k0", cfg.initial.k0},
                   {"amplitude", cfg.initial.amplitude}};
            break;
        case InitialCondition::Family::PlaneWave:
            ric = {{"family", "plane_wave"}, {"k0", cfg.initial.k0},
                   {"amplitude", cfg.initial.amplitude}};
            break;
        case InitialCondition::Family::SechSoliton:
            ric = {{"family", "sech_soliton"}, {"eta", cfg.initial.eta}, {"x0", cfg.initial.x0}};
            break;
        case InitialCondition::Family::Zero:
            ric = {{"family", "zero"}};
            break;
    }
    r["initial_condition"] = ric;
    r["integrator"] = {{"dt", cfg.integrator.dt},
                       {"t_end", cfg.integrator.t_end},
                       {"snapshot_every", cfg.integrator.snapshot_every},
                       {"series_every", cfg.integrator.series_every}};
    r["outputs"] = {{"directory", cfg.outputs.directory},
                    {"snapshots", cfg.outputs.snapshots},
                    {"series", cfg.outputs.series}};
    r["seed"] = cfg.seed;
    cfg.resolved = r;
    return cfg;
}

namespace detail {

inline std::filesystem::path resolve_output_dir(const std::string& directory) {
    std::filesystem::path p(directory);
    if (const char* root = std::getenv("EPDYN_OUTPUT_ROOT"); root && p.is_relative())
        p = std::filesystem::path(root) / p;
    return p;
}

template <typename F>
inline std::vector<complexd> sample_initial(const InitialCondition& ic, std::size_t n, F&& coord,
                                            double sech_beta) {
    std::vector<complexd> out(n, complexd{0.0, 0.0});
    for (std::size_t j = 0; j < n; ++j) {
        const double x = coord(j);
        switch (ic.family) {
            case InitialCondition::Family::GaussianPacket: {
                const double d = x - ic.x0;
                out[j] = ic.amplitude * std::exp(-d * d / (2.0 * ic.width * ic.width)) *
                         std::polar(1.0, ic.k0 * x);
                break;
            }
            case InitialCondition::Family::PlaneWave:
                out[j] = ic.amplitude * std::polar(1.0, ic.k0 * x);
                break;
            case InitialCondition::Family::SechSoliton:
                out[j] = ic.eta / std::cosh(sech_beta * (x - ic.x0));
                break;
            case InitialCondition::Family::Zero:
                break;
        }
    }
    return out;
}

inline std::string snapshot_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%06zu.csv", index);
    return buf;
}

}  // namespace detail

struct RunResult {
    int exit_code = 0;
    std::filesystem::path output_dir;
    std::string error;
};

// Execute a parsed configuration and write series.csv / snapshot_NNNNNN.csv /
// manifest.json into the output directory. A failed run keeps partial
// products and a manifest that records the failure.
inline RunResult run(const RunConfig& cfg) {
    const auto dir = detail::resolve_output_dir(cfg.outputs.directory);
    std::filesystem::create_directories(dir);

    json manifest;
    manifest["artifact"] = "epdyn";
    manifest["version"] = version_string;
    manifest["config"] = cfg.resolved;
    manifest["started_at"] = detail::iso_time_now();
    const auto wall0 = std::chrono::steady_clock::now();
    std::vector<std::string> products;

    auto finish = [&](const std::string& status) {
        manifest["status"] = status;
        manifest["finished_at"] = detail::iso_time_now();
        manifest["elapsed_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
        manifest["products"] = products;
        write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    };

    RunResult result;
    result.output_dir = dir;
    try {
        const double dt = cfg.integrator.dt;
        std::vector<std::string> dummy;
        const std::size_t snap_stride =
            detail::stride_of(cfg.integrator.snapshot_every, dt, "snapshot_every", dummy);
        const std::size_t series_stride =
            detail::stride_of(cfg.integrator.series_every, dt, "series_every", dummy);
        const auto nsteps =
            static_cast<std::size_t>(std::ceil(cfg.integrator.t_end / dt - 1e-12));

        if (cfg.run_kind == RunKind::Lattice) {
            LatticeModel model(cfg.sites, cfg.params, cfg.topology);
            LatticeState state = LatticeState::zeros(cfg.sites);
            state.psi = detail::sample_initial(
                cfg.initial, cfg.sites,
                [&](std::size_t j) { return static_cast<double>(j); }, 1.0);

            std::optional<CsvWriter> series;
            if (cfg.outputs.series) {
                series.emplace(dir / "series.csv",
                               std::vector<std::string>{"t", "norm", "energy_total",
                                                        "energy_exciton", "energy_phonon",
                                                        "energy_interaction", "max_density"});
                products.push_back("series.csv");
            }
            std::size_t snap_index = 0;
            auto emit_series = [&](const LatticeState& s) {
                if (!series) return;
                const auto e = energy_breakdown(s, cfg.params, cfg.topology);
                double maxrho = 0.0;
                for (const auto& a : s.psi) maxrho = std::max(maxrho, std::norm(a));
                series->row({s.time, norm(s), e.total(), e.exciton, e.phonon, e.interaction,
                             maxrho});
            };
            auto emit_snapshot = [&](const LatticeState& s) {
                if (!cfg.outputs.snapshots) return;
                const auto name = detail::snapshot_name(snap_index++);
                CsvWriter snap(dir / name,
                               {"n", "re_psi", "im_psi", "xi", "eta"});
                for (std::size_t n = 0; n < s.size(); ++n)
                    snap.row({static_cast<double>(n), s.psi[n].real(), s.psi[n].imag(),
                              s.xi[n], s.eta[n]});
                products.push_back(name);
            };
            emit_series(state);
            emit_snapshot(state);
            for (std::size_t i = 1; i <= nsteps; ++i) {
                try {
                    state = model.step_rk4(state, dt);
                } catch (const BlowupError&) {
                    manifest["failure_step"] = i;
                    throw;
                }
                if (i % series_stride == 0) emit_series(state);
                if (i % snap_stride == 0) emit_snapshot(state);
            }
        } else if (cfg.run_kind == RunKind::Continuum) {
            auto grid = make_grid(cfg.length, cfg.points);
            double beta = 1.0;
            if (cfg.initial.family == InitialCondition::Family::SechSoliton) {
                if (cfg.scenario.kind != ScenarioKind::ClassicalNLS)
                    throw ConfigError("sech_soliton initial condition requires classical_nls");
                const double A = 0.5 * cfg.params.interaction_J *
                                 detail::riemann_zeta(cfg.params.exponent_s - 2.0);
                if (!(A > 0.0 && cfg.scenario.nonlinearity_g > 0.0))
                    throw ConfigError("sech_soliton needs positive dispersion and nonlinearity");
                beta = cfg.initial.eta * std::sqrt(cfg.scenario.nonlinearity_g / (2.0 * A));
            }
            ContinuumStepper stepper(grid, cfg.params, cfg.scenario);
            ContinuumState state(grid);
            state.psi.values = detail::sample_initial(
                cfg.initial, cfg.points, [&](std::size_t j) { return grid->node(j); }, beta);
            if (cfg.initial_sigma == "stationary")
                state.sigma = stationary_sigma(state.psi, cfg.params);

            std::optional<CsvWriter> series;
            if (cfg.outputs.series) {
                series.emplace(dir / "series.csv",
                               std::vector<std::string>{"t", "norm", "hamiltonian", "momentum",
                                                        "max_density"});
                products.push_back("series.csv");
            }
            std::size_t snap_index = 0;
            auto emit_series = [&](const ContinuumState& s) {
                if (!series) return;
                const auto o = stepper.observables(s);
                series->row({s.time, o.norm, o.hamiltonian, o.momentum, o.max_density});
            };
            auto emit_snapshot = [&](const ContinuumState& s) {
                if (!cfg.outputs.snapshots) return;
                const auto name = detail::snapshot_name(snap_index++);
                CsvWriter snap(dir / name, {"x", "re_psi", "im_psi", "sigma", "sigma_rate"});
                for (std::size_t j = 0; j < s.psi.size(); ++j)
                    snap.row({grid->node(j), s.psi[j].real(), s.psi[j].imag(),
                              s.sigma[j].real(), s.sigma_rate[j].real()});
                products.push_back(name);
            };
            emit_series(state);
            emit_snapshot(state);
            for (std::size_t i = 1; i <= nsteps; ++i) {
                try {
                    state = stepper.step(state, dt);
                } catch (const BlowupError&) {
                    manifest["failure_step"] = i;
                    throw;
                }
                if (i % series_stride == 0) emit_series(state);
                if (i % snap_stride == 0) emit_snapshot(state);
            }
        } else {
            auto grid = make_grid(cfg.length, cfg.points);
            TravelingWaveProblem prob =
                cfg.gamma_override
                    ? TravelingWaveProblem(cfg.wave_speed, cfg.params, grid, *cfg.gamma_override,
                                           cfg.profile_dispersion)
                    : TravelingWaveProblem(cfg.wave_speed, cfg.params, grid,
                                           cfg.profile_dispersion);
            double beta = 1.0;
            if (cfg.initial.family == InitialCondition::Family::SechSoliton &&
                cfg.profile_dispersion == ProfileDispersion::Classical) {
                const double A = 0.5 * cfg.params.interaction_J *
                                 detail::riemann_zeta(cfg.params.exponent_s - 2.0);
                if (A > 0.0 && prob.gamma > 0.0)
                    beta = cfg.initial.eta * std::sqrt(prob.gamma / (2.0 * A));
            }
            Field guess(grid, detail::sample_initial(
                                  cfg.initial, cfg.points,
                                  [&](std::size_t j) { return grid->node(j); }, beta));
            if (cfg.jitter_guess) {
                std::mt19937_64 rng(cfg.seed);
                std::uniform_real_distribution<double> u(-1e-3, 1e-3);
                for (auto& z : guess.values) z += complexd{u(rng), u(rng)};
            }
            SolveReport rep;
            Field profile = solve_profile(prob, guess, cfg.frequency_shift, {}, &rep);
            Field sigma = sigma_profile(profile, cfg.wave_speed, cfg.params);
            CsvWriter out(dir / "profile.csv", {"zeta", "re_phi", "im_phi", "sigma"});
            for (std::size_t j = 0; j < profile.size(); ++j)
                out.row({grid->node(j), profile[j].real(), profile[j].imag(),
                         sigma[j].real()});
            products.push_back("profile.csv");
            manifest["profile"] = {{"wave_speed", cfg.wave_speed},
                                   {"gamma", prob.gamma},
                                   {"exponent_s", cfg.params.exponent_s},
                                   {"frequency_shift", cfg.frequency_shift},
                                   {"residual", rep.residual},
                                   {"iterations", rep.iterations},
                                   {"used_newton", rep.used_newton},
                                   {"boundary_warning", rep.boundary_warning}};
        }
        finish("success");
    } catch (const BlowupError& e) {
        manifest["error"] = e.what();
        finish("failed");
        result.exit_code = 3;
        result.error = e.what();
    } catch (const ConvergenceError& e) {
        manifest["error"] = e.what();
        finish("failed");
        result.exit_code = 3;
        result.error = e.what();
    } catch (const std::exception& e) {
        manifest["error"] = e.what();
        finish("failed");
        result.exit_code = 2;
        result.error = e.what();
    }
    return result;
}

// (k, G(k), asymptote) table for the dispersion subcommand.
inline void write_dispersion_table(const ModelParams& p, double kmin, double kmax, std::size_t n,
                                   const std::filesystem::path& path) {
    if (!(kmax > kmin) || !(kmin > 0.0) || n < 1)
        throw ConfigError("dispersion table requires 0 < kmin < kmax and n >= 1");
    CsvWriter out(path, {"k", "gap", "asymptote"});
    for (std::size_t i = 0; i < n; ++i) {
        const double k =
            n == 1 ? kmax
                   : kmin * std::pow(kmax / kmin,
                                     static_cast<double>(i) / static_cast<double>(n - 1));
        out.row({k, spectral_gap(k, p), asymptotic_gap(k, p)});
    }
}

struct CompareResult {
    double final_distance = 0.0;
    std::filesystem::path csv_path;
};

// Evolve the same packet on the chain and in the general nonlocal continuum
// (exact gap, matched source prefactor, dx = 1) and report the running
// relative L2 distance. The chain's time-dependent global phase
// exp(-i Int lambda dt / hbar) is unwound before comparing.
inline CompareResult compare_lattice_continuum(const RunConfig& cfg,
                                               const std::filesystem::path& out_csv) {
    if (cfg.run_kind != RunKind::Lattice)
        throw ConfigError("compare requires a lattice config as the reference");
    const std::size_t L = cfg.sites;
    LatticeTopology topo = cfg.topology;
    LatticeModel model(L, cfg.params, topo);
    LatticeState lat = LatticeState::zeros(L);
    lat.psi = detail::sample_initial(
        cfg.initial, L, [&](std::size_t j) { return static_cast<double>(j); }, 1.0);

    auto grid = make_grid(static_cast<double>(L), L);  // dx = 1
    ScenarioSpec spec;
    spec.kind = ScenarioKind::GeneralNonlocal;
    spec.dispersion_mode = DispersionMode::ExactGap;
    spec.lambda_shift = 0.0;
    spec.phonon_source_prefactor = topo.source_prefactor;
    ContinuumStepper stepper(grid, cfg.params, spec);
    ContinuumState cont(grid);
    // same samples; grid node j sits at x = j - L/2
    for (std::size_t j = 0; j < L; ++j) cont.psi[j] = lat.psi[j];

    const double dt = cfg.integrator.dt;
    const auto nsteps = static_cast<std::size_t>(std::ceil(cfg.integrator.t_end / dt - 1e-12));
    std::vector<std::string> dummy;
    const std::size_t series_stride =
        detail::stride_of(cfg.integrator.series_every, dt, "series_every", dummy);

    const double J0 = 2.0 * cfg.params.interaction_J * detail::riemann_zeta(cfg.params.exponent_s);
    double theta = 0.0;  // accumulated lattice gauge phase / hbar
    double lambda_prev = lambda_term(lat, cfg.params, topo.boundary) - J0;

    CsvWriter out(out_csv, {"t", "l2_distance", "norm_lattice", "norm_continuum"});
    CompareResult result;
    result.csv_path = out_csv;
    auto emit = [&]() {
        double d2 = 0.0, n2 = 0.0, nc = 0.0;
        const complexd gauge = std::polar(1.0, theta);
        for (std::size_t j = 0; j < L; ++j) {
            d2 += std::norm(cont.psi[j] - gauge * lat.psi[j]);
            n2 += std::norm(lat.psi[j]);
            nc += std::norm(cont.psi[j]);
        }
        result.final_distance = std::sqrt(d2 / n2);
        out.row({lat.time, result.final_distance, n2, nc});
    };
    emit();
    for (std::size_t i = 1; i <= nsteps; ++i) {
        lat = model.step_rk4(lat, dt);
        cont = stepper.step(cont, dt);
        const double lambda_now = lambda_term(lat, cfg.params, topo.boundary) - J0;
        theta += 0.5 * dt * (lambda_prev + lambda_now) / cfg.params.hbar;
        lambda_prev = lambda_now;
        if (i % series_stride == 0 || i == nsteps) emit();
    }
    return result;
}

struct ValidationReport {
    std::vector<std::string> checks;   // "ok: ..." lines
    std::vector<std::string> failures;
    bool passed() const { return failures.empty(); }
};

// Cheap invariant suite on a config: reparse checks plus a short evolution
// probing norm conservation and finiteness.
inline ValidationReport validate_config(const RunConfig& cfg) {
    ValidationReport rep;
    rep.checks.push_back("ok: configuration parsed, all defaults resolved");
    try {
        classify_regime(cfg.params.exponent_s);
        rep.checks.push_back(std::string("ok: exponent s classifies as ") +
                             to_string(classify_regime(cfg.params.exponent_s)));
    } catch (const std::exception& e) {
        if (cfg.run_kind != RunKind::Lattice) rep.failures.push_back(e.what());
        else rep.checks.push_back("ok: s outside the continuum regimes (lattice run)");
    }

    try {
        if (cfg.run_kind == RunKind::Lattice) {
            LatticeModel model(cfg.sites, cfg.params, cfg.topology);
            LatticeState state = LatticeState::zeros(cfg.sites);
            state.psi = detail::sample_initial(
                cfg.initial, cfg.sites, [&](std::size_t j) { return static_cast<double>(j); },
                1.0);
            const double n0 = norm(state);
            const double dt = std::min(cfg.integrator.dt, model.stability_dt(state));
            for (int i = 0; i < 20; ++i) state = model.step_rk4(state, dt);
            const double drift = n0 > 0.0 ? std::abs(norm(state) - n0) / n0 : 0.0;
            if (drift < 1e-8)
                rep.checks.push_back("ok: norm conserved over 20 probe steps (drift " +
                                     format_value(drift) + ")");
            else
                rep.failures.push_back("norm drift " + format_value(drift) +
                                       " over 20 probe steps exceeds 1e-8");
        } else if (cfg.run_kind == RunKind::Continuum) {
            auto grid = make_grid(cfg.length, cfg.points);
            ContinuumStepper stepper(grid, cfg.params, cfg.scenario);
            ContinuumState state(grid);
            state.psi.values = detail::sample_initial(
                cfg.initial, cfg.points, [&](std::size_t j) { return grid->node(j); }, 1.0);
            const double n0 = stepper.observables(state).norm;
            for (int i = 0; i < 20; ++i) state = stepper.step(state, cfg.integrator.dt);
            const double n1 = stepper.observables(state).norm;
            const double drift = n0 > 0.0 ? std::abs(n1 - n0) / n0 : std::abs(n1);
            if (drift < 1e-12)
                rep.checks.push_back("ok: split-step norm exact over 20 probe steps (drift " +
                                     format_value(drift) + ")");
            else
                rep.failures.push_back("norm drift " + format_value(drift) +
                                       " over 20 probe steps exceeds 1e-12");
            double max_imag = 0.0;
            for (std::size_t j = 0; j < cfg.points; ++j)
                max_imag = std::max(max_imag, std::abs(state.sigma[j].imag()));
            if (max_imag < 1e-10)
                rep.checks.push_back("ok: strain stays real (max imag " +
                                     format_value(max_imag) + ")");
            else
                rep.failures.push_back("strain imaginary part " + format_value(max_imag) +
                                       " exceeds 1e-10");
        } else {
            auto grid = make_grid(cfg.length, cfg.points);
            TravelingWaveProblem prob(cfg.wave_speed, cfg.params, grid, cfg.profile_dispersion);
            rep.checks.push_back("ok: traveling-wave problem constructed, gamma = " +
                                 format_value(prob.gamma));
        }
    } catch (const std::exception& e) {
        rep.failures.push_back(e.what());
    }
    return rep;
}

}  // namespace epdyn
