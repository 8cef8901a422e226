#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "epdyn/runner.hpp"

using namespace epdyn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("epdyn_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string cli_path() {
    const char* p = std::getenv("EPDYN_CLI_PATH");
    return p ? p : "";
}

int run_cli(const std::string& args) {
    const int rc = std::system((cli_path() + " " + args + " > /dev/null 2>&1").c_str());
    return (rc >> 8) & 0xff;
}

json minimal_continuum(const fs::path& dir) {
    json doc;
    doc["scenario"] = {{"type", "continuum"}, {"kind", "nlfse"}};
    doc["grid"] = {{"length", 32.0}, {"points", 64}};
    doc["initial_condition"] = {{"family", "gaussian_packet"}, {"width", 3.0}};
    doc["integrator"] = {{"dt", 0.05}, {"t_end", 0.5}};
    doc["outputs"] = {{"directory", dir.string()}};
    return doc;
}

}  // namespace

TEST_CASE("config parsing fills every default into the resolved echo") {
    const auto cfg = parse_config("{}");
    CHECK(cfg.run_kind == RunKind::Continuum);
    CHECK(cfg.scenario.kind == ScenarioKind::NLFSE);
    CHECK(cfg.params.exponent_s == 2.5);
    CHECK(cfg.integrator.snapshot_every == cfg.integrator.t_end);
    CHECK(cfg.integrator.series_every == cfg.integrator.dt);
    const auto& r = cfg.resolved;
    for (const char* key : {"scenario", "params", "grid", "initial_condition", "integrator",
                            "outputs", "seed"})
        CHECK(r.contains(key));
    CHECK(r["params"]["hbar"] == 1.0);
    CHECK(r["scenario"]["phonon_source_prefactor"] == 2.0);
    CHECK(r["outputs"]["directory"] == "out");
}

TEST_CASE("config rejection reports every violation at once") {
    json doc;
    doc["scenario"] = {{"type", "continuum"}, {"kind", "nlfse"}};
    doc["params"] = {{"exponent_s", 3.5}, {"bogus_knob", 1.0}};
    doc["grid"] = {{"length", -4.0}, {"points", 7}};
    doc["integrator"] = {{"dt", 0.01}, {"t_end", 1.0}, {"series_every", 0.015}};
    try {
        parse_config(doc.dump());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("config validation failed") != std::string::npos);
        CHECK(msg.find("bogus_knob") != std::string::npos);
        CHECK(msg.find("2 < s < 3") != std::string::npos);
        CHECK(msg.find("grid.length") != std::string::npos);
        CHECK(msg.find("grid.points") != std::string::npos);
        CHECK(msg.find("series_every") != std::string::npos);
    }
}

TEST_CASE("the s = 3 rejection names the singular coefficient") {
    json doc;
    doc["scenario"] = {{"type", "continuum"}, {"kind", "nlfse"}};
    doc["params"] = {{"exponent_s", 3.0}};
    try {
        parse_config(doc.dump());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("singular at s = 3") != std::string::npos);
    }
}

TEST_CASE("sonic traveling-wave speed is rejected at parse time") {
    json doc;
    doc["scenario"] = {{"type", "traveling_wave"}, {"wave_speed", 1.0}};
    CHECK_THROWS_AS(parse_config(doc.dump()), ConfigError);
}

TEST_CASE("auto nonlinearity resolves to 2 chi^2 / w") {
    json doc;
    doc["scenario"] = {{"type", "continuum"}, {"kind", "nlfse"}, {"nonlinearity_g", "auto"}};
    doc["params"] = {{"coupling_chi", 3.0}, {"elasticity", 2.0}};
    const auto cfg = parse_config(doc.dump());
    CHECK(cfg.scenario.nonlinearity_g == 9.0);
}

TEST_CASE("run writes series, snapshots, and a success manifest") {
    const auto dir = fresh_dir("run_basic");
    auto doc = minimal_continuum(dir);
    doc["integrator"]["snapshot_every"] = 0.25;
    const auto result = run(parse_config(doc.dump()));
    REQUIRE(result.exit_code == 0);
    CHECK(fs::exists(dir / "series.csv"));
    CHECK(fs::exists(dir / "snapshot_000000.csv"));
    CHECK(fs::exists(dir / "snapshot_000002.csv"));
    const auto manifest = json::parse(read_text_file(dir / "manifest.json"));
    CHECK(manifest["status"] == "success");
    CHECK(manifest["artifact"] == "epdyn");
    CHECK(manifest["config"]["params"]["exponent_s"] == 2.5);
    const auto series = read_text_file(dir / "series.csv");
    CHECK(series.rfind("t,norm,hamiltonian,momentum,max_density\n", 0) == 0);
}

TEST_CASE("repeated runs are byte identical") {
    const auto dir1 = fresh_dir("det_a");
    const auto dir2 = fresh_dir("det_b");
    auto doc = minimal_continuum(dir1);
    doc["scenario"]["kind"] = "fractional_zakharov";
    doc["scenario"]["initial_sigma"] = "stationary";
    doc["params"] = {{"coupling_chi", 0.5}};
    REQUIRE(run(parse_config(doc.dump())).exit_code == 0);
    doc["outputs"]["directory"] = dir2.string();
    REQUIRE(run(parse_config(doc.dump())).exit_code == 0);
    CHECK(read_text_file(dir1 / "series.csv") == read_text_file(dir2 / "series.csv"));
    CHECK(read_text_file(dir1 / "snapshot_000001.csv") ==
          read_text_file(dir2 / "snapshot_000001.csv"));
}

TEST_CASE("a diverging lattice run exits 3 and records the failure") {
    const auto dir = fresh_dir("blowup");
    json doc;
    doc["scenario"] = {{"type", "lattice"}};
    doc["params"] = {{"exponent_s", 2.5}, {"coupling_chi", 0.5}};
    doc["grid"] = {{"sites", 32}};
    doc["initial_condition"] = {{"family", "gaussian_packet"}, {"x0", 16.0}, {"width", 3.0}};
    doc["integrator"] = {{"dt", 50.0}, {"t_end", 5000.0}};
    doc["outputs"] = {{"directory", dir.string()}};
    const auto result = run(parse_config(doc.dump()));
    CHECK(result.exit_code == 3);
    const auto manifest = json::parse(read_text_file(dir / "manifest.json"));
    CHECK(manifest["status"] == "failed");
    CHECK(manifest.contains("failure_step"));
    CHECK(manifest.contains("error"));
}

TEST_CASE("traveling-wave run records the profile report in the manifest") {
    const auto dir = fresh_dir("tw_run");
    json doc;
    doc["scenario"] = {{"type", "traveling_wave"}, {"wave_speed", 0.3},
                       {"gamma", 0.8}, {"frequency_shift", -0.5}};
    doc["params"] = {{"coupling_chi", 0.5}};
    doc["grid"] = {{"length", 100.0}, {"points", 256}};
    doc["initial_condition"] = {{"family", "plane_wave"},
                                {"k0", 2.0 * std::numbers::pi * 6.0 / 100.0},
                                {"amplitude", 0.8}};
    doc["outputs"] = {{"directory", dir.string()}};
    const auto result = run(parse_config(doc.dump()));
    REQUIRE(result.exit_code == 0);
    CHECK(fs::exists(dir / "profile.csv"));
    const auto manifest = json::parse(read_text_file(dir / "manifest.json"));
    CHECK(manifest["profile"]["residual"].get<double>() < 1e-10);
    CHECK(manifest["profile"]["gamma"] == 0.8);
}

TEST_CASE("compare produces a distance table for a matched pair") {
    const auto dir = fresh_dir("compare");
    json doc;
    doc["scenario"] = {{"type", "lattice"}, {"fft_coupling", true}};
    doc["params"] = {{"exponent_s", 2.5}};
    doc["grid"] = {{"sites", 128}};
    doc["initial_condition"] = {{"family", "gaussian_packet"}, {"x0", 64.0}, {"width", 10.0}};
    doc["integrator"] = {{"dt", 0.02}, {"t_end", 0.4}, {"series_every", 0.1}};
    doc["outputs"] = {{"directory", dir.string()}};
    const auto res = compare_lattice_continuum(parse_config(doc.dump()), dir / "compare.csv");
    CHECK(fs::exists(dir / "compare.csv"));
    // a wide chi = 0 packet should track its continuum twin closely
    CHECK(res.final_distance < 0.01);
    const auto text = read_text_file(dir / "compare.csv");
    CHECK(text.rfind("t,l2_distance,norm_lattice,norm_continuum\n", 0) == 0);
    json bad;
    bad["scenario"] = {{"type", "continuum"}};
    CHECK_THROWS_AS(
        compare_lattice_continuum(parse_config(bad.dump()), dir / "x.csv"), ConfigError);
}

TEST_CASE("validate passes a healthy config and flags a regime hole") {
    auto doc = minimal_continuum(fresh_dir("validate"));
    const auto rep = validate_config(parse_config(doc.dump()));
    CHECK(rep.passed());
    CHECK(rep.checks.size() >= 2);

    json lat;
    lat["scenario"] = {{"type", "lattice"}};
    lat["params"] = {{"exponent_s", 1.5}};  // summable but outside every continuum regime
    lat["grid"] = {{"sites", 32}};
    const auto rep2 = validate_config(parse_config(lat.dump()));
    CHECK(rep2.passed());
}

TEST_CASE("dispersion table layout") {
    const auto dir = fresh_dir("disp");
    ModelParams p;
    p.exponent_s = 2.5;
    write_dispersion_table(p, 1e-3, 0.1, 64, dir / "dispersion.csv");
    const auto text = read_text_file(dir / "dispersion.csv");
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    CHECK(lines == 65);  // header + 64 rows
    CHECK(text.rfind("k,gap,asymptote\n", 0) == 0);
    CHECK_THROWS_AS(write_dispersion_table(p, 0.1, 0.01, 8, dir / "bad.csv"), ConfigError);
}

TEST_CASE("cli end to end") {
    if (cli_path().empty()) {
        SUCCEED("EPDYN_CLI_PATH not set; CLI smoke tests skipped");
        return;
    }
    const auto dir = fresh_dir("cli");
    const auto cfg_path = dir / "config.json";
    auto doc = minimal_continuum(dir / "run_out");
    write_text_file(cfg_path, doc.dump(2));

    CHECK(run_cli("run " + cfg_path.string()) == 0);
    CHECK(fs::exists(dir / "run_out" / "series.csv"));

    CHECK(run_cli("dispersion --s 2.5 --kmax 0.1 --n 64 --output " +
                  (dir / "disp.csv").string()) == 0);
    const auto disp = read_text_file(dir / "disp.csv");
    std::size_t lines = 0;
    for (char c : disp)
        if (c == '\n') ++lines;
    CHECK(lines == 65);

    CHECK(run_cli("validate " + cfg_path.string()) == 0);

    CHECK(run_cli("sweep " + cfg_path.string() +
                  " --key /params/coupling_chi --values 0.0,0.5 --output " +
                  (dir / "sweep_out").string()) == 0);
    CHECK(fs::exists(dir / "sweep_out" / "index.json"));
    CHECK(fs::exists(dir / "sweep_out" / "point_0000" / "series.csv"));
    CHECK(fs::exists(dir / "sweep_out" / "point_0001" / "series.csv"));
    const auto index = json::parse(read_text_file(dir / "sweep_out" / "index.json"));
    REQUIRE(index.size() == 2);
    CHECK(index[1]["value"] == 0.5);
    CHECK(index[1]["exit_code"] == 0);

    json lat;
    lat["scenario"] = {{"type", "lattice"}, {"fft_coupling", true}};
    lat["grid"] = {{"sites", 64}};
    lat["initial_condition"] = {{"family", "gaussian_packet"}, {"x0", 32.0}, {"width", 6.0}};
    lat["integrator"] = {{"dt", 0.02}, {"t_end", 0.2}};
    lat["outputs"] = {{"directory", (dir / "lat_out").string()}};
    const auto lat_path = dir / "lattice.json";
    write_text_file(lat_path, lat.dump(2));
    CHECK(run_cli("compare " + lat_path.string() + " --output " +
                  (dir / "compare.csv").string()) == 0);
    CHECK(fs::exists(dir / "compare.csv"));

    // malformed config exits 2
    write_text_file(dir / "broken.json", "{\"scenario\": {\"type\": \"nope\"}}");
    CHECK(run_cli("run " + (dir / "broken.json").string()) == 2);
}

TEST_CASE("relative output directories honor the output root override") {
    const auto root = fresh_dir("root_override");
    setenv("EPDYN_OUTPUT_ROOT", root.string().c_str(), 1);
    json doc = minimal_continuum("nested/out");
    doc["outputs"]["directory"] = "nested/out";
    const auto result = run(parse_config(doc.dump()));
    unsetenv("EPDYN_OUTPUT_ROOT");
    REQUIRE(result.exit_code == 0);
    CHECK(fs::exists(root / "nested" / "out" / "series.csv"));
}
