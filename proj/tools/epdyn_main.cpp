// Command-line driver: run / dispersion / sweep / compare / validate.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epdyn/runner.hpp"

namespace {

int cmd_run(const std::string& config_path) {
    try {
        const auto cfg = epdyn::parse_config(epdyn::read_text_file(config_path));
        const auto result = epdyn::run(cfg);
        if (result.exit_code != 0)
            std::fprintf(stderr, "run failed: %s\n", result.error.c_str());
        else
            std::printf("wrote %s\n", result.output_dir.string().c_str());
        return result.exit_code;
    } catch (const epdyn::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
}

int cmd_dispersion(double s, double J, double kmin, double kmax, std::size_t n,
                   const std::string& output) {
    try {
        epdyn::ModelParams p;
        p.exponent_s = s;
        p.interaction_J = J;
        const auto path = epdyn::detail::resolve_output_dir(output);
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        epdyn::write_dispersion_table(p, kmin, kmax, n, path);
        std::printf("wrote %s\n", path.string().c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
}

int cmd_sweep(const std::string& config_path, const std::string& key,
              const std::vector<double>& values, const std::string& outdir) {
    try {
        auto doc = epdyn::json::parse(epdyn::read_text_file(config_path));
        const auto root = epdyn::detail::resolve_output_dir(outdir);
        std::filesystem::create_directories(root);
        epdyn::json index = epdyn::json::array();
        int status = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            epdyn::json point = doc;
            point[epdyn::json::json_pointer(key)] = values[i];
            char name[32];
            std::snprintf(name, sizeof name, "point_%04zu", i);
            point["outputs"]["directory"] = (root / name).string();
            auto cfg = epdyn::parse_config_json(point);
            const auto result = epdyn::run(cfg);
            index.push_back({{"directory", name},
                             {"key", key},
                             {"value", values[i]},
                             {"exit_code", result.exit_code}});
            if (result.exit_code != 0) status = result.exit_code;
        }
        epdyn::write_text_file(root / "index.json", index.dump(2) + "\n");
        std::printf("wrote %s\n", (root / "index.json").string().c_str());
        return status;
    } catch (const epdyn::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
}

int cmd_compare(const std::string& config_path, const std::string& output) {
    try {
        const auto cfg = epdyn::parse_config(epdyn::read_text_file(config_path));
        const auto path = epdyn::detail::resolve_output_dir(output);
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        const auto result = epdyn::compare_lattice_continuum(cfg, path);
        std::printf("wrote %s (final relative L2 distance %.6g)\n",
                    result.csv_path.string().c_str(), result.final_distance);
        return 0;
    } catch (const epdyn::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const epdyn::BlowupError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
}

int cmd_validate(const std::string& config_path) {
    try {
        const auto cfg = epdyn::parse_config(epdyn::read_text_file(config_path));
        const auto rep = epdyn::validate_config(cfg);
        for (const auto& line : rep.checks) std::printf("%s\n", line.c_str());
        for (const auto& line : rep.failures) std::printf("violation: %s\n", line.c_str());
        return rep.passed() ? 0 : 2;
    } catch (const epdyn::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exciton-phonon chain and continuum envelope simulator"};
    app.require_subcommand(1);

    std::string config_path, output, key;
    std::vector<double> values;
    double s = 2.5, J = 1.0, kmin = 1e-3, kmax = 0.1;
    std::size_t npts = 64;

    auto* run_cmd = app.add_subcommand("run", "execute a JSON run configuration");
    run_cmd->add_option("config", config_path, "path to config.json")->required();

    auto* disp = app.add_subcommand("dispersion", "tabulate G(k) against its asymptote");
    disp->add_option("--s", s, "power-law exponent");
    disp->add_option("--J", J, "transfer constant");
    disp->add_option("--kmin", kmin, "smallest wavenumber");
    disp->add_option("--kmax", kmax, "largest wavenumber");
    disp->add_option("--n", npts, "number of rows");
    disp->add_option("--output", output, "output CSV path")->default_val("dispersion.csv");

    auto* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep of runs");
    sweep->add_option("config", config_path, "base config.json")->required();
    sweep->add_option("--key", key, "JSON pointer of the swept entry, e.g. /scenario/wave_speed")
        ->required();
    sweep->add_option("--values", values, "values to sweep")->required()->delimiter(',');
    sweep->add_option("--output", output, "sweep output root")->default_val("sweep_out");

    auto* cmp = app.add_subcommand("compare", "lattice vs continuum distance report");
    cmp->add_option("config", config_path, "lattice config.json")->required();
    cmp->add_option("--output", output, "output CSV path")->default_val("compare.csv");

    auto* val = app.add_subcommand("validate", "run the invariant suite on a config");
    val->add_option("config", config_path, "path to config.json")->required();

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) return cmd_run(config_path);
    if (disp->parsed()) return cmd_dispersion(s, J, kmin, kmax, npts, output);
    if (sweep->parsed()) return cmd_sweep(config_path, key, values, output);
    if (cmp->parsed()) return cmd_compare(config_path, output);
    if (val->parsed()) return cmd_validate(config_path);
    return 1;
}
