// nfs_cli - run scenarios and parameter sweeps from the command line
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nfs/config_io.hpp"
#include "nfs/experiments.hpp"

namespace {

// A preset (if any) is the base that the config file overrides; "-" means no file.
nfs::ScenarioConfig load(const std::string& path, const std::string& preset_name) {
    nfs::ScenarioConfig base = preset_name.empty() ? nfs::ScenarioConfig{} : nfs::preset(preset_name);
    auto cfg = path == "-" ? base : nfs::load_config(path, base);
    cfg.validate();
    return cfg;
}

int run_main(int argc, char** argv) {
    CLI::App app{"Magnetically switched nuclear forward scattering simulator"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir = "out", param, values;

    auto* run = app.add_subcommand("run", "Simulate one scenario and write field, spectrum and peak files");
    run->add_option("config", config_path, "Scenario file ('-' for preset only)")->required();
    run->add_option("--preset", preset_name, "Named preset used as the base configuration");
    run->add_option("--out", out_dir, "Output directory");

    auto* sweep = app.add_subcommand("sweep", "Sweep tau_d, delta or the switch count");
    sweep->add_option("config", config_path, "Scenario file ('-' for preset only)")->required();
    sweep->add_option("--preset", preset_name, "Named preset used as the base configuration");
    sweep->add_option("--param", param, "tau_d | delta | nswitch")->required();
    sweep->add_option("--values", values, "List a,b,c or range start:stop:step")->required();
    sweep->add_option("--out", out_dir, "Output directory");

    auto* nodes = app.add_subcommand("nodes", "Print temporal nodes of the unperturbed exit field");
    nodes->add_option("config", config_path, "Scenario file ('-' for preset only)")->required();
    nodes->add_option("--preset", preset_name, "Named preset used as the base configuration");

    auto* validate = app.add_subcommand("validate", "Check a scenario file and print its canonical form");
    validate->add_option("config", config_path, "Scenario file ('-' for preset only)")->required();
    validate->add_option("--preset", preset_name, "Named preset used as the base configuration");

    auto* presets = app.add_subcommand("presets", "List the built-in presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (presets->parsed()) {
        for (const auto& [name, text] : nfs::preset_texts()) std::cout << name << "\n";
        return 0;
    }
    const auto cfg = load(config_path, preset_name);

    if (validate->parsed()) {
        std::cout << nfs::serialize_config(cfg) << "# config_hash=" << nfs::config_hash(cfg) << "\n";
        return 0;
    }
    if (nodes->parsed()) {
        for (double t : nfs::unperturbed_nodes(cfg, cfg.grid.t_end)) std::printf("%.6f\n", t);
        return 0;
    }
    if (run->parsed()) {
        const auto m = nfs::run_scenario(cfg, out_dir);
        std::cout << m.to_json().dump(2) << "\n";
        return 0;
    }
    nfs::SweepSpec spec{nfs::parse_sweep_parameter(param), nfs::parse_sweep_values(values), cfg};
    switch (spec.parameter) {
        case nfs::SweepParameter::tau_d: {
            const auto r = nfs::sweep_tau_d(spec, std::filesystem::path(out_dir));
            for (const auto& d : r.diagnostics) std::cerr << d << "\n";
            break;
        }
        case nfs::SweepParameter::delta_over_gamma:
            for (const auto& row : nfs::sweep_delta(spec, std::filesystem::path(out_dir)))
                std::printf("%g\t%.4f\t%.4f\tt1=%.4f\n", row.delta_over_gamma, row.max_s, row.fwhm, row.t1);
            break;
        case nfs::SweepParameter::n_switches:
            for (const auto& row : nfs::sweep_switch_count(spec, std::filesystem::path(out_dir))) {
                if (row.error.empty()) std::printf("%d\t%.4f\n", row.n_switches, row.s0);
                else std::printf("%d\terror: %s\n", row.n_switches, row.error.c_str());
            }
            break;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const nfs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nfs::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const nfs::AnalysisError& e) {
        std::cerr << "analysis error: " << e.what() << "\n";
        return 3;
    } catch (const nfs::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
