// Command-line entry point for the damped quantum Brownian motion solver.
//
// Exit codes: 0 success, 2 validation failure, 3 numerical abort.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "dqbm/harness.hpp"
#include "dqbm/version.hpp"

namespace {

int cmd_list() {
    std::printf("%-22s %-9s %-22s %8s %6s %8s  %s\n", "scenario", "sweep", "values", "t_end",
                "n", "L", "summary");
    for (const auto& sc : dqbm::scenario_catalog()) {
        std::string values;
        for (std::size_t k = 0; k < sc.sweep_values.size(); ++k) {
            char buf[24];
            std::snprintf(buf, sizeof buf, "%g", sc.sweep_values[k]);
            values += (k ? "," : "") + std::string(buf);
        }
        std::printf("%-22s %-9s %-22s %7gfs %6d %7gA  %s\n", sc.name.c_str(),
                    sc.sweep_key.c_str(), values.c_str(), sc.t_end, sc.n_points, sc.half_width,
                    sc.summary.c_str());
    }
    return 0;
}

int cmd_validate() {
    const auto checks = dqbm::run_validation_suite();
    bool all_ok = true;
    for (const auto& c : checks) {
        std::printf("[%s] %-28s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
        all_ok = all_ok && c.passed;
    }
    return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Damped quantum Brownian motion: density-matrix evolution scenarios"};
    app.set_version_flag("--version", dqbm::version_string());
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a catalog scenario and write CSV + manifest");
    std::string scenario;
    std::string config_file;
    std::vector<std::string> sets;
    std::string out_dir = "runs";
    int grid_points = 0;
    double half_width = 0.0;
    int workers = 1;
    run->add_option("scenario", scenario, "Scenario name (see `dampedqbm list`)")->required();
    run->add_option("--config", config_file, "key=value file, '#' comments");
    run->add_option("--set", sets, "Override one key=value (repeatable; wins over --config)");
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--grid-points", grid_points, "Grid points per axis (odd)");
    run->add_option("--half-width", half_width, "Grid half-width L in Angstrom");
    run->add_option("--workers", workers, "Concurrent evolutions")->check(CLI::PositiveNumber);

    auto* list = app.add_subcommand("list", "Print the scenario catalog with defaults");
    auto* validate = app.add_subcommand("validate",
                                        "Run the invariant suite at reduced resolution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list->parsed()) return cmd_list();
        if (validate->parsed()) return cmd_validate();

        dqbm::ConfigOverrides overrides;
        if (!config_file.empty()) overrides = dqbm::parse_config(config_file);
        for (const auto& item : sets) dqbm::apply_override(overrides, item);
        if (grid_points > 0) {
            dqbm::apply_override(overrides, "grid_points=" + std::to_string(grid_points));
        }
        if (half_width > 0.0) {
            dqbm::apply_override(overrides, "half_width=" + std::to_string(half_width));
        }

        dqbm::RunOptions options;
        options.out_dir = out_dir;
        options.workers = workers;
        const auto result = dqbm::run_scenario(scenario, overrides, options);
        std::cout << "wrote " << result.csv_path.string() << " ("
                  << (result.series.empty() ? 0 : result.series.front().size())
                  << " rows, " << result.series.size() << " series)\n";
        return 0;
    } catch (const dqbm::NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
