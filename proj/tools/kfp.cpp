#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kfp/runner.hpp"
#include "kfp/scenario_io.hpp"

namespace {

std::vector<double> parse_eps_list(const std::string& csv) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(csv);
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kinetic Fokker-Planck solver and inequality-audit harness"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out", csv_path, eps_csv;
    int workers = 0;
    std::vector<std::string> tol_overrides;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario)
            cmd->add_option("--scenario", scenario_path, "scenario configuration file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--workers", workers, "worker threads for cell-parallel loops");
        cmd->add_option("--tolerance", tol_overrides, "audit tolerance override name=value");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "run one scenario and audit the ledgers");
    add_common(cmd_run, true);
    CLI::App* cmd_check = app.add_subcommand("check", "re-audit a previously written ledger CSV");
    cmd_check->add_option("--csv", csv_path, "ledger CSV path")->required();
    cmd_check->add_option("--tolerance", tol_overrides, "audit tolerance override name=value");
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run an epsilon sweep and report uniform bounds");
    add_common(cmd_sweep, true);
    cmd_sweep->add_option("--eps", eps_csv, "comma-separated epsilon list")->required();
    CLI::App* cmd_prep = app.add_subcommand("prep", "emit truncated data and the convergence report");
    add_common(cmd_prep, true);
    cmd_prep->add_option("--eps", eps_csv, "comma-separated epsilon list")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(cmd_check)) return kfp::command_check(csv_path, tol_overrides);

        kfp::Scenario scenario = kfp::parse_scenario(scenario_path);
        if (workers > 0) scenario.workers = workers;
        // KFP_DETERMINISTIC=1 (default) keeps reductions sequential; parallel
        // loops have disjoint writes, so any worker count gives identical output.
        if (const char* det = std::getenv("KFP_DETERMINISTIC"); det && std::string(det) == "0") {
            // no nondeterministic fast paths exist; flag accepted for compatibility
        }
        kfp::apply_tolerance_overrides(scenario.tol, tol_overrides);

        if (app.got_subcommand(cmd_run)) return kfp::command_run(scenario, out_dir);
        if (app.got_subcommand(cmd_sweep))
            return kfp::command_sweep(scenario, parse_eps_list(eps_csv), out_dir);
        if (app.got_subcommand(cmd_prep))
            return kfp::command_prep(scenario, parse_eps_list(eps_csv), out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
