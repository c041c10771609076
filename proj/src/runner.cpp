#include "kfp/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "kfp/output_io.hpp"
#include "kfp/scenario_io.hpp"
#include "kfp/util.hpp"

namespace kfp {

namespace {

constexpr const char* kToolVersion = "1.0.0";

using nlohmann::json;

json verdicts_json(const std::vector<VerdictEntry>& verdicts) {
    json arr = json::array();
    for (const VerdictEntry& v : verdicts)
        arr.push_back({{"name", v.name},
                       {"pass", v.pass},
                       {"value", v.value},
                       {"tolerance", v.tolerance},
                       {"detail", v.detail}});
    return arr;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream os(path);
    check_runtime(static_cast<bool>(os), "manifest: cannot open " + path + " for writing");
    os << j.dump(2) << "\n";
}

std::string bc_kind_name(const BoundaryCondition& bc) {
    return bc.kind == BoundaryCondition::Kind::inflow ? "inflow" : "reflection";
}

}  // namespace

void apply_tolerance_overrides(AuditTolerances& tol,
                               const std::vector<std::string>& overrides) {
    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        require(eq != std::string::npos, "tolerance override must be name=value: " + item);
        const std::string name = item.substr(0, eq);
        const double value = std::stod(item.substr(eq + 1));
        if (name == "mass_tol")
            tol.mass_rel = value;
        else if (name == "energy_tol")
            tol.energy_rel = value;
        else if (name == "entropy_tol_rel")
            tol.entropy_rel = value;
        else if (name == "entropy_tol_abs")
            tol.entropy_abs = value;
        else if (name == "reflection_tol")
            tol.reflection_rel = value;
        else if (name == "variance_tol")
            tol.variance_rel = value;
        else if (name == "negativity_tol")
            tol.negativity_rel = value;
        else if (name == "jensen_tol")
            tol.jensen_abs = value;
        else if (name == "probe_tol")
            tol.probe_tol = value;
        else
            throw std::invalid_argument("unknown tolerance override: " + name);
    }
}

int command_run(const Scenario& scenario, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string started = utc_timestamp();
    SimulationOutput out = run(scenario);
    const std::string finished = utc_timestamp();

    const PhaseGrid grid = PhaseGrid::build(scenario.grid);
    const std::string csv_path = out_dir + "/ledger.csv";
    const std::string state_path = out_dir + "/state.kfps";

    CsvMetadata meta;
    meta.bc_kind = bc_kind_name(scenario.bc);
    meta.theta = scenario.bc.theta;
    meta.epsilon = scenario.epsilon;
    meta.mass0 = out.ledger.mass0;
    meta.energy0 = out.ledger.energy0;
    meta.entropy0 = out.ledger.entropy0;
    meta.max_f = out.max_f;
    meta.tol = scenario.tol;
    write_ledger_csv(csv_path, out.ledger, meta);
    write_snapshot(grid, out.final_state, state_path);

    json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["scenario_hash"] = scenario_hash(scenario);
    manifest["started_utc"] = started;
    manifest["finished_utc"] = finished;
    manifest["scenario_echo"] = echo_scenario(scenario);
    manifest["verdicts"] = verdicts_json(out.verdicts);
    manifest["all_pass"] = out.all_pass;
    manifest["metrics"] = {
        {"steps", out.steps},
        {"dt", out.dt},
        {"min_f", out.min_f},
        {"max_f", out.max_f},
        {"rho_floor", out.rho_floor},
        {"picard_total_iters", out.picard_total_iters},
        {"picard_nonconverged_steps", out.picard_nonconverged},
        {"trapezoid_positivity_fallbacks", out.euler_fallbacks},
        {"max_variance_clamp", out.max_variance_clamp},
        {"cutoff_mass_fraction_final", out.cutoff_fraction_final},
        {"cutoff_mass_fraction_max", out.max_cutoff_fraction},
        {"corner_influx_mass", out.trace.corner_in_mass},
        {"corner_outflux_mass", out.trace.corner_out_mass},
        {"time_integrated_third_moment", out.ledger.m3_cum},
        {"time_integrated_weighted_fisher", out.ledger.fisher_cum},
        {"probe_max_lhs_over_mid", out.probe_max_lhs_over_mid},
        {"probe_max_mid_over_rhs", out.probe_max_mid_over_rhs},
    };
    manifest["outputs"] = {{"ledger_csv", csv_path}, {"final_state", state_path}};
    json failures = json::array();
    for (const VerdictEntry& v : out.verdicts)
        if (!v.pass) failures.push_back(v.name);
    manifest["failed_verdicts"] = failures;
    write_json(manifest, out_dir + "/manifest.json");

    for (const VerdictEntry& v : out.verdicts)
        std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << "  value=" << format_g17(v.value)
                  << "  tolerance=" << format_g17(v.tolerance) << "\n";
    return out.all_pass ? 0 : 1;
}

int command_check(const std::string& csv_path, const std::vector<std::string>& overrides) {
    LedgerCsv csv = read_ledger_csv(csv_path);
    apply_tolerance_overrides(csv.meta.tol, overrides);
    check_runtime(!csv.rows.empty(), "check: ledger has no rows");

    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string& name, double value, double tol) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << "  value=" << format_g17(value)
                  << "  tolerance=" << format_g17(tol) << "\n";
        if (!ok) failures.push_back(name);
    };

    const LedgerRow& first = csv.rows.front();
    const bool reflect = csv.meta.bc_kind == "reflection";
    const double mass_scale = std::max(csv.meta.mass0, 1e-30);
    const double energy_scale = std::max(std::abs(csv.meta.energy0), 1e-30);

    // mass ledger closure between consecutive rows
    double worst_mass = 0.0;
    for (std::size_t k = 1; k < csv.rows.size(); ++k) {
        const LedgerRow& a = csv.rows[k - 1];
        const LedgerRow& b = csv.rows[k];
        const double closure =
            std::abs((b.mass - a.mass) - (b.in_mass - a.in_mass) + (b.out_mass - a.out_mass));
        worst_mass = std::max(worst_mass, closure / mass_scale);
    }
    expect(worst_mass <= csv.meta.tol.mass_rel, "mass_ledger", worst_mass, csv.meta.tol.mass_rel);

    // energy slack column: recompute and compare, then bound
    double worst_energy = -1e308, worst_energy_consistency = 0.0;
    for (std::size_t k = 0; k < csv.rows.size(); ++k) {
        const LedgerRow& r = csv.rows[k];
        const double recomputed =
            reflect ? r.energy - first.energy + (1.0 - csv.meta.theta) * r.out_energy
                    : r.energy - first.energy + r.out_energy - r.in_energy;
        worst_energy_consistency = std::max(
            worst_energy_consistency, std::abs(recomputed - r.energy_slack) / energy_scale);
        if (k > 0) worst_energy = std::max(worst_energy, r.energy_slack / energy_scale);
    }
    expect(worst_energy_consistency <= 1e-12, "energy_slack_consistency", worst_energy_consistency,
           1e-12);
    if (csv.rows.size() > 1)
        expect(worst_energy <= csv.meta.tol.energy_rel, "energy_inequality", worst_energy,
               csv.meta.tol.energy_rel);

    // entropy inequality column
    double worst_entropy = -1e308;
    for (std::size_t k = 1; k < csv.rows.size(); ++k)
        worst_entropy = std::max(worst_entropy, csv.rows[k].entropy_slack);
    const double entropy_tol =
        csv.meta.tol.entropy_rel * std::abs(csv.meta.entropy0) + csv.meta.tol.entropy_abs;
    if (csv.rows.size() > 1)
        expect(worst_entropy <= entropy_tol, "entropy_inequality", worst_entropy, entropy_tol);

    // cumulative nonnegative-integrand columns must not decrease
    double worst_monotone = 0.0;
    for (std::size_t k = 1; k < csv.rows.size(); ++k) {
        const LedgerRow& a = csv.rows[k - 1];
        const LedgerRow& b = csv.rows[k];
        for (double drop : {a.d_cum - b.d_cum, a.fisher_cum - b.fisher_cum, a.m3_cum - b.m3_cum,
                            a.in_mass - b.in_mass, a.out_mass - b.out_mass,
                            a.in_energy - b.in_energy, a.out_energy - b.out_energy})
            worst_monotone = std::max(worst_monotone, drop);
    }
    expect(worst_monotone <= 0.0, "cumulative_monotonicity", worst_monotone, 0.0);

    // nonnegativity from the recorded running minimum
    double min_f = 0.0;
    for (const LedgerRow& r : csv.rows) min_f = std::min(min_f, r.min_f);
    const double neg_tol = csv.meta.tol.negativity_rel * std::max(csv.meta.max_f, 1e-30);
    expect(-min_f <= neg_tol, "nonnegativity", -min_f, neg_tol);

    if (failures.empty()) return 0;
    std::cout << "check failed:";
    for (const std::string& f : failures) std::cout << ' ' << f;
    std::cout << "\n";
    return 1;
}

int command_sweep(const Scenario& scenario, const std::vector<double>& epsilons,
                  const std::string& out_dir) {
    require(epsilons.size() >= 2, "sweep: need at least two epsilons");
    std::filesystem::create_directories(out_dir);
    const std::string started = utc_timestamp();

    struct SweepRow {
        double eps, m3, fisher, min_f, mass_closure;
        bool nonneg_ok, mass_ok;
    };
    std::vector<SweepRow> rows;
    for (double eps : epsilons) {
        Scenario variant = scenario;
        variant.epsilon = eps;
        SimulationOutput out = run(variant);
        SweepRow row{};
        row.eps = eps;
        row.m3 = out.ledger.m3_cum;
        row.fisher = out.ledger.fisher_cum;
        row.min_f = out.min_f;
        row.mass_closure = out.ledger.max_step_closure;
        row.nonneg_ok = -out.min_f <= scenario.tol.negativity_rel * std::max(out.max_f, 1e-30);
        row.mass_ok = out.ledger.max_step_closure <= scenario.tol.mass_rel;
        rows.push_back(row);
    }

    auto ratio = [&](auto get) {
        double lo = 1e308, hi = 0.0;
        for (const SweepRow& r : rows) {
            lo = std::min(lo, get(r));
            hi = std::max(hi, get(r));
        }
        return lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : 1e308);
    };
    auto strictly_increasing = [&](auto get) {
        for (std::size_t k = 1; k < rows.size(); ++k)
            if (get(rows[k]) <= get(rows[k - 1])) return false;
        return true;
    };
    const double m3_ratio = ratio([](const SweepRow& r) { return r.m3; });
    const double fisher_ratio = ratio([](const SweepRow& r) { return r.fisher; });
    // uniform bound: bounded variation across the sweep and no monotone growth
    // as epsilon decreases
    const bool m3_ok =
        m3_ratio < 2.0 && !strictly_increasing([](const SweepRow& r) { return r.m3; });
    const bool fisher_ok =
        fisher_ratio < 2.0 && !strictly_increasing([](const SweepRow& r) { return r.fisher; });
    bool runs_ok = true;
    for (const SweepRow& r : rows) runs_ok = runs_ok && r.nonneg_ok && r.mass_ok;

    const std::string sweep_csv = out_dir + "/sweep.csv";
    {
        std::ofstream os(sweep_csv);
        check_runtime(static_cast<bool>(os), "sweep: cannot open " + sweep_csv);
        os << "epsilon,m3_time_integral,fisher_time_integral,min_f,mass_closure\n";
        for (const SweepRow& r : rows)
            os << format_g17(r.eps) << ',' << format_g17(r.m3) << ',' << format_g17(r.fisher) << ','
               << format_g17(r.min_f) << ',' << format_g17(r.mass_closure) << "\n";
        os << "# max_over_eps m3=" << format_g17(ratio([](const SweepRow& r) { return r.m3; }))
           << "x fisher=" << format_g17(fisher_ratio) << "x\n";
    }

    json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["scenario_hash"] = scenario_hash(scenario);
    manifest["started_utc"] = started;
    manifest["finished_utc"] = utc_timestamp();
    manifest["epsilons"] = epsilons;
    json verdicts = json::array();
    auto add = [&](const std::string& name, bool pass, double value, double tol,
                   const std::string& detail) {
        verdicts.push_back(
            {{"name", name}, {"pass", pass}, {"value", value}, {"tolerance", tol}, {"detail", detail}});
    };
    add("sweep_third_moment_uniform", m3_ok, m3_ratio, 2.0,
        "max/min of the time-integrated third moment across the sweep");
    add("sweep_fisher_uniform", fisher_ok, fisher_ratio, 2.0,
        "max/min of the time-integrated weighted Fisher information");
    add("sweep_runs_clean", runs_ok, runs_ok ? 0.0 : 1.0, 0.0,
        "mass ledger and nonnegativity on every run of the sweep");
    manifest["verdicts"] = verdicts;
    manifest["outputs"] = {{"sweep_csv", sweep_csv}};
    const bool all = m3_ok && fisher_ok && runs_ok;
    manifest["all_pass"] = all;
    write_json(manifest, out_dir + "/manifest.json");

    std::cout << (m3_ok ? "PASS " : "FAIL ") << "sweep_third_moment_uniform  ratio="
              << format_g17(m3_ratio) << "\n";
    std::cout << (fisher_ok ? "PASS " : "FAIL ") << "sweep_fisher_uniform  ratio="
              << format_g17(fisher_ratio) << "\n";
    std::cout << (runs_ok ? "PASS " : "FAIL ") << "sweep_runs_clean\n";
    return all ? 0 : 1;
}

int command_prep(const Scenario& scenario, const std::vector<double>& epsilons,
                 const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const PhaseGrid grid = PhaseGrid::build(scenario.grid);
    const std::vector<double> f0 = build_initial(grid, scenario.initial);
    const FinitenessChecks checks = check_datum(grid, f0);
    check_runtime(checks.ok, "prep: datum fails the finiteness checks");

    ConvergenceReport report = convergence_report(grid, f0, epsilons);
    const std::string report_csv = out_dir + "/convergence.csv";
    {
        std::ofstream os(report_csv);
        check_runtime(static_cast<bool>(os), "prep: cannot open " + report_csv);
        os << "epsilon,l1_gap,energy_gap,entropy_gap,cap_active_fraction\n";
        for (const ConvergenceRow& r : report.rows)
            os << format_g17(r.epsilon) << ',' << format_g17(r.l1_gap) << ','
               << format_g17(r.energy_gap) << ',' << format_g17(r.entropy_gap) << ','
               << format_g17(r.cap_active_fraction) << "\n";
    }
    for (double eps : epsilons) {
        const std::vector<double> fe = truncate_initial(grid, f0, eps);
        write_snapshot(grid, fe, out_dir + "/f0_eps" + format_g17(eps) + ".kfps");
    }

    json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["scenario_hash"] = scenario_hash(scenario);
    manifest["datum"] = {{"mass", checks.mass},
                         {"energy", checks.energy},
                         {"abs_entropy", checks.abs_entropy},
                         {"cutoff_mass_fraction", checks.cutoff_fraction}};
    manifest["verdicts"] = json::array(
        {{{"name", "truncation_l1_monotone"},
          {"pass", report.l1_monotone},
          {"value", report.l1_monotone ? 0.0 : 1.0},
          {"tolerance", 0.0},
          {"detail", "L1 truncation gap nonincreasing over decreasing epsilon"}}});
    manifest["all_pass"] = report.l1_monotone;
    manifest["outputs"] = {{"convergence_csv", report_csv}};
    write_json(manifest, out_dir + "/manifest.json");

    std::cout << (report.l1_monotone ? "PASS " : "FAIL ") << "truncation_l1_monotone\n";
    return report.l1_monotone ? 0 : 1;
}

}  // namespace kfp
