// Acceptance suite: runs the desk-scale scenarios and audits every ledger
// inequality at its pinned tolerance. One PASS/FAIL line per criterion.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "kfp/collision.hpp"
#include "kfp/data_prep.hpp"
#include "kfp/diagnostics.hpp"
#include "kfp/integrator.hpp"
#include "kfp/moments.hpp"
#include "kfp/scenario_io.hpp"
#include "kfp/util.hpp"

using namespace kfp;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  %-38s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(double x) { return format_g17(x); }

// ---- desk-scale scenarios (d=1, Nx=64, Nv=128, Vmax=8, T=1, CFL 0.5) ----

const char* kDeskGrid = R"(
[grid]
dim = 1
x_min = 0
x_max = 1
nx = 64
vmax = 8
nv = 128
)";

Scenario bimodal_inflow(double epsilon, bool probes) {
    std::string text = std::string(kDeskGrid) + R"(
[boundary]
kind = inflow
inflow = maxwellian
inflow_rho = 0.5
inflow_u = 0
inflow_temperature = 4

[initial]
kind = bimodal
rho = 0.5
u = 2
temperature = 0.5
rho2 = 0.5
u2 = -2
temperature2 = 0.5

[run]
t_final = 1.0
cfl = 0.5
output_every = 16
epsilon = )" + format_g17(epsilon) + "\n";
    if (probes) text += "probe_deltas = 4,8\n";
    return parse_scenario_text(text);
}

Scenario bimodal_reflection(double theta) {
    std::string text = std::string(kDeskGrid) + R"(
[boundary]
kind = reflection
theta = )" + format_g17(theta) + R"(

[initial]
kind = bimodal
rho = 0.5
u = 2
temperature = 0.5
rho2 = 0.5
u2 = -2
temperature2 = 0.5

[run]
t_final = 1.0
cfl = 0.5
output_every = 16
epsilon = 0.1
)";
    return parse_scenario_text(text);
}

Scenario box_scenario() {
    std::string text = std::string(kDeskGrid) + R"(
[boundary]
kind = inflow
inflow = zero

[initial]
kind = box
height = 0.5
x_min = 0.25
x_max = 0.75
v_bound = 4

[run]
t_final = 1.0
cfl = 0.5
output_every = 16
epsilon = 0.1
)";
    return parse_scenario_text(text);
}

const VerdictEntry& verdict(const SimulationOutput& out, const std::string& name) {
    for (const VerdictEntry& v : out.verdicts)
        if (v.name == name) return v;
    throw std::runtime_error("missing verdict " + name);
}

double l1_distance(const PhaseGrid& grid, const std::vector<double>& a,
                   const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s * grid.cell_volume();
}

PhaseGrid desk_grid(int nv) {
    GridSpec s;
    s.dim = 1;
    s.space[0] = {0.0, 1.0, 64};
    s.velocity[0] = {8.0, nv};
    return PhaseGrid::build(s);
}

}  // namespace

int main() {
    std::vector<const SimulationOutput*> all_runs;

    // shared runs
    const SimulationOutput run_inflow = run(bimodal_inflow(0.1, true));
    const SimulationOutput run_r0 = run(bimodal_reflection(0.0));
    const SimulationOutput run_r5 = run(bimodal_reflection(0.5));
    const SimulationOutput run_r9 = run(bimodal_reflection(0.9));
    const SimulationOutput run_box = run(box_scenario());
    all_runs = {&run_inflow, &run_r0, &run_r5, &run_r9, &run_box};

    // [1] mass ledger closure, every step, both BC kinds
    {
        double worst = 0.0;
        for (const auto* r : {&run_inflow, &run_r0, &run_r5, &run_r9})
            worst = std::max(worst, r->ledger.max_step_closure);
        report("1 mass_ledger_closure", worst <= 1e-12,
               "max |d(mass)-influx+outflux|/mass0 = " + fmt(worst) + " tol 1e-12");
    }

    // [2] energy inequality: inflow bimodal, and (1-theta)-weighted reflection
    {
        const double e_in = verdict(run_inflow, "energy_inequality").value;
        const double e_re = verdict(run_r5, "energy_inequality").value;
        report("2 energy_inequality", e_in <= 1e-8 && e_re <= 1e-8,
               "slack/E0: inflow " + fmt(e_in) + ", reflection " + fmt(e_re) + " tol 1e-8");
    }

    // [3] entropy inequality with dissipation on the box scenario
    {
        const double slack = run_box.ledger.max_entropy_slack;
        bool d_monotone = true;
        double prev = 0.0;
        for (const LedgerRow& row : run_box.ledger.rows) {
            if (row.d_cum < prev) d_monotone = false;
            prev = row.d_cum;
        }
        report("3 entropy_inequality", slack <= 1e-6 && d_monotone,
               "max slack = " + fmt(slack) + " (tol 1e-6 absolute), D_cum nondecreasing=" +
                   (d_monotone ? "yes" : "no") + ", D(T)=" + fmt(run_box.ledger.d_cum));
    }

    // [4] equilibrium fidelity
    {
        const PhaseGrid grid = desk_grid(128);
        const double T = 0.8, eps = 0.1;
        const Vec u{0.3, 0.0};
        const std::vector<double> geq = discrete_equilibrium(grid, 1.0, u, T, eps, true);
        std::vector<double> f(grid.phase_cells());
        for (int is = 0; is < grid.spatial_cells(); ++is)
            for (int iv = 0; iv < grid.velocity_cells(); ++iv)
                f[grid.phase_index(is, iv)] = geq[iv];
        const std::vector<double> before = f;
        const MacroFields macro = compute_moments(grid, f, 0.0);
        RegularizedFields reg;
        reg.epsilon = eps;
        reg.temperature.assign(grid.spatial_cells(), T);
        reg.velocity.assign(2 * grid.spatial_cells(), 0.0);
        for (int is = 0; is < grid.spatial_cells(); ++is) reg.velocity[2 * is] = u[0];
        collision_step(grid, f, macro, reg, CollisionFrequencyModel::constant(1.0),
                       9.765625e-4, eps);
        double drift = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            drift = std::max(drift, std::abs(f[i] - before[i]));
            scale = std::max(scale, before[i]);
        }
        const double eq_rel = drift / scale;

        // analytic Maxwellian: central-difference flux residual falls at O(dv^2)
        auto residual_max = [](int nv) {
            const PhaseGrid g = desk_grid(nv);
            const std::vector<double> m = maxwellian(1.0, {0.0, 0.0}, 1.0, g);
            std::vector<double> fm(g.phase_cells());
            for (int is = 0; is < g.spatial_cells(); ++is)
                for (int iv = 0; iv < g.velocity_cells(); ++iv)
                    fm[g.phase_index(is, iv)] = m[iv];
            MacroFields mm = compute_moments(g, fm, 1e-12);
            FluxCoeffs coeffs = raw_coeffs(mm, CollisionFrequencyModel::constant(1.0));
            for (int is = 0; is < g.spatial_cells(); ++is) {
                coeffs.temperature[is] = 1.0;
                coeffs.velocity[2 * is] = 0.0;
            }
            const std::vector<double> r = collision_flux_residual(g, fm, coeffs);
            double worst = 0.0;
            for (int iv = 1; iv + 1 < g.velocity_cells(); ++iv)
                worst = std::max(worst, std::abs(r[g.phase_index(0, iv)]));
            return worst;
        };
        const double ratio = residual_max(128) / residual_max(256);

        // one collision step applied to the sampled Maxwellian with raw
        // coefficients (exponential fitting preserves it to round-off)
        std::vector<double> fm(grid.phase_cells());
        const std::vector<double> m = maxwellian(1.0, {0.0, 0.0}, 1.0, grid);
        for (int is = 0; is < grid.spatial_cells(); ++is)
            for (int iv = 0; iv < grid.velocity_cells(); ++iv)
                fm[grid.phase_index(is, iv)] = m[iv];
        const std::vector<double> fm0 = fm;
        MacroFields mm = compute_moments(grid, fm, 1e-12);
        RegularizedFields rm;
        rm.epsilon = eps;
        rm.temperature.assign(grid.spatial_cells(), 1.0);
        rm.velocity.assign(2 * grid.spatial_cells(), 0.0);
        CollisionOptions raw_opt;
        raw_opt.unregularized_drift = true;
        collision_step(grid, fm, mm, rm, CollisionFrequencyModel::constant(1.0), 9.765625e-4,
                       0.0, raw_opt);
        double mdrift = 0.0, mscale = 0.0;
        for (std::size_t i = 0; i < fm.size(); ++i) {
            mdrift = std::max(mdrift, std::abs(fm[i] - fm0[i]));
            mscale = std::max(mscale, fm0[i]);
        }
        report("4 equilibrium_fidelity", eq_rel <= 1e-12 && ratio >= 3.5,
               "stationarity " + fmt(eq_rel) + " (tol 1e-12), residual ratio " + fmt(ratio) +
                   " (>= 3.5), Maxwellian one-step drift " + fmt(mdrift / mscale));
    }

    // [6] epsilon-uniform bounds over the sweep (also feeds [5])
    std::vector<SimulationOutput> sweep_runs;
    {
        const std::vector<double> eps_list{0.4, 0.2, 0.1, 0.05};
        std::vector<double> m3s, fis;
        for (double eps : eps_list) {
            sweep_runs.push_back(run(bimodal_inflow(eps, false)));
            m3s.push_back(sweep_runs.back().ledger.m3_cum);
            fis.push_back(sweep_runs.back().ledger.fisher_cum);
        }
        // blow-up means systematic growth on the scale of the bound itself,
        // not a drift toward the vanishing-eps limit
        auto blow_up = [](const std::vector<double>& v) {
            bool increasing = true;
            for (std::size_t k = 1; k < v.size(); ++k)
                if (v[k] <= v[k - 1]) increasing = false;
            return increasing && v.back() > 1.5 * v.front();
        };
        auto ratio = [](const std::vector<double>& v) {
            double lo = 1e308, hi = 0.0;
            for (double x : v) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            return hi / lo;
        };
        const double m3_ratio = ratio(m3s), fi_ratio = ratio(fis);
        report("6 epsilon_uniform_bounds",
               m3_ratio < 2.0 && fi_ratio < 2.0 && !blow_up(m3s) && !blow_up(fis),
               "third-moment ratio " + fmt(m3_ratio) + ", Fisher ratio " + fmt(fi_ratio) +
                   " (< 2), no monotone blow-up as eps drops");
        for (const auto& r : sweep_runs) all_runs.push_back(&r);
    }

    // [5] nonnegativity over every scenario and step of this suite
    {
        bool ok = true;
        double worst = 0.0;
        for (const SimulationOutput* r : all_runs) {
            const double bound = 1e-14 * std::max(r->max_f, 1e-30);
            worst = std::max(worst, -r->min_f / std::max(r->max_f, 1e-30));
            ok = ok && (-r->min_f <= bound);
        }
        report("5 nonnegativity", ok,
               "max over runs of -(min f)/(max f) = " + fmt(worst) + " tol 1e-14");
    }

    // [7] reflection flux identities, every step
    {
        const double m5 = run_r5.max_reflect_mass_dev, e5 = run_r5.max_reflect_energy_dev;
        const double m9 = run_r9.max_reflect_mass_dev, e9 = run_r9.max_reflect_energy_dev;
        const double worst = std::max({m5, e5, m9, e9});
        report("7 reflection_flux_identities", worst <= 1e-12,
               "max |influx - theta outflux| / (theta outflux) = " + fmt(worst) + " tol 1e-12");
    }

    // [8] mollification--Fisher chain on every snapshot of the bimodal run
    {
        report("8 mollification_fisher_chain", run_inflow.probe_all_hold,
               "per-cell chain at delta in {4 dv, 8 dv}; max lhs/mid " +
                   fmt(run_inflow.probe_max_lhs_over_mid) + ", max mid/rhs " +
                   fmt(run_inflow.probe_max_mid_over_rhs));
    }

    // [9] analytic oracles
    {
        const PhaseGrid g256 = desk_grid(256);
        std::vector<double> f(g256.phase_cells());
        const std::vector<double> m = maxwellian(1.0, {0.5, 0.0}, 1.0, g256);
        for (int is = 0; is < g256.spatial_cells(); ++is)
            for (int iv = 0; iv < g256.velocity_cells(); ++iv)
                f[g256.phase_index(is, iv)] = m[iv];
        const MacroFields mm = compute_moments(g256, f, 1e-12);
        const double rho_err = std::abs(mm.rho[0] - 1.0);
        const double u_err = std::abs(mm.velocity[0] - 0.5);
        const double t_err = std::abs(mm.temperature[0] - 1.0);

        const PhaseGrid g1024 = desk_grid(1024);
        std::vector<double> fm(g1024.phase_cells());
        const std::vector<double> m2 = maxwellian(1.0, {0.0, 0.0}, 1.0, g1024);
        for (int is = 0; is < g1024.spatial_cells(); ++is)
            for (int iv = 0; iv < g1024.velocity_cells(); ++iv)
                fm[g1024.phase_index(is, iv)] = m2[iv];
        const double fisher_err = std::abs(fisher_information(g1024, fm) - 0.25);
        const double m3_err = std::abs(third_moment(g1024, fm) - 2.0 * std::sqrt(2.0 / M_PI));
        const CompactnessProbe probe = mollification_probe(g1024, fm, 4.0 * g1024.dv(0));
        const double tv_err =
            std::abs(probe.mid[0] / (4.0 * g1024.dv(0)) - std::sqrt(2.0 / M_PI));

        const bool pass = rho_err <= 1e-6 && u_err <= 1e-6 && t_err <= 1e-6 &&
                          fisher_err <= 1e-4 && m3_err <= 1e-4 && tv_err <= 1e-4;
        report("9 analytic_oracles", pass,
               "moment errs (" + fmt(rho_err) + ", " + fmt(u_err) + ", " + fmt(t_err) +
                   ") tol 1e-6; fisher " + fmt(fisher_err) + ", m3 " + fmt(m3_err) + ", tv " +
                   fmt(tv_err) + " tol 1e-4");
    }

    // [10] truncation convergence and inactive-cap idempotence
    {
        const PhaseGrid grid = desk_grid(128);
        DatumSpec spec;  // Maxwellian(1, 0, 1)
        const std::vector<double> f0 = build_initial(grid, spec);
        const ConvergenceReport rep = convergence_report(grid, f0, {0.5, 0.25, 0.1});
        const bool decreasing = rep.rows[0].l1_gap > rep.rows[1].l1_gap &&
                                rep.rows[1].l1_gap > rep.rows[2].l1_gap &&
                                rep.rows[0].energy_gap > rep.rows[1].energy_gap &&
                                rep.rows[1].energy_gap > rep.rows[2].energy_gap &&
                                rep.rows[0].entropy_gap > rep.rows[1].entropy_gap &&
                                rep.rows[1].entropy_gap > rep.rows[2].entropy_gap;
        const bool idempotent = truncate_initial(grid, f0, 0.1) == f0;
        report("10 truncation_convergence", decreasing && idempotent,
               "gaps strictly decreasing=" + std::string(decreasing ? "yes" : "no") +
                   ", inactive cap bitwise identity=" + (idempotent ? "yes" : "no"));
    }

    // [11] determinism and splitting order
    {
        const SimulationOutput again = run(bimodal_inflow(0.1, true));
        Scenario workers4 = bimodal_inflow(0.1, true);
        workers4.workers = 4;
        const SimulationOutput par = run(workers4);
        bool identical = again.final_state == run_inflow.final_state &&
                         par.final_state == run_inflow.final_state &&
                         again.ledger.rows.size() == run_inflow.ledger.rows.size();
        for (std::size_t k = 0; identical && k < again.ledger.rows.size(); ++k) {
            const LedgerRow& a = again.ledger.rows[k];
            const LedgerRow& b = run_inflow.ledger.rows[k];
            identical = a.mass == b.mass && a.energy == b.energy && a.entropy == b.entropy &&
                        a.d_cum == b.d_cum && a.energy_slack == b.energy_slack &&
                        a.entropy_slack == b.entropy_slack;
        }

        // Strang order under dt halving on a smooth scenario (fixed grid)
        Scenario smooth = bimodal_inflow(0.1, false);
        smooth.grid.space[0].cells = 32;
        smooth.grid.velocity[0].cells = 64;
        smooth.t_final = 0.125;
        smooth.output_every = 1 << 20;
        const PhaseGrid sgrid = PhaseGrid::build(smooth.grid);
        const double dt0 = stable_dt(sgrid, 0.5);
        auto state_at = [&](double dt) {
            Scenario v = smooth;
            v.fixed_dt = dt;
            return run(v).final_state;
        };
        const std::vector<double> f1 = state_at(dt0);
        const std::vector<double> f2 = state_at(0.5 * dt0);
        const std::vector<double> f4 = state_at(0.25 * dt0);
        const double e12 = l1_distance(sgrid, f1, f2);
        const double e24 = l1_distance(sgrid, f2, f4);
        const double ratio = e12 / e24;
        report("11 determinism_and_splitting", identical && ratio >= 3.5,
               "bit-identical reruns (any workers)=" + std::string(identical ? "yes" : "no") +
                   ", Strang dt-halving ratio " + fmt(ratio) + " (>= 3.5)");
    }

    std::printf("%d/11 criteria passed\n", 11 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
