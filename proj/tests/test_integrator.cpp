#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kfp/integrator.hpp"
#include "kfp/scenario_io.hpp"

using namespace kfp;

namespace {

Scenario small_scenario() {
    Scenario s;
    s.grid.dim = 1;
    s.grid.space[0] = {0.0, 1.0, 16};
    s.grid.velocity[0] = {4.0, 32};
    s.bc.kind = BoundaryCondition::Kind::inflow;
    s.bc.inflow.kind = InflowSpec::Kind::maxwellian;
    s.bc.inflow.rho = 0.5;
    s.bc.inflow.T = 1.0;
    s.initial.kind = DatumSpec::Kind::maxwellian;
    s.epsilon = 0.2;
    s.t_final = 0.05;
    s.cfl_fraction = 0.5;
    s.output_every = 8;
    return s;
}

/// Self-consistent discrete equilibrium: iterate moments -> capped fields ->
/// equilibrium shape until the coefficients settle.
std::vector<double> self_consistent_equilibrium(const PhaseGrid& grid, double epsilon) {
    double T = 1.0;
    Vec u{0.0, 0.0};
    std::vector<double> slice;
    for (int k = 0; k < 200; ++k) {
        slice = discrete_equilibrium(grid, 1.0, u, T, epsilon, true);
        std::vector<double> f(grid.phase_cells());
        for (int is = 0; is < grid.spatial_cells(); ++is)
            for (int iv = 0; iv < grid.velocity_cells(); ++iv)
                f[grid.phase_index(is, iv)] = slice[iv];
        const MacroFields m = compute_moments(grid, f, 0.0);
        const RegularizedFields r = regularize_fields(m, epsilon);
        const double drift = std::abs(r.temperature[0] - T) + std::abs(r.velocity[0] - u[0]);
        T = r.temperature[0];
        u = {r.velocity[0], 0.0};
        if (drift < 1e-15) break;
    }
    return slice;
}

}  // namespace

TEST_CASE("stable_dt arithmetic") {
    GridSpec spec;
    spec.dim = 1;
    spec.space[0] = {0.0, 1.0, 4};  // dx = 0.25
    spec.velocity[0] = {2.0, 4};
    const PhaseGrid g = PhaseGrid::build(spec);
    CHECK(stable_dt(g, 0.5) == doctest::Approx(0.0625).epsilon(1e-15));
    GridSpec spec2;
    spec2.dim = 1;
    spec2.space[0] = {0.0, 1.0, 10};  // dx = 0.1
    spec2.velocity[0] = {4.0, 4};
    const PhaseGrid g2 = PhaseGrid::build(spec2);
    CHECK(stable_dt(g2, 1.0) == doctest::Approx(0.025).epsilon(1e-15));
    CHECK_THROWS_AS(stable_dt(g, 0.0), std::invalid_argument);
}

TEST_CASE("zero data stays zero") {
    Scenario s = small_scenario();
    s.bc.inflow.kind = InflowSpec::Kind::zero;
    s.initial.kind = DatumSpec::Kind::box;
    s.initial.height = 0.0;
    const SimulationOutput out = run(s);
    for (double x : out.final_state) CHECK(x == 0.0);
    CHECK(out.ledger.rows.back().mass == 0.0);
    CHECK(out.all_pass);
}

TEST_CASE("t_final = 0 emits only the initial snapshot") {
    Scenario s = small_scenario();
    s.t_final = 0.0;
    const SimulationOutput out = run(s);
    CHECK(out.steps == 0);
    CHECK(out.ledger.rows.size() == 1);
}

TEST_CASE("one Picard iteration reproduces the frozen-coefficient step bitwise") {
    Scenario s = small_scenario();
    const PhaseGrid grid = PhaseGrid::build(s.grid);
    const auto faces = classify_boundary(grid);
    const auto model = s.collision.build();
    std::vector<double> f = build_initial(grid, s.initial);
    const auto inflow_values = materialize_inflow(grid, faces, s.bc.inflow);
    const double dt = stable_dt(grid, s.cfl_fraction);
    const double floor = default_rho_floor(grid, f);

    // manual frozen-coefficient Strang step
    std::vector<double> manual = f;
    {
        TraceRecord trace = TraceRecord::make(grid, faces);
        transport_step(grid, faces, s.bc, inflow_values, 0.0, 0.5 * dt, manual, trace);
        const MacroFields macro = compute_moments(grid, manual, floor);
        const RegularizedFields reg = regularize_fields(macro, s.epsilon);
        collision_step(grid, manual, macro, reg, model, dt, s.epsilon);
        transport_step(grid, faces, s.bc, inflow_values, 0.5 * dt, 0.5 * dt, manual, trace);
    }

    std::vector<double> stepped = f;
    {
        TraceRecord trace = TraceRecord::make(grid, faces);
        StepContext ctx{grid,  faces, s.bc,      inflow_values,
                        model, s.epsilon, floor, 1.0,
                        PicardSettings{1e-8, 1}, TimeScheme::trapezoidal,
                        false, false, 1};
        const StepResult r = step(ctx, 0.0, dt, stepped, trace);
        CHECK(r.picard_iters == 1);
    }
    CHECK(stepped == manual);
}

TEST_CASE("stationary equilibrium with matching inflow barely moves") {
    Scenario s = small_scenario();
    const PhaseGrid grid = PhaseGrid::build(s.grid);
    const std::vector<double> slice = self_consistent_equilibrium(grid, s.epsilon);

    s.initial.kind = DatumSpec::Kind::tabulated;
    s.initial.table.resize(grid.phase_cells());
    for (int is = 0; is < grid.spatial_cells(); ++is)
        for (int iv = 0; iv < grid.velocity_cells(); ++iv)
            s.initial.table[grid.phase_index(is, iv)] = slice[iv];

    const auto faces = classify_boundary(grid);
    s.bc.inflow.kind = InflowSpec::Kind::tabulated;
    s.bc.inflow.table.assign(faces.size() * grid.velocity_cells(), 0.0);
    for (const auto& face : faces)
        for (int iv : face.incoming)
            s.bc.inflow.table[face.id * grid.velocity_cells() + iv] = slice[iv];

    s.t_final = 10.0 * stable_dt(grid, s.cfl_fraction);
    const SimulationOutput out = run(s);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < out.final_state.size(); ++i) {
        worst = std::max(worst, std::abs(out.final_state[i] - s.initial.table[i]));
        scale = std::max(scale, s.initial.table[i]);
    }
    CHECK(worst / scale <= 10 * 1e-8);  // <= 1e-8 relative change per step
}

TEST_CASE("runs are deterministic and worker-count independent") {
    Scenario s = small_scenario();
    s.initial.kind = DatumSpec::Kind::bimodal;
    s.initial.rho = 0.5;
    s.initial.u = {1.0, 0.0};
    s.initial.T = 0.4;
    s.initial.rho2 = 0.5;
    s.initial.u2 = {-1.0, 0.0};
    s.initial.T2 = 0.4;
    const SimulationOutput a = run(s);
    const SimulationOutput b = run(s);
    CHECK(a.final_state == b.final_state);
    REQUIRE(a.ledger.rows.size() == b.ledger.rows.size());
    for (std::size_t k = 0; k < a.ledger.rows.size(); ++k) {
        CHECK(a.ledger.rows[k].entropy_slack == b.ledger.rows[k].entropy_slack);
        CHECK(a.ledger.rows[k].energy_slack == b.ledger.rows[k].energy_slack);
    }
    Scenario sw = s;
    sw.workers = 4;
    const SimulationOutput c = run(sw);
    CHECK(a.final_state == c.final_state);
}

TEST_CASE("scenario validation") {
    Scenario s = small_scenario();
    s.epsilon = 0.0;
    CHECK_THROWS_AS(run(s), std::invalid_argument);
    s = small_scenario();
    s.bc.kind = BoundaryCondition::Kind::absorb_reflect;
    s.bc.theta = 1.0;
    CHECK_THROWS_AS(run(s), std::invalid_argument);
    s = small_scenario();
    s.fixed_dt = 100.0;  // violates CFL
    CHECK_THROWS_AS(run(s), std::invalid_argument);
}

TEST_CASE("non-converging Picard is reported, not silently accepted") {
    Scenario s = small_scenario();
    s.picard.tolerance = 1e-300;  // unattainable
    s.picard.max_iters = 2;
    s.t_final = 2.0 * stable_dt(PhaseGrid::build(s.grid), s.cfl_fraction);
    const SimulationOutput out = run(s);
    CHECK(out.picard_nonconverged == out.steps);
}
