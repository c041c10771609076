#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kfp/collision.hpp"
#include "kfp/data_prep.hpp"
#include "kfp/diagnostics.hpp"
#include "kfp/grid.hpp"
#include "kfp/transport.hpp"

namespace kfp {

struct CollisionModelSpec {
    CollisionFrequencyModel::Kind kind = CollisionFrequencyModel::Kind::constant;
    double nu0 = 1.0;
    double alpha = 1.0;
    double beta = 0.0;
    std::vector<double> table_rho, table_nu;
    std::optional<double> declared_sup;

    CollisionFrequencyModel build() const;
};

struct PicardSettings {
    double tolerance = 1e-8;
    int max_iters = 25;
};

struct AuditTolerances {
    double mass_rel = 1e-12;
    double energy_rel = 1e-8;
    double entropy_rel = 1e-6;
    double entropy_abs = 1e-6;
    double reflection_rel = 1e-12;
    double variance_rel = 1e-12;
    double negativity_rel = 1e-14;  // min f >= -tol * max f
    double jensen_abs = 1e-10;      // absolute slack on rho|u|^2 <= E2
    double probe_tol = 0.05;
};

/// Full simulation description; parse_scenario materializes all defaults.
struct Scenario {
    GridSpec grid;
    BoundaryCondition bc;
    CollisionModelSpec collision;
    DatumSpec initial;
    double epsilon = 0.1;
    double t_final = 1.0;
    double cfl_fraction = 0.5;
    std::optional<double> fixed_dt;  // overrides the CFL fraction when set
    PicardSettings picard;
    int output_every = 16;  // steps per ledger row
    TimeScheme collision_time = TimeScheme::trapezoidal;
    bool lie_splitting = false;
    bool unregularized_drift = false;
    bool truncate_data = false;  // apply the 1/eps cap to f0 and g before the run
    std::optional<double> rho_floor_override;
    int workers = 1;
    std::vector<double> probe_deltas;  // mollifier widths in units of dv; empty disables
    AuditTolerances tol;
};

struct VerdictEntry {
    std::string name;
    bool pass = false;
    double value = 0.0;      // measured slack / deviation
    double tolerance = 0.0;  // threshold it is compared against
    std::string detail;
};

struct SimulationOutput {
    BalanceLedger ledger;
    TraceRecord trace;
    std::vector<double> final_state;
    double dt = 0.0;
    long steps = 0;
    double min_f = 0.0;  // over all substeps of the run
    double max_f = 0.0;
    long picard_nonconverged = 0;
    long picard_total_iters = 0;
    long euler_fallbacks = 0;
    double rho_floor = 0.0;
    double max_variance_clamp = 0.0;
    double max_reflect_mass_dev = 0.0;    // per-step |in - theta out| / theta out
    double max_reflect_energy_dev = 0.0;
    double max_jensen = -1e308;
    double max_variance_dev = 0.0;
    double cutoff_fraction_final = 0.0;
    double max_cutoff_fraction = 0.0;
    bool probe_enabled = false;
    bool probe_all_hold = true;
    double probe_max_lhs_over_mid = 0.0;
    double probe_max_mid_over_rhs = 0.0;
    std::vector<VerdictEntry> verdicts;
    bool all_pass = true;
};

/// dt = cfl_fraction / sum_axes (vmax_a / dx_a); the collision substep is
/// unconditionally stable, only transport constrains the step.
double stable_dt(const PhaseGrid& grid, double cfl_fraction);

struct StepContext {
    const PhaseGrid& grid;
    const std::vector<BoundaryFace>& faces;
    const BoundaryCondition& bc;
    const std::vector<double>& inflow_values;
    const CollisionFrequencyModel& model;
    double epsilon;
    double rho_floor;
    double coeff_scale;  // typical density, for relative coefficient changes
    PicardSettings picard;
    TimeScheme collision_time;
    bool lie_splitting;
    bool unregularized_drift;
    int workers;
};

struct StepResult {
    long picard_iters = 0;
    bool picard_converged = true;
    double coeff_change = 0.0;
    double min_f = 0.0;  // over the substeps of this step
    CollisionStepReport collision;
};

/// One full step: transport(dt/2), collision(dt) with Picard-updated
/// coefficients, transport(dt/2) (or Lie: transport(dt), collision(dt)).
StepResult step(const StepContext& ctx, double t, double dt, std::vector<double>& f,
                TraceRecord& trace);

/// Runs the scenario from 0 to t_final; deterministic for any worker count.
SimulationOutput run(const Scenario& scenario);

}  // namespace kfp
