#pragma once

#include <string>
#include <vector>

#include "kfp/integrator.hpp"

namespace kfp {

/// Tolerance overrides passed on the command line as name=value pairs.
void apply_tolerance_overrides(AuditTolerances& tol,
                               const std::vector<std::string>& overrides);

/// Executes one scenario, writing ledger.csv, state.kfps, and manifest.json
/// under out_dir. Returns 0 when every verdict passes.
int command_run(const Scenario& scenario, const std::string& out_dir);

/// Re-audits a previously written ledger CSV against its recorded
/// tolerances (optionally overridden). Nonzero exit names the failing checks.
int command_check(const std::string& csv_path, const std::vector<std::string>& overrides);

/// Runs the scenario over an epsilon list and writes the uniform-bound
/// report (time-integrated third moment and Fisher information per epsilon).
int command_sweep(const Scenario& scenario, const std::vector<double>& epsilons,
                  const std::string& out_dir);

/// Emits truncated data snapshots and the truncation convergence report.
int command_prep(const Scenario& scenario, const std::vector<double>& epsilons,
                 const std::string& out_dir);

}  // namespace kfp
