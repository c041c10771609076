#pragma once

#include <utility>
#include <vector>

#include "kfp/collision.hpp"
#include "kfp/grid.hpp"
#include "kfp/moments.hpp"
#include "kfp/transport.hpp"

namespace kfp {

/// Entropy integral f log f with the 0 log 0 = 0 convention; values below
/// the positivity floor are excluded.
double entropy_functional(const PhaseGrid& grid, const std::vector<double>& f,
                          double positivity_floor = 1e-30);

double energy_functional(const PhaseGrid& grid, const std::vector<double>& f);  // (1+|v|^2) f

/// Relative-entropy dissipation sum nu/(f T) |T grad_v f + drift f|^2 over
/// cells above the floors; central differences, vacuum cells contribute zero.
double dissipation_functional(const PhaseGrid& grid, const std::vector<double>& f,
                              const FluxCoeffs& coeffs, double positivity_floor = 1e-30);

/// Weighted Fisher integral sum nu T |grad_v sqrt(f)|^2 (sqrt differenced
/// directly, never via f' / 2 sqrt f).
double weighted_fisher(const PhaseGrid& grid, const std::vector<double>& f,
                       const FluxCoeffs& coeffs);

/// Unweighted Fisher integral |grad_v sqrt(f)|^2.
double fisher_information(const PhaseGrid& grid, const std::vector<double>& f);

double third_moment(const PhaseGrid& grid, const std::vector<double>& f);

/// Interior entropy production bound: sum nu_w f div(drift velocity field).
double interior_entropy_source(const PhaseGrid& grid, const std::vector<double>& f,
                               const FluxCoeffs& coeffs);

/// Mass fraction carried by velocity cells within the given fraction of the
/// velocity cutoff (truncation-quality metric).
double cutoff_mass_fraction(const PhaseGrid& grid, const std::vector<double>& f,
                            double fraction = 0.1);

/// Max over non-vacuum cells of |V - (E2 - |j|^2/rho)/d| with V recomputed
/// independently from the centered second moment.
double variance_identity_check(const PhaseGrid& grid, const std::vector<double>& f,
                               const MacroFields& macro);

/// Max over cells of rho |u|^2 - E2 (nonpositive when the Jensen bound holds).
double jensen_max_violation(const MacroFields& macro);

/// Velocity mollification of one spatial cell's slice by the normalized
/// quartic bump of width delta (edge-replicated at the cutoff).
std::vector<double> mollify_slice(const PhaseGrid& grid, const double* slice, double delta);

/// Per-spatial-cell chain  |f - f*eta|_L1  <=  delta |grad f|_L1  <=
/// 2 delta sqrt(mass) sqrt(Fisher), audited with the given tolerance.
struct CompactnessProbe {
    double delta = 0.0;
    double tolerance = 0.05;
    std::vector<double> lhs, mid, rhs;  // per spatial cell
    std::vector<char> vacuum;           // cells skipped by the rho floor
    bool chain_holds = true;
    double max_lhs_over_mid = 0.0;  // measured ratios over audited cells
    double max_mid_over_rhs = 0.0;
};

CompactnessProbe mollification_probe(const PhaseGrid& grid, const std::vector<double>& f,
                                     double delta, double tolerance = 0.05,
                                     double rho_floor = 0.0);

/// One CSV row of the balance ledger (fixed column order).
struct LedgerRow {
    double t = 0.0;
    double mass = 0.0, energy = 0.0, entropy = 0.0;
    double d_cum = 0.0, fisher_cum = 0.0, m3_cum = 0.0;
    double in_mass = 0.0, out_mass = 0.0;
    double in_energy = 0.0, out_energy = 0.0;
    double in_entropy = 0.0, out_entropy = 0.0;
    double energy_slack = 0.0, entropy_slack = 0.0;
    long picard_iters = 0;
    double min_f = 0.0;
};

/// Cumulative mass/energy/entropy budgets with interior and boundary terms.
struct BalanceLedger {
    double mass0 = 0.0, energy0 = 0.0, entropy0 = 0.0;
    double d_cum = 0.0, fisher_cum = 0.0, m3_cum = 0.0, source_cum = 0.0;
    double max_energy_slack = -1e308;
    double max_entropy_slack = -1e308;
    double max_step_closure = 0.0;  // per-step |d(mass) - influx + outflux| / mass0
    std::vector<LedgerRow> rows;
};

/// Accumulates the per-step interior terms (right-endpoint rectangle rule).
void accumulate_interior(BalanceLedger& ledger, double dt, double dissipation, double fisher,
                         double m3, double source);

/// Appends a snapshot row and evaluates both inequality slacks with the
/// BC-appropriate boundary weighting ((1 - theta) factors for reflection).
LedgerRow& entropy_and_energy(const PhaseGrid& grid, const std::vector<double>& f,
                              const TraceRecord& trace, const BoundaryCondition& bc,
                              BalanceLedger& ledger, double t, long picard_iters, double min_f);

struct ThirdMomentSeries {
    std::vector<double> times;
    std::vector<double> values;
    double time_integral = 0.0;
};

/// Per-snapshot third moments and their trapezoidal time integral.
ThirdMomentSeries third_moment_series(
    const PhaseGrid& grid, const std::vector<std::pair<double, std::vector<double>>>& history);

}  // namespace kfp
