#pragma once

#include <string>
#include <vector>

#include "kfp/grid.hpp"
#include "kfp/transport.hpp"

namespace kfp {

/// Initial-datum description. All presets are nonnegative with finite
/// discrete mass, energy, and f log f integral on the truncated grid.
struct DatumSpec {
    enum class Kind { maxwellian, bimodal, box, stripe, heavy_tail, tabulated };
    Kind kind = Kind::maxwellian;

    // maxwellian / bimodal components
    double rho = 1.0;
    Vec u{0.0, 0.0};
    double T = 1.0;
    double rho2 = 0.0;
    Vec u2{0.0, 0.0};
    double T2 = 1.0;

    // box / stripe geometry
    double height = 1.0;
    Vec x_min{0.0, 0.0}, x_max{1.0, 1.0};
    double v_bound = 1.0;  // box: |v_a| <= v_bound per axis

    // heavy tail f = height (1 + |v|^2)^(-p)
    double tail_exponent = 3.0;

    std::vector<double> table;  // tabulated values, phase layout
};

/// Samples the datum at cell centers.
std::vector<double> build_initial(const PhaseGrid& grid, const DatumSpec& spec);

/// Height cap at 1/eps combined with the velocity-ball cut |v| <= 1/eps.
/// Pointwise below the input, nondecreasing as eps decreases; bitwise equal
/// to the input when the cap is inactive.
std::vector<double> truncate_initial(const PhaseGrid& grid, const std::vector<double>& f0,
                                     double epsilon);

/// Same cap applied to a boundary table (faces x velocity cells layout).
std::vector<double> truncate_boundary(const PhaseGrid& grid,
                                      const std::vector<BoundaryFace>& faces,
                                      const std::vector<double>& g, double epsilon);

struct ConvergenceRow {
    double epsilon = 0.0;
    double l1_gap = 0.0;
    double energy_gap = 0.0;
    double entropy_gap = 0.0;
    double cap_active_fraction = 0.0;  // cells altered by the cap
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;  // one per epsilon, in the given order
    bool l1_monotone = true;           // nonincreasing L1 gap over decreasing eps
};

/// Truncation-gap table over a decreasing epsilon list (at least two).
/// A non-monotone L1 column flags a grid too coarse to resolve the cap.
ConvergenceReport convergence_report(const PhaseGrid& grid, const std::vector<double>& f0,
                                     const std::vector<double>& epsilons);

struct FinitenessChecks {
    double mass = 0.0;
    double energy = 0.0;
    double abs_entropy = 0.0;  // integral of |f log f|
    double cutoff_fraction = 0.0;
    bool ok = false;
};

/// Verifies nonnegativity and finite mass/energy/|f log f| before a run.
FinitenessChecks check_datum(const PhaseGrid& grid, const std::vector<double>& f0);

}  // namespace kfp
