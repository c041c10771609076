#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kfp/grid.hpp"
#include "kfp/moments.hpp"

namespace kfp {

/// Bounded nonnegative collision frequency nu(rho, j, V). Every model declares
/// its supremum explicitly; registration without one is rejected.
class CollisionFrequencyModel {
public:
    enum class Kind { constant, density_saturating, power_saturating, tabulated };

    static CollisionFrequencyModel constant(double nu0);
    static CollisionFrequencyModel density_saturating();
    /// rho^alpha T^beta / (1 + rho^alpha T^beta) with T = V / rho.
    /// Vanishes on the degenerate set T = 0 when beta > 0.
    static CollisionFrequencyModel power_saturating(double alpha, double beta);
    /// Piecewise-linear nu(rho) through (rho_k, nu_k); supremum must be declared.
    static CollisionFrequencyModel tabulated(std::vector<double> rho_points,
                                             std::vector<double> nu_values,
                                             std::optional<double> declared_sup);

    double evaluate(double rho, const Vec& j, double V, int dim) const;
    double supremum() const { return sup_; }
    bool positive_at_vacuum() const { return positive_at_vacuum_; }
    Kind kind() const { return kind_; }

private:
    CollisionFrequencyModel() = default;
    Kind kind_ = Kind::constant;
    double nu0_ = 1.0;
    double alpha_ = 0.0;
    double beta_ = 0.0;
    double sup_ = 1.0;
    bool positive_at_vacuum_ = true;
    std::vector<double> table_rho_;
    std::vector<double> table_nu_;
};

enum class TimeScheme { trapezoidal, backward_euler };

struct CollisionOptions {
    TimeScheme scheme = TimeScheme::trapezoidal;
    bool unregularized_drift = false;  // replace the capped drift velocity by raw v
    int workers = 1;
};

struct CollisionStepReport {
    double max_mass_rel_change = 0.0;  // max over spatial cells, relative
    double min_value = 0.0;            // min of the post-step state
    long solves = 0;                   // tridiagonal solves performed
    long euler_fallbacks = 0;          // trapezoidal solves demoted for positivity
};

/// One implicit velocity-space step of
///   (nu + eps) div_v ( T_reg grad_v f + (cap(v) - u_reg) f )
/// per spatial cell, in conservative flux form with exponential-fitting
/// (Chang--Cooper) drift weights and zero flux at |v| = Vmax. Preserves
/// nonnegativity and cellwise mass; the scheme's discrete equilibrium is an
/// exact fixed point. d = 2 uses alternating-direction sweeps.
CollisionStepReport collision_step(const PhaseGrid& grid, std::vector<double>& f,
                                   const MacroFields& macro, const RegularizedFields& reg,
                                   const CollisionFrequencyModel& model, double dt,
                                   double epsilon, const CollisionOptions& options = {});

/// Coefficient set for flux-residual style diagnostics: either the capped
/// coefficients the solver uses, or the raw (unregularized) ones.
struct FluxCoeffs {
    int dim = 1;
    double epsilon = 0.0;      // cap parameter when capped_drift
    bool capped_drift = true;  // drift cap(v) - u vs raw v - u
    std::vector<double> nu;    // per-cell frequency weight (nu + eps or nu)
    std::vector<double> temperature;
    std::vector<double> velocity;  // 2 per cell
    std::vector<char> active;      // rho above the vacuum floor

    Vec drift(int is, const Vec& v) const {
        Vec c = capped_drift ? renorm_vector(v, dim, 1.0, epsilon) : v;
        c[0] -= velocity[2 * is];
        c[1] -= velocity[2 * is + 1];
        return c;
    }
};

FluxCoeffs regularized_coeffs(const MacroFields& macro, const RegularizedFields& reg,
                              const CollisionFrequencyModel& model, double epsilon,
                              bool unregularized_drift = false);
FluxCoeffs raw_coeffs(const MacroFields& macro, const CollisionFrequencyModel& model);

/// Pointwise flux residual T grad_v f + (drift) f per velocity axis, central
/// differences (one-sided at the cutoff). Layout: r[axis * phase + idx].
/// Cells flagged inactive (vacuum) return zero.
std::vector<double> collision_flux_residual(const PhaseGrid& grid, const std::vector<double>& f,
                                            const FluxCoeffs& coeffs);

/// Exact discrete equilibrium of the Chang--Cooper fluxes for the given
/// coefficients, normalized to the target density. In d = 2 the potential is
/// accumulated along axis paths (exact in d = 1).
std::vector<double> discrete_equilibrium(const PhaseGrid& grid, double rho, const Vec& u,
                                         double T, double epsilon, bool capped_drift);

}  // namespace kfp
