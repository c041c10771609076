#pragma once

#include <vector>

#include "kfp/grid.hpp"

namespace kfp {

/// Macroscopic fields per spatial cell. Vacuum convention: where
/// rho <= rho_floor, bulk velocity and temperature are zero.
struct MacroFields {
    int dim = 1;
    double rho_floor = 0.0;
    std::vector<double> rho;          // density
    std::vector<double> momentum;     // j, dim components per cell (axis-major per cell)
    std::vector<double> e2;           // second moment of |v|
    std::vector<double> velocity;     // u, dim components per cell
    std::vector<double> variance;     // V = rho * T
    std::vector<double> temperature;  // T
    double max_variance_clamp = 0.0;  // largest negative round-off clamped away

    Vec j_at(int is) const { return {momentum[2 * is], momentum[2 * is + 1]}; }
    Vec u_at(int is) const { return {velocity[2 * is], velocity[2 * is + 1]}; }
};

/// Saturating cap r / (eps1 + eps2 (1 + r)) for nonnegative scalars.
double renorm_scalar(double r, double eps1, double eps2);

/// Vector version r / (eps1 + eps2 (1 + |r|)); preserves direction.
Vec renorm_vector(const Vec& r, int dim, double eps1, double eps2);

/// Divergence of the capped velocity field v / (1 + eps (1 + |v|)):
/// (d + eps d + eps (d-1) |v|) / (1 + eps (1 + |v|))^2. Bounded by d.
double div_renorm_v(const Vec& v, int dim, double epsilon);

MacroFields compute_moments(const PhaseGrid& grid, const std::vector<double>& f,
                            double rho_floor);

/// Capped temperature and bulk velocity fields for a given epsilon:
///   T_reg = V / (rho + eps (1 + V)) + eps,   u_reg = j / (rho + eps (1 + |j|)).
/// Satisfies eps <= T_reg <= min(T + eps, 1/eps + eps) and |u_reg| <= min(|u|, 1/eps).
struct RegularizedFields {
    double epsilon = 0.0;
    std::vector<double> temperature;
    std::vector<double> velocity;  // dim components per cell

    Vec u_at(int is) const { return {velocity[2 * is], velocity[2 * is + 1]}; }
};

RegularizedFields regularize_fields(const MacroFields& m, double epsilon);

/// Gaussian rho / (2 pi T)^(d/2) exp(-|v-u|^2 / 2T) sampled at velocity cell
/// centers. rho = 0 returns the zero field; rho > 0 requires T > 0.
std::vector<double> maxwellian(double rho, const Vec& u, double T, const PhaseGrid& grid);

/// Default vacuum threshold: 1e-12 * (total mass / |Omega|).
double default_rho_floor(const PhaseGrid& grid, const std::vector<double>& f);

}  // namespace kfp
