#include "kfp/moments.hpp"

#include <algorithm>
#include <cmath>

namespace kfp {

double renorm_scalar(double r, double eps1, double eps2) {
    require(r >= 0.0, "renorm_scalar: negative input");
    require(std::isfinite(r), "renorm_scalar: non-finite input");
    if (r == 0.0) return 0.0;
    return r / (eps1 + eps2 * (1.0 + r));
}

Vec renorm_vector(const Vec& r, int dim, double eps1, double eps2) {
    const double mag = std::sqrt(norm2(r, dim));
    require(std::isfinite(mag), "renorm_vector: non-finite input");
    const double denom = eps1 + eps2 * (1.0 + mag);
    Vec out{r[0] / denom, dim > 1 ? r[1] / denom : 0.0};
    return out;
}

double div_renorm_v(const Vec& v, int dim, double epsilon) {
    const double mag = std::sqrt(norm2(v, dim));
    const double denom = 1.0 + epsilon * (1.0 + mag);
    return (dim + epsilon * dim + epsilon * (dim - 1) * mag) / (denom * denom);
}

MacroFields compute_moments(const PhaseGrid& grid, const std::vector<double>& f,
                            double rho_floor) {
    check_runtime(f.size() == grid.phase_cells(), "compute_moments: field size does not match grid");

    double max_f = 0.0;
    for (double x : f) max_f = std::max(max_f, x);
    const double neg_tol = -1e-14 * max_f;
    for (double x : f)
        check_runtime(x >= neg_tol, "compute_moments: corrupted state (negative density beyond round-off)");

    const int d = grid.dim();
    const int ns = grid.spatial_cells();
    const int nv = grid.velocity_cells();
    const double vvol = grid.velocity_cell_volume();

    MacroFields m;
    m.dim = d;
    m.rho_floor = rho_floor;
    m.rho.assign(ns, 0.0);
    m.momentum.assign(2 * ns, 0.0);
    m.e2.assign(ns, 0.0);
    m.velocity.assign(2 * ns, 0.0);
    m.variance.assign(ns, 0.0);
    m.temperature.assign(ns, 0.0);

    for (int is = 0; is < ns; ++is) {
        double rho = 0.0, jx = 0.0, jy = 0.0, e2 = 0.0;
        const std::size_t base = grid.phase_index(is, 0);
        for (int iv = 0; iv < nv; ++iv) {
            const double fv = f[base + iv];
            const Vec& v = grid.v_at(iv);
            rho += fv;
            jx += fv * v[0];
            jy += fv * v[1];
            e2 += fv * grid.speed2_at(iv);
        }
        rho *= vvol;
        jx *= vvol;
        jy *= vvol;
        e2 *= vvol;
        m.rho[is] = rho;
        m.e2[is] = e2;
        if (rho <= rho_floor) {
            // vacuum cell: u = T = V = 0, momentum kept as computed (round-off scale)
            m.momentum[2 * is] = jx;
            m.momentum[2 * is + 1] = jy;
            continue;
        }
        m.momentum[2 * is] = jx;
        m.momentum[2 * is + 1] = jy;
        m.velocity[2 * is] = jx / rho;
        m.velocity[2 * is + 1] = d > 1 ? jy / rho : 0.0;
        const double j2 = jx * jx + (d > 1 ? jy * jy : 0.0);
        double V = (e2 - j2 / rho) / d;
        if (V < 0.0) {
            m.max_variance_clamp = std::max(m.max_variance_clamp, -V);
            V = 0.0;
        }
        m.variance[is] = V;
        m.temperature[is] = V / rho;
    }
    return m;
}

RegularizedFields regularize_fields(const MacroFields& m, double epsilon) {
    require(epsilon > 0.0 && epsilon <= 1.0, "regularize_fields: epsilon must lie in (0, 1]");
    const int ns = static_cast<int>(m.rho.size());
    RegularizedFields r;
    r.epsilon = epsilon;
    r.temperature.assign(ns, 0.0);
    r.velocity.assign(2 * ns, 0.0);
    for (int is = 0; is < ns; ++is) {
        const double rho = m.rho[is];
        r.temperature[is] = renorm_scalar(m.variance[is], rho, epsilon) + epsilon;
        const Vec j = m.j_at(is);
        const Vec u = renorm_vector(j, m.dim, rho, epsilon);
        r.velocity[2 * is] = u[0];
        r.velocity[2 * is + 1] = u[1];
    }
    return r;
}

std::vector<double> maxwellian(double rho, const Vec& u, double T, const PhaseGrid& grid) {
    require(rho >= 0.0, "maxwellian: negative density");
    std::vector<double> out(grid.velocity_cells(), 0.0);
    if (rho == 0.0) return out;
    require(T > 0.0, "maxwellian: positive density requires positive temperature");
    const int d = grid.dim();
    const double norm = rho / std::pow(2.0 * M_PI * T, 0.5 * d);
    for (int iv = 0; iv < grid.velocity_cells(); ++iv) {
        const Vec& v = grid.v_at(iv);
        Vec w{v[0] - u[0], d > 1 ? v[1] - u[1] : 0.0};
        out[iv] = norm * std::exp(-0.5 * norm2(w, d) / T);
    }
    return out;
}

double default_rho_floor(const PhaseGrid& grid, const std::vector<double>& f) {
    const double mass = integrate_phase(grid, f);
    return 1e-12 * mass / grid.domain_volume();
}

}  // namespace kfp
