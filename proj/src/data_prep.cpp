#include "kfp/data_prep.hpp"

#include <algorithm>
#include <cmath>

#include "kfp/diagnostics.hpp"
#include "kfp/moments.hpp"
#include "kfp/util.hpp"

namespace kfp {

std::vector<double> build_initial(const PhaseGrid& grid, const DatumSpec& spec) {
    const int d = grid.dim();
    const int ns = grid.spatial_cells();
    const int nv = grid.velocity_cells();
    std::vector<double> f(grid.phase_cells(), 0.0);

    auto fill_uniform = [&](const std::vector<double>& slice) {
        for (int is = 0; is < ns; ++is)
            for (int iv = 0; iv < nv; ++iv) f[grid.phase_index(is, iv)] = slice[iv];
    };
    auto inside = [&](const Vec& x) {
        for (int a = 0; a < d; ++a)
            if (x[a] < spec.x_min[a] || x[a] > spec.x_max[a]) return false;
        return true;
    };

    switch (spec.kind) {
        case DatumSpec::Kind::maxwellian: {
            fill_uniform(maxwellian(spec.rho, spec.u, spec.T, grid));
            break;
        }
        case DatumSpec::Kind::bimodal: {
            std::vector<double> slice = maxwellian(spec.rho, spec.u, spec.T, grid);
            const std::vector<double> second = maxwellian(spec.rho2, spec.u2, spec.T2, grid);
            for (int iv = 0; iv < nv; ++iv) slice[iv] += second[iv];
            fill_uniform(slice);
            break;
        }
        case DatumSpec::Kind::box: {
            require(spec.height >= 0.0, "datum: box height must be nonnegative");
            for (int is = 0; is < ns; ++is) {
                if (!inside(grid.x_at(is))) continue;
                for (int iv = 0; iv < nv; ++iv) {
                    const Vec& v = grid.v_at(iv);
                    bool in_v = true;
                    for (int a = 0; a < d; ++a)
                        if (std::abs(v[a]) > spec.v_bound) in_v = false;
                    if (in_v) f[grid.phase_index(is, iv)] = spec.height;
                }
            }
            break;
        }
        case DatumSpec::Kind::stripe: {
            // dense stripe over exact vacuum elsewhere
            const std::vector<double> slice = maxwellian(spec.rho, spec.u, spec.T, grid);
            for (int is = 0; is < ns; ++is) {
                if (!inside(grid.x_at(is))) continue;
                for (int iv = 0; iv < nv; ++iv) f[grid.phase_index(is, iv)] = slice[iv];
            }
            break;
        }
        case DatumSpec::Kind::heavy_tail: {
            require(spec.tail_exponent > 0.0, "datum: tail exponent must be positive");
            for (int is = 0; is < ns; ++is)
                for (int iv = 0; iv < nv; ++iv)
                    f[grid.phase_index(is, iv)] =
                        spec.height * std::pow(1.0 + grid.speed2_at(iv), -spec.tail_exponent);
            break;
        }
        case DatumSpec::Kind::tabulated: {
            require(spec.table.size() == grid.phase_cells(), "datum: table size does not match grid");
            f = spec.table;
            break;
        }
    }
    return f;
}

namespace {

inline double cap_value(double value, double speed2, double epsilon) {
    const double bound = 1.0 / epsilon;
    if (speed2 > bound * bound) return 0.0;
    return std::min(value, bound);
}

}  // namespace

std::vector<double> truncate_initial(const PhaseGrid& grid, const std::vector<double>& f0,
                                     double epsilon) {
    require(epsilon > 0.0 && epsilon <= 1.0, "truncate_initial: epsilon must lie in (0, 1]");
    check_runtime(f0.size() == grid.phase_cells(), "truncate_initial: field size does not match grid");
    std::vector<double> out(f0.size());
    for (int is = 0; is < grid.spatial_cells(); ++is)
        for (int iv = 0; iv < grid.velocity_cells(); ++iv) {
            const std::size_t idx = grid.phase_index(is, iv);
            out[idx] = cap_value(f0[idx], grid.speed2_at(iv), epsilon);
        }
    return out;
}

std::vector<double> truncate_boundary(const PhaseGrid& grid,
                                      const std::vector<BoundaryFace>& faces,
                                      const std::vector<double>& g, double epsilon) {
    require(epsilon > 0.0 && epsilon <= 1.0, "truncate_boundary: epsilon must lie in (0, 1]");
    const std::size_t nv = grid.velocity_cells();
    check_runtime(g.size() == faces.size() * nv, "truncate_boundary: table size mismatch");
    std::vector<double> out(g.size());
    for (const BoundaryFace& face : faces)
        for (std::size_t iv = 0; iv < nv; ++iv) {
            const std::size_t idx = face.id * nv + iv;
            out[idx] = cap_value(g[idx], grid.speed2_at(static_cast<int>(iv)), epsilon);
        }
    return out;
}

ConvergenceReport convergence_report(const PhaseGrid& grid, const std::vector<double>& f0,
                                     const std::vector<double>& epsilons) {
    require(epsilons.size() >= 2, "convergence_report: need at least two epsilons");
    for (std::size_t k = 1; k < epsilons.size(); ++k)
        require(epsilons[k] < epsilons[k - 1], "convergence_report: epsilons must decrease");

    const double energy0 = energy_functional(grid, f0);
    const double entropy0 = entropy_functional(grid, f0);
    ConvergenceReport report;
    for (double eps : epsilons) {
        const std::vector<double> fe = truncate_initial(grid, f0, eps);
        ConvergenceRow row;
        row.epsilon = eps;
        double l1 = 0.0;
        std::size_t altered = 0;
        for (std::size_t i = 0; i < f0.size(); ++i) {
            l1 += f0[i] - fe[i];  // truncation is pointwise below the input
            if (fe[i] != f0[i]) ++altered;
        }
        row.l1_gap = l1 * grid.cell_volume();
        row.energy_gap = energy0 - energy_functional(grid, fe);
        row.entropy_gap = std::abs(entropy0 - entropy_functional(grid, fe));
        row.cap_active_fraction = static_cast<double>(altered) / static_cast<double>(f0.size());
        report.rows.push_back(row);
    }
    for (std::size_t k = 1; k < report.rows.size(); ++k)
        if (report.rows[k].l1_gap > report.rows[k - 1].l1_gap) report.l1_monotone = false;
    return report;
}

FinitenessChecks check_datum(const PhaseGrid& grid, const std::vector<double>& f0) {
    FinitenessChecks c;
    bool nonneg = true, finite = true;
    for (double x : f0) {
        if (!std::isfinite(x)) finite = false;
        if (x < 0.0) nonneg = false;
    }
    c.mass = integrate_phase(grid, f0);
    c.energy = energy_functional(grid, f0);
    double alog = 0.0;  // integral of |f log f|
    for (int is = 0; is < grid.spatial_cells(); ++is)
        for (int iv = 0; iv < grid.velocity_cells(); ++iv) {
            const double fv = f0[grid.phase_index(is, iv)];
            if (fv > 1e-30) alog += std::abs(fv * std::log(fv));
        }
    c.abs_entropy = alog * grid.cell_volume();
    c.cutoff_fraction = cutoff_mass_fraction(grid, f0);
    c.ok = nonneg && finite && std::isfinite(c.mass) && std::isfinite(c.energy) &&
           std::isfinite(c.abs_entropy);
    return c;
}

}  // namespace kfp
