#include "kfp/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "kfp/util.hpp"

namespace kfp {

namespace {

/// Central difference along a velocity axis, one-sided at the cutoff.
double slice_gradient(const PhaseGrid& grid, const double* slice, int iv, int axis) {
    const auto m = grid.velocity_multi(iv);
    const int k = m[axis];
    const int n = grid.nv(axis);
    const double dva = grid.dv(axis);
    const int stride = (grid.dim() == 1 || axis == 1) ? 1 : grid.nv(1);
    const double* line = slice + iv - k * stride;
    if (k == 0) return (line[stride] - line[0]) / dva;
    if (k == n - 1) return (line[(n - 1) * stride] - line[(n - 2) * stride]) / dva;
    return (line[(k + 1) * stride] - line[(k - 1) * stride]) / (2.0 * dva);
}

}  // namespace

double entropy_functional(const PhaseGrid& grid, const std::vector<double>& f,
                          double positivity_floor) {
    const double vol = grid.cell_volume();
    double total = 0.0;
    for (int is = 0; is < grid.spatial_cells(); ++is) {
        const double* fc = f.data() + grid.phase_index(is, 0);
        double cell = 0.0;
        for (int iv = 0; iv < grid.velocity_cells(); ++iv)
            if (fc[iv] > positivity_floor) cell += fc[iv] * std::log(fc[iv]);
        total += cell;
    }
    return total * vol;
}

double energy_functional(const PhaseGrid& grid, const std::vector<double>& f) {
    return integrate_phase(grid, f, [&](const Vec&, const Vec& v) {
        return 1.0 + norm2(v, grid.dim());
    });
}

double dissipation_functional(const PhaseGrid& grid, const std::vector<double>& f,
                              const FluxCoeffs& coeffs, double positivity_floor) {
    check_runtime(f.size() == grid.phase_cells(), "dissipation: field size does not match grid");
    const int d = grid.dim();
    const double vol = grid.cell_volume();
    double total = 0.0;
    for (int is = 0; is < grid.spatial_cells(); ++is) {
        if (!coeffs.active[is]) continue;
        const double T = coeffs.temperature[is];
        const double nu = coeffs.nu[is];
        if (nu == 0.0 || T <= 0.0) continue;
        const double* fc = f.data() + grid.phase_index(is, 0);
        double cell = 0.0;
        for (int iv = 0; iv < grid.velocity_cells(); ++iv) {
            const double fv = fc[iv];
            if (fv <= positivity_floor) continue;
            const Vec drift = coeffs.drift(is, grid.v_at(iv));
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double r = T * slice_gradient(grid, fc, iv, a) + drift[a] * fv;
                r2 += r * r;
            }
            cell += r2 / (fv * T);
        }
        total += nu * cell;
    }
    return total * vol;
}

namespace {

template <class WeightAt>
double fisher_sum(const PhaseGrid& grid, const std::vector<double>& f, WeightAt weight) {
    check_runtime(f.size() == grid.phase_cells(), "fisher: field size does not match grid");
    const int d = grid.dim();
    const int nv = grid.velocity_cells();
    const double vol = grid.cell_volume();
    std::vector<double> sqrtf(nv);
    double total = 0.0;
    for (int is = 0; is < grid.spatial_cells(); ++is) {
        const double w = weight(is);
        if (w == 0.0) continue;
        const double* fc = f.data() + grid.phase_index(is, 0);
        for (int iv = 0; iv < nv; ++iv) sqrtf[iv] = std::sqrt(std::max(fc[iv], 0.0));
        double cell = 0.0;
        for (int iv = 0; iv < nv; ++iv)
            for (int a = 0; a < d; ++a) {
                const double g = slice_gradient(grid, sqrtf.data(), iv, a);
                cell += g * g;
            }
        total += w * cell;
    }
    return total * vol;
}

}  // namespace

double weighted_fisher(const PhaseGrid& grid, const std::vector<double>& f,
                       const FluxCoeffs& coeffs) {
    return fisher_sum(grid, f,
                      [&](int is) { return coeffs.nu[is] * coeffs.temperature[is]; });
}

double fisher_information(const PhaseGrid& grid, const std::vector<double>& f) {
    return fisher_sum(grid, f, [](int) { return 1.0; });
}

double third_moment(const PhaseGrid& grid, const std::vector<double>& f) {
    return integrate_phase(grid, f, [&](const Vec&, const Vec& v) {
        const double s = std::sqrt(norm2(v, grid.dim()));
        return s * s * s;
    });
}

double interior_entropy_source(const PhaseGrid& grid, const std::vector<double>& f,
                               const FluxCoeffs& coeffs) {
    const int d = grid.dim();
    const double vol = grid.cell_volume();
    double total = 0.0;
    for (int is = 0; is < grid.spatial_cells(); ++is) {
        const double nu = coeffs.nu[is];
        if (nu == 0.0) continue;
        const double* fc = f.data() + grid.phase_index(is, 0);
        double cell = 0.0;
        for (int iv = 0; iv < grid.velocity_cells(); ++iv) {
            const double div = coeffs.capped_drift
                                   ? div_renorm_v(grid.v_at(iv), d, coeffs.epsilon)
                                   : static_cast<double>(d);
            cell += fc[iv] * div;
        }
        total += nu * cell;
    }
    return total * vol;
}

double cutoff_mass_fraction(const PhaseGrid& grid, const std::vector<double>& f,
                            double fraction) {
    const int d = grid.dim();
    const double vol = grid.cell_volume();
    double total = 0.0, near = 0.0;
    for (int is = 0; is < grid.spatial_cells(); ++is) {
        const double* fc = f.data() + grid.phase_index(is, 0);
        for (int iv = 0; iv < grid.velocity_cells(); ++iv) {
            total += fc[iv];
            const Vec& v = grid.v_at(iv);
            bool close = false;
            for (int a = 0; a < d; ++a)
                if (std::abs(v[a]) > (1.0 - fraction) * grid.vmax(a)) close = true;
            if (close) near += fc[iv];
        }
    }
    if (total * vol <= 0.0) return 0.0;
    return near / total;
}

double variance_identity_check(const PhaseGrid& grid, const std::vector<double>& f,
                               const MacroFields& macro) {
    const int d = grid.dim();
    const double vvol = grid.velocity_cell_volume();
    double worst = 0.0;
    for (int is = 0; is < grid.spatial_cells(); ++is) {
        if (macro.rho[is] <= macro.rho_floor) continue;
        const Vec u = macro.u_at(is);
        const double* fc = f.data() + grid.phase_index(is, 0);
        double centered = 0.0;
        for (int iv = 0; iv < grid.velocity_cells(); ++iv) {
            const Vec& v = grid.v_at(iv);
            Vec w{v[0] - u[0], d > 1 ? v[1] - u[1] : 0.0};
            centered += fc[iv] * norm2(w, d);
        }
        centered *= vvol / d;
        // scale floor keeps round-off-zero cases (point masses) from reading as
        // order-one relative deviations
        const double ref =
            std::max({centered, macro.variance[is], 1e-12 * macro.e2[is], 1e-300});
        worst = std::max(worst, std::abs(centered - macro.variance[is]) / ref);
    }
    return worst;
}

double jensen_max_violation(const MacroFields& macro) {
    double worst = -1e308;
    for (std::size_t is = 0; is < macro.rho.size(); ++is) {
        const Vec u = macro.u_at(static_cast<int>(is));
        worst = std::max(worst, macro.rho[is] * norm2(u, macro.dim) - macro.e2[is]);
    }
    return worst;
}

namespace {

struct MollifierKernel {
    std::vector<int> kx, ky;
    std::vector<double> w;  // discretely normalized to unit mass
};

MollifierKernel build_kernel(const PhaseGrid& grid, double delta) {
    const int d = grid.dim();
    MollifierKernel ker;
    double mass = 0.0;
    const int kmx = static_cast<int>(std::ceil(delta / grid.dv(0)));
    const int kmy = d > 1 ? static_cast<int>(std::ceil(delta / grid.dv(1))) : 0;
    for (int ix = -kmx; ix <= kmx; ++ix) {
        for (int iy = -kmy; iy <= kmy; ++iy) {
            const double wx = ix * grid.dv(0);
            const double wy = d > 1 ? iy * grid.dv(1) : 0.0;
            const double r2 = (wx * wx + wy * wy) / (delta * delta);
            if (r2 >= 1.0) continue;
            const double val = (1.0 - r2) * (1.0 - r2);
            ker.kx.push_back(ix);
            ker.ky.push_back(iy);
            ker.w.push_back(val);
            mass += val;
        }
    }
    mass *= grid.velocity_cell_volume();
    for (double& x : ker.w) x /= mass;
    return ker;
}

}  // namespace

std::vector<double> mollify_slice(const PhaseGrid& grid, const double* slice, double delta) {
    const MollifierKernel ker = build_kernel(grid, delta);
    const int d = grid.dim();
    const int nvx = grid.nv(0);
    const int nvy = d > 1 ? grid.nv(1) : 1;
    std::vector<double> out(grid.velocity_cells(), 0.0);
    const double vvol = grid.velocity_cell_volume();
    for (int iv = 0; iv < grid.velocity_cells(); ++iv) {
        const auto m = grid.velocity_multi(iv);
        double acc = 0.0;
        for (std::size_t q = 0; q < ker.w.size(); ++q) {
            const int jx = std::clamp(m[0] - ker.kx[q], 0, nvx - 1);
            const int jy = d > 1 ? std::clamp(m[1] - ker.ky[q], 0, nvy - 1) : 0;
            acc += ker.w[q] * slice[grid.velocity_index(jx, jy)];
        }
        out[iv] = acc * vvol;
    }
    return out;
}

CompactnessProbe mollification_probe(const PhaseGrid& grid, const std::vector<double>& f,
                                     double delta, double tolerance, double rho_floor) {
    const int d = grid.dim();
    double dvmax = grid.dv(0);
    if (d > 1) dvmax = std::max(dvmax, grid.dv(1));
    require(delta >= 2.0 * dvmax, "mollification_probe: width below resolvable scale (need >= 2 dv)");

    CompactnessProbe probe;
    probe.delta = delta;
    probe.tolerance = tolerance;
    const int ns = grid.spatial_cells();
    const int nv = grid.velocity_cells();
    probe.lhs.assign(ns, 0.0);
    probe.mid.assign(ns, 0.0);
    probe.rhs.assign(ns, 0.0);
    probe.vacuum.assign(ns, 0);
    const double vvol = grid.velocity_cell_volume();
    std::vector<double> sqrtf(nv);
    for (int is = 0; is < ns; ++is) {
        const double* fc = f.data() + grid.phase_index(is, 0);
        double mass = 0.0;
        for (int iv = 0; iv < nv; ++iv) mass += fc[iv];
        mass *= vvol;
        if (mass <= rho_floor) {
            probe.vacuum[is] = 1;
            continue;
        }
        const std::vector<double> smooth = mollify_slice(grid, fc, delta);
        double lhs = 0.0, grad_l1 = 0.0, fisher = 0.0;
        for (int iv = 0; iv < nv; ++iv) sqrtf[iv] = std::sqrt(std::max(fc[iv], 0.0));
        for (int iv = 0; iv < nv; ++iv) {
            lhs += std::abs(fc[iv] - smooth[iv]);
            double g2 = 0.0, s2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double g = slice_gradient(grid, fc, iv, a);
                const double s = slice_gradient(grid, sqrtf.data(), iv, a);
                g2 += g * g;
                s2 += s * s;
            }
            grad_l1 += std::sqrt(g2);
            fisher += s2;
        }
        probe.lhs[is] = lhs * vvol;
        probe.mid[is] = delta * grad_l1 * vvol;
        probe.rhs[is] = 2.0 * delta * std::sqrt(mass) * std::sqrt(fisher * vvol);
        const double slack = 1.0 + tolerance;
        const double cushion = 1e-10 * mass;  // absorbs convolution round-off
        if (probe.lhs[is] > probe.mid[is] * slack + cushion ||
            probe.mid[is] > probe.rhs[is] * slack + cushion)
            probe.chain_holds = false;
        if (probe.mid[is] > 0.0)
            probe.max_lhs_over_mid = std::max(probe.max_lhs_over_mid, probe.lhs[is] / probe.mid[is]);
        if (probe.rhs[is] > 0.0)
            probe.max_mid_over_rhs = std::max(probe.max_mid_over_rhs, probe.mid[is] / probe.rhs[is]);
    }
    return probe;
}

void accumulate_interior(BalanceLedger& ledger, double dt, double dissipation, double fisher,
                         double m3, double source) {
    ledger.d_cum += dt * dissipation;
    ledger.fisher_cum += dt * fisher;
    ledger.m3_cum += dt * m3;
    ledger.source_cum += dt * source;
}

LedgerRow& entropy_and_energy(const PhaseGrid& grid, const std::vector<double>& f,
                              const TraceRecord& trace, const BoundaryCondition& bc,
                              BalanceLedger& ledger, double t, long picard_iters, double min_f) {
    LedgerRow row;
    row.t = t;
    row.mass = integrate_phase(grid, f);
    row.energy = energy_functional(grid, f);
    row.entropy = entropy_functional(grid, f);
    row.d_cum = ledger.d_cum;
    row.fisher_cum = ledger.fisher_cum;
    row.m3_cum = ledger.m3_cum;
    row.in_mass = trace.in_cum.mass;
    row.out_mass = trace.out_cum.mass;
    row.in_energy = trace.in_cum.energy;
    row.out_energy = trace.out_cum.energy;
    row.in_entropy = trace.in_cum.entropy;
    row.out_entropy = trace.out_cum.entropy;
    row.picard_iters = picard_iters;
    row.min_f = min_f;

    const bool reflect = bc.kind == BoundaryCondition::Kind::absorb_reflect;
    if (ledger.rows.empty()) {
        ledger.mass0 = row.mass;
        ledger.energy0 = row.energy;
        ledger.entropy0 = row.entropy;
    }
    if (reflect) {
        const double w = 1.0 - bc.theta;
        row.energy_slack = row.energy - ledger.energy0 + w * row.out_energy;
        row.entropy_slack =
            row.entropy - ledger.entropy0 + w * row.out_entropy + ledger.d_cum - ledger.source_cum;
    } else {
        row.energy_slack = row.energy - ledger.energy0 + row.out_energy - row.in_energy;
        row.entropy_slack = row.entropy - ledger.entropy0 + row.out_entropy - row.in_entropy +
                            ledger.d_cum - ledger.source_cum;
    }
    if (!ledger.rows.empty()) {
        ledger.max_energy_slack = std::max(ledger.max_energy_slack, row.energy_slack);
        ledger.max_entropy_slack = std::max(ledger.max_entropy_slack, row.entropy_slack);
    }
    ledger.rows.push_back(row);
    return ledger.rows.back();
}

ThirdMomentSeries third_moment_series(
    const PhaseGrid& grid, const std::vector<std::pair<double, std::vector<double>>>& history) {
    require(!history.empty(), "third_moment_series: empty history");
    ThirdMomentSeries s;
    for (const auto& [t, f] : history) {
        s.times.push_back(t);
        s.values.push_back(third_moment(grid, f));
    }
    for (std::size_t k = 1; k < s.times.size(); ++k)
        s.time_integral += 0.5 * (s.values[k] + s.values[k - 1]) * (s.times[k] - s.times[k - 1]);
    return s;
}

}  // namespace kfp
