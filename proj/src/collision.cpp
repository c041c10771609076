#include "kfp/collision.hpp"

#include <algorithm>
#include <cmath>

#include "kfp/util.hpp"

namespace kfp {

CollisionFrequencyModel CollisionFrequencyModel::constant(double nu0) {
    require(std::isfinite(nu0) && nu0 > 0.0, "collision model: constant frequency must be positive");
    CollisionFrequencyModel m;
    m.kind_ = Kind::constant;
    m.nu0_ = nu0;
    m.sup_ = nu0;
    m.positive_at_vacuum_ = true;
    return m;
}

CollisionFrequencyModel CollisionFrequencyModel::density_saturating() {
    CollisionFrequencyModel m;
    m.kind_ = Kind::density_saturating;
    m.sup_ = 1.0;
    m.positive_at_vacuum_ = false;
    return m;
}

CollisionFrequencyModel CollisionFrequencyModel::power_saturating(double alpha, double beta) {
    require(alpha >= 0.0 && beta >= 0.0, "collision model: exponents must be nonnegative");
    require(alpha > 0.0 || beta > 0.0, "collision model: power model needs a positive exponent");
    CollisionFrequencyModel m;
    m.kind_ = Kind::power_saturating;
    m.alpha_ = alpha;
    m.beta_ = beta;
    m.sup_ = 1.0;
    m.positive_at_vacuum_ = false;
    return m;
}

CollisionFrequencyModel CollisionFrequencyModel::tabulated(std::vector<double> rho_points,
                                                           std::vector<double> nu_values,
                                                           std::optional<double> declared_sup) {
    require(declared_sup.has_value(),
            "collision model: tabulated frequency requires an explicitly declared supremum");
    require(rho_points.size() == nu_values.size() && rho_points.size() >= 2,
            "collision model: table needs at least two points");
    require(rho_points.front() == 0.0, "collision model: table must start at rho = 0");
    for (std::size_t k = 0; k < rho_points.size(); ++k) {
        require(std::isfinite(rho_points[k]) && std::isfinite(nu_values[k]),
                "collision model: non-finite table entry");
        require(nu_values[k] >= 0.0 && nu_values[k] <= *declared_sup,
                "collision model: table value outside [0, declared supremum]");
        if (k > 0)
            require(rho_points[k] > rho_points[k - 1], "collision model: table abscissae must increase");
    }
    bool zero_at_vacuum = nu_values.front() == 0.0;
    if (zero_at_vacuum)
        for (std::size_t k = 1; k < nu_values.size(); ++k)
            require(nu_values[k] > 0.0,
                    "collision model: table vanishing at rho = 0 must be positive elsewhere");
    CollisionFrequencyModel m;
    m.kind_ = Kind::tabulated;
    m.sup_ = *declared_sup;
    m.positive_at_vacuum_ = !zero_at_vacuum;
    m.table_rho_ = std::move(rho_points);
    m.table_nu_ = std::move(nu_values);
    return m;
}

double CollisionFrequencyModel::evaluate(double rho, const Vec& j, double V, int dim) const {
    require(std::isfinite(rho) && std::isfinite(V) && std::isfinite(j[0]) && std::isfinite(j[1]),
            "collision frequency: non-finite input");
    require(rho >= 0.0 && V >= 0.0, "collision frequency: rho and V must be nonnegative");
    (void)dim;
    switch (kind_) {
        case Kind::constant:
            return nu0_;
        case Kind::density_saturating:
            return rho / (1.0 + rho);
        case Kind::power_saturating: {
            if (rho == 0.0) return 0.0;
            const double T = V / rho;
            if (T == 0.0 && beta_ > 0.0) return 0.0;
            const double p = std::pow(rho, alpha_) * (beta_ > 0.0 ? std::pow(T, beta_) : 1.0);
            return p / (1.0 + p);
        }
        case Kind::tabulated: {
            if (rho >= table_rho_.back()) return table_nu_.back();
            std::size_t hi = 1;
            while (table_rho_[hi] < rho) ++hi;
            const double t = (rho - table_rho_[hi - 1]) / (table_rho_[hi] - table_rho_[hi - 1]);
            return table_nu_[hi - 1] + t * (table_nu_[hi] - table_nu_[hi - 1]);
        }
    }
    return 0.0;
}

namespace {

/// w / (e^w - 1), the exponential-fitting weight; g(0) = 1.
double bern(double w) {
    if (std::abs(w) < 1e-5) return 1.0 - 0.5 * w + w * w / 12.0;
    const double e = std::expm1(w);
    if (!std::isfinite(e)) return w > 0.0 ? 0.0 : -w;
    return w / e;
}

/// Tridiagonal conservative operator for one velocity line:
/// (L f)_i = (F_{i+1/2} - F_{i-1/2}) / dv with the Chang--Cooper flux
/// F_{k+1/2} = (T/dv) [ (w_k + g_k) f_{k+1} - g_k f_k ],  w_k = c_k dv / T.
/// Column sums vanish (mass conservation); off-diagonals are nonnegative.
struct LineOperator {
    std::vector<double> sub, diag, super;  // L_{i,i-1}, L_{i,i}, L_{i,i+1}
    double max_diag_mag = 0.0;

    template <class DriftAtInterface>
    void assemble(int n, double dv, double T, DriftAtInterface c_at) {
        sub.assign(n, 0.0);
        diag.assign(n, 0.0);
        super.assign(n, 0.0);
        const double scale = T / (dv * dv);
        for (int k = 0; k + 1 < n; ++k) {
            const double w = c_at(k) * dv / T;
            const double g = bern(w);
            super[k] = scale * (w + g);
            diag[k] -= scale * g;
            diag[k + 1] -= scale * (w + g);
            sub[k + 1] = scale * g;
        }
        max_diag_mag = 0.0;
        for (int i = 0; i < n; ++i) max_diag_mag = std::max(max_diag_mag, -diag[i]);
    }

    // y = (I + a L) x
    void apply_shifted(double a, const double* x, double* y, int n, int stride) const {
        for (int i = 0; i < n; ++i) {
            double v = (1.0 + a * diag[i]) * x[i * stride];
            if (i > 0) v += a * sub[i] * x[(i - 1) * stride];
            if (i + 1 < n) v += a * super[i] * x[(i + 1) * stride];
            y[i] = v;
        }
    }

    // solve (I - a L) out = rhs (Thomas); out may have a stride, rhs is contiguous
    void solve_shifted(double a, const double* rhs, double* out, int n, int stride,
                       std::vector<double>& cw, std::vector<double>& dw) const {
        cw.resize(n);
        dw.resize(n);
        double b0 = 1.0 - a * diag[0];
        cw[0] = -a * super[0] / b0;
        dw[0] = rhs[0] / b0;
        for (int i = 1; i < n; ++i) {
            const double ai = -a * sub[i];
            const double bi = 1.0 - a * diag[i];
            const double m = bi - ai * cw[i - 1];
            check_runtime(m != 0.0 && std::isfinite(m), "collision: tridiagonal solve broke down");
            cw[i] = (i + 1 < n ? -a * super[i] : 0.0) / m;
            dw[i] = (rhs[i] - ai * dw[i - 1]) / m;
        }
        out[(n - 1) * stride] = dw[n - 1];
        for (int i = n - 2; i >= 0; --i) out[i * stride] = dw[i] - cw[i] * out[(i + 1) * stride];
    }
};

struct CellWork {
    LineOperator op;
    std::vector<double> rhs, tmp, cw, dw;
};

double cap_component(double vcomp, double speed, double epsilon, bool capped) {
    return capped ? vcomp / (1.0 + epsilon * (1.0 + speed)) : vcomp;
}

}  // namespace

CollisionStepReport collision_step(const PhaseGrid& grid, std::vector<double>& f,
                                   const MacroFields& macro, const RegularizedFields& reg,
                                   const CollisionFrequencyModel& model, double dt,
                                   double epsilon, const CollisionOptions& options) {
    require(dt > 0.0, "collision_step: dt must be positive");
    check_runtime(f.size() == grid.phase_cells(), "collision_step: field size does not match grid");
    const int d = grid.dim();
    const int ns = grid.spatial_cells();
    const int nv = grid.velocity_cells();
    const bool capped = !options.unregularized_drift;

    std::vector<double> mass_change(ns, 0.0);
    std::vector<long> fallbacks(ns, 0);
    std::vector<long> solves(ns, 0);

    parallel_for(static_cast<std::size_t>(ns), options.workers, [&](std::size_t lo, std::size_t hi) {
        CellWork work;
        for (std::size_t isz = lo; isz < hi; ++isz) {
            const int is = static_cast<int>(isz);
            const double nu =
                model.evaluate(macro.rho[is], macro.j_at(is), macro.variance[is], d);
            const double nueff = nu + epsilon;
            if (nueff == 0.0) continue;
            const double T = reg.temperature[is];
            check_runtime(T > 0.0, "collision_step: nonpositive diffusion coefficient");
            const Vec u = reg.u_at(is);
            const double dt_eff = dt * nueff;
            double* fc = f.data() + grid.phase_index(is, 0);

            double mass_before = 0.0;
            for (int iv = 0; iv < nv; ++iv) mass_before += fc[iv];

            if (d == 1) {
                const int n = grid.nv(0);
                const double dv = grid.dv(0);
                work.op.assemble(n, dv, T, [&](int k) {
                    const double vm = grid.v_interface(0, k);
                    return cap_component(vm, std::abs(vm), epsilon, capped) - u[0];
                });
                bool trapezoid = options.scheme == TimeScheme::trapezoidal &&
                                 0.5 * dt_eff * work.op.max_diag_mag <= 1.0;
                if (options.scheme == TimeScheme::trapezoidal && !trapezoid) ++fallbacks[is];
                work.rhs.resize(n);
                if (trapezoid) {
                    work.op.apply_shifted(0.5 * dt_eff, fc, work.rhs.data(), n, 1);
                    work.op.solve_shifted(0.5 * dt_eff, work.rhs.data(), fc, n, 1, work.cw, work.dw);
                } else {
                    std::copy(fc, fc + n, work.rhs.begin());
                    work.op.solve_shifted(dt_eff, work.rhs.data(), fc, n, 1, work.cw, work.dw);
                }
                ++solves[is];
            } else {
                const int nx = grid.nv(0), ny = grid.nv(1);
                const double dvx = grid.dv(0), dvy = grid.dv(1);
                // positivity check across all line operators of this cell
                bool trapezoid = options.scheme == TimeScheme::trapezoidal;
                if (trapezoid) {
                    double maxdiag = 0.0;
                    for (int jy = 0; jy < ny && trapezoid; ++jy) {
                        const double vy = grid.v_center(1, jy);
                        work.op.assemble(nx, dvx, T, [&](int k) {
                            const double vm = grid.v_interface(0, k);
                            return cap_component(vm, std::hypot(vm, vy), epsilon, capped) - u[0];
                        });
                        maxdiag = std::max(maxdiag, work.op.max_diag_mag);
                    }
                    for (int jx = 0; jx < nx && trapezoid; ++jx) {
                        const double vx = grid.v_center(0, jx);
                        work.op.assemble(ny, dvy, T, [&](int k) {
                            const double vm = grid.v_interface(1, k);
                            return cap_component(vm, std::hypot(vx, vm), epsilon, capped) - u[1];
                        });
                        maxdiag = std::max(maxdiag, work.op.max_diag_mag);
                    }
                    if (0.5 * dt_eff * maxdiag > 1.0) {
                        trapezoid = false;
                        ++fallbacks[is];
                    }
                }
                work.tmp.assign(static_cast<std::size_t>(nx) * ny, 0.0);
                work.rhs.resize(std::max(nx, ny));
                const double a = trapezoid ? 0.5 * dt_eff : dt_eff;
                // stage 1: y-explicit (trapezoidal only), then x-implicit line solves
                for (int jx = 0; jx < nx; ++jx) {
                    const double vx = grid.v_center(0, jx);
                    if (trapezoid) {
                        work.op.assemble(ny, dvy, T, [&](int k) {
                            const double vm = grid.v_interface(1, k);
                            return cap_component(vm, std::hypot(vx, vm), epsilon, capped) - u[1];
                        });
                        work.op.apply_shifted(a, fc + grid.velocity_index(jx, 0),
                                              work.tmp.data() + grid.velocity_index(jx, 0), ny, 1);
                    } else {
                        std::copy(fc + grid.velocity_index(jx, 0), fc + grid.velocity_index(jx, 0) + ny,
                                  work.tmp.begin() + grid.velocity_index(jx, 0));
                    }
                }
                for (int jy = 0; jy < ny; ++jy) {
                    const double vy = grid.v_center(1, jy);
                    work.op.assemble(nx, dvx, T, [&](int k) {
                        const double vm = grid.v_interface(0, k);
                        return cap_component(vm, std::hypot(vm, vy), epsilon, capped) - u[0];
                    });
                    for (int k = 0; k < nx; ++k) work.rhs[k] = work.tmp[grid.velocity_index(k, jy)];
                    work.op.solve_shifted(a, work.rhs.data(), work.tmp.data() + grid.velocity_index(0, jy),
                                          nx, ny, work.cw, work.dw);
                    ++solves[is];
                }
                // stage 2: x-explicit (trapezoidal only), then y-implicit line solves
                std::vector<double> col(nx);
                for (int jy = 0; jy < ny; ++jy) {
                    const double vy = grid.v_center(1, jy);
                    if (trapezoid) {
                        work.op.assemble(nx, dvx, T, [&](int k) {
                            const double vm = grid.v_interface(0, k);
                            return cap_component(vm, std::hypot(vm, vy), epsilon, capped) - u[0];
                        });
                        for (int k = 0; k < nx; ++k) work.rhs[k] = work.tmp[grid.velocity_index(k, jy)];
                        work.op.apply_shifted(a, work.rhs.data(), col.data(), nx, 1);
                        for (int k = 0; k < nx; ++k) fc[grid.velocity_index(k, jy)] = col[k];
                    } else {
                        for (int k = 0; k < nx; ++k)
                            fc[grid.velocity_index(k, jy)] = work.tmp[grid.velocity_index(k, jy)];
                    }
                }
                for (int jx = 0; jx < nx; ++jx) {
                    const double vx = grid.v_center(0, jx);
                    work.op.assemble(ny, dvy, T, [&](int k) {
                        const double vm = grid.v_interface(1, k);
                        return cap_component(vm, std::hypot(vx, vm), epsilon, capped) - u[1];
                    });
                    std::copy(fc + grid.velocity_index(jx, 0), fc + grid.velocity_index(jx, 0) + ny,
                              work.rhs.begin());
                    work.op.solve_shifted(a, work.rhs.data(), fc + grid.velocity_index(jx, 0), ny, 1,
                                          work.cw, work.dw);
                    ++solves[is];
                }
            }

            double mass_after = 0.0;
            for (int iv = 0; iv < nv; ++iv) mass_after += fc[iv];
            const double scale = std::max(std::abs(mass_before), 1e-300);
            mass_change[is] = std::abs(mass_after - mass_before) / scale;
        }
    });

    CollisionStepReport report;
    double min_value = 0.0, max_value = 0.0;
    for (double x : f) {
        min_value = std::min(min_value, x);
        max_value = std::max(max_value, x);
    }
    for (int is = 0; is < ns; ++is) {
        report.max_mass_rel_change = std::max(report.max_mass_rel_change, mass_change[is]);
        report.euler_fallbacks += fallbacks[is];
        report.solves += solves[is];
    }
    report.min_value = min_value;
    check_runtime(min_value >= -1e-14 * std::max(max_value, 1e-300),
                  "collision_step: negative state beyond round-off scale");
    return report;
}

FluxCoeffs regularized_coeffs(const MacroFields& macro, const RegularizedFields& reg,
                              const CollisionFrequencyModel& model, double epsilon,
                              bool unregularized_drift) {
    const int ns = static_cast<int>(macro.rho.size());
    FluxCoeffs c;
    c.dim = macro.dim;
    c.epsilon = epsilon;
    c.capped_drift = !unregularized_drift;
    c.nu.resize(ns);
    c.temperature = reg.temperature;
    c.velocity = reg.velocity;
    c.active.assign(ns, 1);
    for (int is = 0; is < ns; ++is)
        c.nu[is] = model.evaluate(macro.rho[is], macro.j_at(is), macro.variance[is], macro.dim) + epsilon;
    return c;
}

FluxCoeffs raw_coeffs(const MacroFields& macro, const CollisionFrequencyModel& model) {
    const int ns = static_cast<int>(macro.rho.size());
    FluxCoeffs c;
    c.dim = macro.dim;
    c.epsilon = 0.0;
    c.capped_drift = false;
    c.nu.resize(ns);
    c.temperature = macro.temperature;
    c.velocity = macro.velocity;
    c.active.assign(ns, 1);
    for (int is = 0; is < ns; ++is) {
        c.nu[is] = model.evaluate(macro.rho[is], macro.j_at(is), macro.variance[is], macro.dim);
        if (macro.rho[is] <= macro.rho_floor) c.active[is] = 0;
    }
    return c;
}

std::vector<double> collision_flux_residual(const PhaseGrid& grid, const std::vector<double>& f,
                                            const FluxCoeffs& coeffs) {
    check_runtime(f.size() == grid.phase_cells(), "flux residual: field size does not match grid");
    const int d = grid.dim();
    const std::size_t phase = grid.phase_cells();
    std::vector<double> r(static_cast<std::size_t>(d) * phase, 0.0);
    for (int is = 0; is < grid.spatial_cells(); ++is) {
        if (!coeffs.active[is]) continue;
        const double T = coeffs.temperature[is];
        const double* fc = f.data() + grid.phase_index(is, 0);
        for (int iv = 0; iv < grid.velocity_cells(); ++iv) {
            const Vec drift = coeffs.drift(is, grid.v_at(iv));
            auto m = grid.velocity_multi(iv);
            for (int a = 0; a < d; ++a) {
                const int n = grid.nv(a);
                const double dva = grid.dv(a);
                const int k = m[a];
                double grad;
                const int stride = (d == 1 || a == 1) ? 1 : grid.nv(1);
                const double* line = fc + iv - k * stride;
                if (k == 0)
                    grad = (line[stride] - line[0]) / dva;
                else if (k == n - 1)
                    grad = (line[(n - 1) * stride] - line[(n - 2) * stride]) / dva;
                else
                    grad = (line[(k + 1) * stride] - line[(k - 1) * stride]) / (2.0 * dva);
                r[static_cast<std::size_t>(a) * phase + grid.phase_index(is, iv)] =
                    T * grad + drift[a] * fc[iv];
            }
        }
    }
    return r;
}

std::vector<double> discrete_equilibrium(const PhaseGrid& grid, double rho, const Vec& u,
                                         double T, double epsilon, bool capped_drift) {
    require(T > 0.0, "discrete_equilibrium: temperature must be positive");
    const int d = grid.dim();
    std::vector<double> g(grid.velocity_cells(), 0.0);
    auto wx = [&](int axis, int k, double other) {
        const double vm = grid.v_interface(axis, k);
        const double speed = d == 1 ? std::abs(vm) : (axis == 0 ? std::hypot(vm, other) : std::hypot(other, vm));
        const double c = cap_component(vm, speed, capped_drift ? epsilon : 0.0, capped_drift) - u[axis];
        return c * grid.dv(axis) / T;
    };
    if (d == 1) {
        const int n = grid.nv(0);
        std::vector<double> phi(n, 0.0);
        for (int k = 0; k + 1 < n; ++k) phi[k + 1] = phi[k] + wx(0, k, 0.0);
        const double phimin = *std::min_element(phi.begin(), phi.end());
        for (int k = 0; k < n; ++k) g[k] = std::exp(-(phi[k] - phimin));
    } else {
        const int nx = grid.nv(0), ny = grid.nv(1);
        std::vector<double> phi(static_cast<std::size_t>(nx) * ny, 0.0);
        const double vy0 = grid.v_center(1, 0);
        for (int k = 0; k + 1 < nx; ++k)
            phi[grid.velocity_index(k + 1, 0)] = phi[grid.velocity_index(k, 0)] + wx(0, k, vy0);
        for (int jx = 0; jx < nx; ++jx) {
            const double vx = grid.v_center(0, jx);
            for (int k = 0; k + 1 < ny; ++k)
                phi[grid.velocity_index(jx, k + 1)] = phi[grid.velocity_index(jx, k)] + wx(1, k, vx);
        }
        const double phimin = *std::min_element(phi.begin(), phi.end());
        for (std::size_t i = 0; i < phi.size(); ++i) g[i] = std::exp(-(phi[i] - phimin));
    }
    double mass = 0.0;
    for (double x : g) mass += x;
    mass *= grid.velocity_cell_volume();
    const double scale = rho / mass;
    for (double& x : g) x *= scale;
    return g;
}

}  // namespace kfp
