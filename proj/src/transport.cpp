#include "kfp/transport.hpp"

#include <algorithm>
#include <cmath>

#include "kfp/moments.hpp"
#include "kfp/util.hpp"

namespace kfp {

Vec reflect_velocity(const Vec& v, const Vec& n, int dim) {
    const double nn = norm2(n, dim);
    require(std::abs(nn - 1.0) <= 1e-12, "reflect_velocity: normal must be a unit vector");
    const double nv = dot(n, v, dim);
    Vec out{v[0] - 2.0 * nv * n[0], dim > 1 ? v[1] - 2.0 * nv * n[1] : 0.0};
    return out;
}

std::vector<double> materialize_inflow(const PhaseGrid& grid,
                                       const std::vector<BoundaryFace>& faces,
                                       const InflowSpec& inflow) {
    const int nv = grid.velocity_cells();
    std::vector<double> values(faces.size() * nv, 0.0);
    if (inflow.kind == InflowSpec::Kind::zero) return values;
    if (inflow.kind == InflowSpec::Kind::tabulated) {
        require(inflow.table.size() == values.size(),
                "inflow table size does not match faces x velocity cells");
        for (double g : inflow.table)
            require(std::isfinite(g) && g >= 0.0, "inflow datum must be finite and nonnegative");
        for (const BoundaryFace& face : faces)
            for (int iv : face.incoming)
                values[face.id * nv + iv] = inflow.table[face.id * nv + iv];
        return values;
    }
    const std::vector<double> m = maxwellian(inflow.rho, inflow.u, inflow.T, grid);
    for (const BoundaryFace& face : faces)
        for (int iv : face.incoming) values[face.id * nv + iv] = m[iv];
    return values;
}

TraceRecord TraceRecord::make(const PhaseGrid& grid, const std::vector<BoundaryFace>& faces) {
    TraceRecord t;
    t.n_faces = static_cast<int>(faces.size());
    t.n_velocity = grid.velocity_cells();
    t.face_in.assign(faces.size(), {});
    t.face_out.assign(faces.size(), {});
    t.last_out_trace.assign(faces.size() * grid.velocity_cells(), 0.0);
    t.last_in_value.assign(faces.size() * grid.velocity_cells(), 0.0);
    return t;
}

FluxWeight parse_flux_weight(const std::string& tag) {
    if (tag == "mass" || tag == "1") return FluxWeight::mass;
    if (tag == "energy") return FluxWeight::energy;
    if (tag == "entropy") return FluxWeight::entropy;
    throw std::invalid_argument("unknown flux weight tag: " + tag);
}

std::pair<double, double> boundary_flux_integrals(const TraceRecord& trace, FluxWeight weight) {
    switch (weight) {
        case FluxWeight::mass:
            return {trace.in_cum.mass, trace.out_cum.mass};
        case FluxWeight::energy:
            return {trace.in_cum.energy, trace.out_cum.energy};
        case FluxWeight::entropy:
            return {trace.in_cum.entropy, trace.out_cum.entropy};
    }
    return {0.0, 0.0};
}

double transport_cfl_limit(const PhaseGrid& grid) {
    double rate = 0.0;
    for (int a = 0; a < grid.dim(); ++a) rate += grid.vmax(a) / grid.dx(a);
    return 1.0 / rate;
}

namespace {

struct StageFluxes {
    FluxTotals in, out;
    double corner_in = 0.0, corner_out = 0.0;
};

struct FaceIndex {
    int width = 1;
    std::vector<int> id;
    int slot(int axis, int side, int tang) const { return (axis * 2 + side) * width + tang; }
};

FaceIndex build_face_index(const PhaseGrid& grid, const std::vector<BoundaryFace>& faces) {
    FaceIndex fi;
    fi.width = std::max(grid.nx(0), grid.dim() > 1 ? grid.nx(1) : 1);
    fi.id.assign(static_cast<std::size_t>(4) * fi.width, -1);
    for (const BoundaryFace& face : faces) {
        int tang = 0;
        if (grid.dim() == 2) {
            auto m = grid.spatial_multi(face.spatial_cell);
            tang = face.axis == 0 ? m[1] : m[0];
        }
        fi.id[fi.slot(face.axis, face.side, tang)] = face.id;
    }
    return fi;
}

/// One forward-Euler application of the upwind fluxes (monotone for
/// courant <= 1). Gathers the upwind traces from the pre-stage state, feeds
/// the incoming cells, updates in place, and accumulates the exact flux
/// increments of this stage into gout / bin and the returned totals.
double minmod(double a, double b) {
    if (a > 0.0 && b > 0.0) return std::min(a, b);
    if (a < 0.0 && b < 0.0) return std::max(a, b);
    return 0.0;
}

StageFluxes euler_stage(const PhaseGrid& grid, const std::vector<BoundaryFace>& faces,
                        const FaceIndex& fid, const BoundaryCondition& bc,
                        const std::vector<double>& inflow_values, double dt,
                        std::vector<double>& f, std::vector<double>& gout,
                        std::vector<double>& bin, int workers, int order) {
    const int d = grid.dim();
    const int nv = grid.velocity_cells();
    const bool reflect = bc.kind == BoundaryCondition::Kind::absorb_reflect;

    std::fill(gout.begin(), gout.end(), 0.0);
    std::fill(bin.begin(), bin.end(), 0.0);
    for (const BoundaryFace& face : faces)
        for (int iv : face.outgoing)
            gout[static_cast<std::size_t>(face.id) * nv + iv] =
                f[grid.phase_index(face.spatial_cell, iv)];
    for (const BoundaryFace& face : faces) {
        for (int iv : face.incoming) {
            const std::size_t slot = static_cast<std::size_t>(face.id) * nv + iv;
            if (reflect) {
                const int pair = grid.mirror_velocity_index(iv, face.axis);
                bin[slot] = bc.theta * gout[static_cast<std::size_t>(face.id) * nv + pair];
            } else {
                bin[slot] = inflow_values[slot];
            }
        }
    }

    if (d == 1) {
        const int nx = grid.nx(0);
        const double r = dt / grid.dx(0);
        parallel_for(static_cast<std::size_t>(nv), workers, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> line(nx);
            for (std::size_t ivz = lo; ivz < hi; ++ivz) {
                const int iv = static_cast<int>(ivz);
                const double v = grid.v_at(iv)[0];
                if (v == 0.0) continue;
                if (order == 1) {
                    if (v > 0.0) {
                        const double c = v * r;
                        const double b =
                            bin[static_cast<std::size_t>(fid.id[fid.slot(0, 0, 0)]) * nv + iv];
                        for (int i = nx - 1; i >= 1; --i) {
                            const std::size_t idx = grid.phase_index(i, iv);
                            f[idx] -= c * (f[idx] - f[grid.phase_index(i - 1, iv)]);
                        }
                        const std::size_t i0 = grid.phase_index(0, iv);
                        f[i0] -= c * (f[i0] - b);
                    } else {
                        const double c = -v * r;
                        const double b =
                            bin[static_cast<std::size_t>(fid.id[fid.slot(0, 1, 0)]) * nv + iv];
                        for (int i = 0; i <= nx - 2; ++i) {
                            const std::size_t idx = grid.phase_index(i, iv);
                            f[idx] -= c * (f[idx] - f[grid.phase_index(i + 1, iv)]);
                        }
                        const std::size_t ie = grid.phase_index(nx - 1, iv);
                        f[ie] -= c * (f[ie] - b);
                    }
                    continue;
                }
                // MUSCL: minmod-limited face values, upwinded; boundary faces
                // keep the first-order (upwind / datum) values
                for (int i = 0; i < nx; ++i) line[i] = f[grid.phase_index(i, iv)];
                auto slope = [&](int i) {
                    if (i <= 0 || i >= nx - 1) return 0.0;
                    return minmod(line[i] - line[i - 1], line[i + 1] - line[i]);
                };
                const double bl = bin[static_cast<std::size_t>(fid.id[fid.slot(0, 0, 0)]) * nv + iv];
                const double br = bin[static_cast<std::size_t>(fid.id[fid.slot(0, 1, 0)]) * nv + iv];
                double flux_left;  // at face i - 1/2, per unit velocity measure
                if (v > 0.0)
                    flux_left = v * bl;
                else
                    flux_left = v * line[0];
                for (int i = 0; i < nx; ++i) {
                    double flux_right;
                    if (i == nx - 1) {
                        flux_right = v > 0.0 ? v * line[nx - 1] : v * br;
                    } else if (v > 0.0) {
                        flux_right = v * (line[i] + 0.5 * slope(i));
                    } else {
                        flux_right = v * (line[i + 1] - 0.5 * slope(i + 1));
                    }
                    f[grid.phase_index(i, iv)] = line[i] - r * (flux_right - flux_left);
                    flux_left = flux_right;
                }
            }
        });
    } else {
        const int nx = grid.nx(0), ny = grid.nx(1);
        const double rx = dt / grid.dx(0), ry = dt / grid.dx(1);
        parallel_for(static_cast<std::size_t>(nv), workers, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> slab(static_cast<std::size_t>(nx) * ny);
            for (std::size_t ivz = lo; ivz < hi; ++ivz) {
                const int iv = static_cast<int>(ivz);
                const Vec v = grid.v_at(iv);
                for (int is = 0; is < grid.spatial_cells(); ++is)
                    slab[is] = f[grid.phase_index(is, iv)];
                const double cx = v[0] * rx, cy = v[1] * ry;
                auto sx = [&](int ix, int iy) {
                    if (order == 1 || ix <= 0 || ix >= nx - 1) return 0.0;
                    const double mid = slab[grid.spatial_index(ix, iy)];
                    return minmod(mid - slab[grid.spatial_index(ix - 1, iy)],
                                  slab[grid.spatial_index(ix + 1, iy)] - mid);
                };
                auto sy = [&](int ix, int iy) {
                    if (order == 1 || iy <= 0 || iy >= ny - 1) return 0.0;
                    const double mid = slab[grid.spatial_index(ix, iy)];
                    return minmod(mid - slab[grid.spatial_index(ix, iy - 1)],
                                  slab[grid.spatial_index(ix, iy + 1)] - mid);
                };
                for (int ix = 0; ix < nx; ++ix) {
                    for (int iy = 0; iy < ny; ++iy) {
                        const int is = grid.spatial_index(ix, iy);
                        double val = slab[is];
                        if (v[0] > 0.0) {
                            const double hi = ix < nx - 1 ? slab[is] + 0.5 * sx(ix, iy) : slab[is];
                            const double lo =
                                ix > 0 ? slab[grid.spatial_index(ix - 1, iy)] + 0.5 * sx(ix - 1, iy)
                                       : bin[static_cast<std::size_t>(fid.id[fid.slot(0, 0, iy)]) * nv + iv];
                            val -= cx * (hi - lo);
                        } else if (v[0] < 0.0) {
                            const double hi =
                                ix < nx - 1 ? slab[grid.spatial_index(ix + 1, iy)] - 0.5 * sx(ix + 1, iy)
                                            : bin[static_cast<std::size_t>(fid.id[fid.slot(0, 1, iy)]) * nv + iv];
                            const double lo = ix > 0 ? slab[is] - 0.5 * sx(ix, iy) : slab[is];
                            val -= cx * (hi - lo);
                        }
                        if (v[1] > 0.0) {
                            const double hi = iy < ny - 1 ? slab[is] + 0.5 * sy(ix, iy) : slab[is];
                            const double lo =
                                iy > 0 ? slab[grid.spatial_index(ix, iy - 1)] + 0.5 * sy(ix, iy - 1)
                                       : bin[static_cast<std::size_t>(fid.id[fid.slot(1, 0, ix)]) * nv + iv];
                            val -= cy * (hi - lo);
                        } else if (v[1] < 0.0) {
                            const double hi =
                                iy < ny - 1 ? slab[grid.spatial_index(ix, iy + 1)] - 0.5 * sy(ix, iy + 1)
                                            : bin[static_cast<std::size_t>(fid.id[fid.slot(1, 1, ix)]) * nv + iv];
                            const double lo = iy > 0 ? slab[is] - 0.5 * sy(ix, iy) : slab[is];
                            val -= cy * (hi - lo);
                        }
                        f[grid.phase_index(is, iv)] = val;
                    }
                }
            }
        });
    }

    StageFluxes totals;
    const double vvol = grid.velocity_cell_volume();
    for (const BoundaryFace& face : faces) {
        FluxTotals fin, fout;
        for (int iv : face.outgoing) {
            const double gamma = gout[static_cast<std::size_t>(face.id) * nv + iv];
            const double w = dot(face.normal, grid.v_at(iv), d) * face.area * vvol * dt;
            fout.mass += gamma * w;
            fout.energy += (1.0 + grid.speed2_at(iv)) * gamma * w;
            fout.entropy += zlogz(gamma) * w;
        }
        for (int iv : face.incoming) {
            const double b = bin[static_cast<std::size_t>(face.id) * nv + iv];
            const double w = -dot(face.normal, grid.v_at(iv), d) * face.area * vvol * dt;
            fin.mass += b * w;
            fin.energy += (1.0 + grid.speed2_at(iv)) * b * w;
            fin.entropy += zlogz(b) * w;
        }
        totals.in.mass += fin.mass;
        totals.in.energy += fin.energy;
        totals.in.entropy += fin.entropy;
        totals.out.mass += fout.mass;
        totals.out.energy += fout.energy;
        totals.out.entropy += fout.entropy;
        if (face.corner) {
            totals.corner_in += fin.mass;
            totals.corner_out += fout.mass;
        }
    }
    return totals;
}

void add_face_increments(TraceRecord& trace, const std::vector<BoundaryFace>& faces,
                         const PhaseGrid& grid, const std::vector<double>& gout,
                         const std::vector<double>& bin, double dt, double weight) {
    const int d = grid.dim();
    const int nv = grid.velocity_cells();
    const double vvol = grid.velocity_cell_volume();
    for (const BoundaryFace& face : faces) {
        for (int iv : face.outgoing) {
            const double gamma = gout[static_cast<std::size_t>(face.id) * nv + iv];
            const double w = dot(face.normal, grid.v_at(iv), d) * face.area * vvol * dt * weight;
            trace.face_out[face.id].mass += gamma * w;
            trace.face_out[face.id].energy += (1.0 + grid.speed2_at(iv)) * gamma * w;
            trace.face_out[face.id].entropy += zlogz(gamma) * w;
        }
        for (int iv : face.incoming) {
            const double b = bin[static_cast<std::size_t>(face.id) * nv + iv];
            const double w = -dot(face.normal, grid.v_at(iv), d) * face.area * vvol * dt * weight;
            trace.face_in[face.id].mass += b * w;
            trace.face_in[face.id].energy += (1.0 + grid.speed2_at(iv)) * b * w;
            trace.face_in[face.id].entropy += zlogz(b) * w;
        }
    }
}

}  // namespace

void transport_step(const PhaseGrid& grid, const std::vector<BoundaryFace>& faces,
                    const BoundaryCondition& bc, const std::vector<double>& inflow_values,
                    double /*t*/, double dt, std::vector<double>& f, TraceRecord& trace,
                    int workers, int order) {
    require(dt > 0.0, "transport_step: dt must be positive");
    require(order == 1 || order == 2, "transport_step: order must be 1 or 2");
    require(dt <= transport_cfl_limit(grid) * (1.0 + 1e-12), "transport_step: CFL bound violated");
    check_runtime(f.size() == grid.phase_cells(), "transport_step: field size does not match grid");
    if (bc.kind == BoundaryCondition::Kind::inflow)
        check_runtime(inflow_values.size() ==
                          faces.size() * static_cast<std::size_t>(grid.velocity_cells()),
                      "transport_step: inflow table size mismatch");

    const FaceIndex fid = build_face_index(grid, faces);
    const std::size_t table = faces.size() * static_cast<std::size_t>(grid.velocity_cells());

    // Heun (SSP-RK2) on the upwind fluxes: two monotone Euler stages averaged.
    // Second order in dt; the stage-averaged flux increments keep the
    // discrete balance d(mass) = influx - outflux exact.
    const std::vector<double> f0 = f;
    std::vector<double> gout1(table), bin1(table), gout2(table), bin2(table);
    const StageFluxes s1 =
        euler_stage(grid, faces, fid, bc, inflow_values, dt, f, gout1, bin1, workers, order);
    const StageFluxes s2 =
        euler_stage(grid, faces, fid, bc, inflow_values, dt, f, gout2, bin2, workers, order);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.5 * (f0[i] + f[i]);

    trace.in_last.mass = 0.5 * (s1.in.mass + s2.in.mass);
    trace.in_last.energy = 0.5 * (s1.in.energy + s2.in.energy);
    trace.in_last.entropy = 0.5 * (s1.in.entropy + s2.in.entropy);
    trace.out_last.mass = 0.5 * (s1.out.mass + s2.out.mass);
    trace.out_last.energy = 0.5 * (s1.out.energy + s2.out.energy);
    trace.out_last.entropy = 0.5 * (s1.out.entropy + s2.out.entropy);
    trace.in_cum.mass += trace.in_last.mass;
    trace.in_cum.energy += trace.in_last.energy;
    trace.in_cum.entropy += trace.in_last.entropy;
    trace.out_cum.mass += trace.out_last.mass;
    trace.out_cum.energy += trace.out_last.energy;
    trace.out_cum.entropy += trace.out_last.entropy;
    trace.corner_in_mass += 0.5 * (s1.corner_in + s2.corner_in);
    trace.corner_out_mass += 0.5 * (s1.corner_out + s2.corner_out);
    add_face_increments(trace, faces, grid, gout1, bin1, dt, 0.5);
    add_face_increments(trace, faces, grid, gout2, bin2, dt, 0.5);

    // effective trace of the step: the stage average (what the combined
    // update actually transported through each face)
    for (std::size_t i = 0; i < table; ++i) {
        trace.last_out_trace[i] = 0.5 * (gout1[i] + gout2[i]);
        trace.last_in_value[i] = 0.5 * (bin1[i] + bin2[i]);
    }
}

}  // namespace kfp
