#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "kfp/util.hpp"

namespace kfp {

/// Fixed maximum dimension; runs use d = 1 or 2.
using Vec = std::array<double, 2>;

inline double dot(const Vec& a, const Vec& b, int dim) {
    double s = a[0] * b[0];
    if (dim > 1) s += a[1] * b[1];
    return s;
}

inline double norm2(const Vec& a, int dim) { return dot(a, a, dim); }

struct AxisSpec {
    double lower = 0.0;
    double upper = 1.0;
    int cells = 0;
};

struct VelocityAxisSpec {
    double vmax = 0.0;  // symmetric box [-vmax, vmax]
    int cells = 0;
};

struct GridSpec {
    int dim = 1;
    std::array<AxisSpec, 2> space{};
    std::array<VelocityAxisSpec, 2> velocity{};
};

/// Cell-centered tensor grid over Omega x [-Vmax, Vmax]^d.
/// Immutable after construction; safe for concurrent reads.
class PhaseGrid {
public:
    static PhaseGrid build(const GridSpec& spec);

    int dim() const { return spec_.dim; }

    // spatial mesh
    int nx(int axis) const { return spec_.space[axis].cells; }
    double dx(int axis) const { return dx_[axis]; }
    double x_lower(int axis) const { return spec_.space[axis].lower; }
    double x_upper(int axis) const { return spec_.space[axis].upper; }
    double x_center(int axis, int i) const {
        return spec_.space[axis].lower + (i + 0.5) * dx_[axis];
    }
    int spatial_cells() const { return ns_; }
    int spatial_index(int ix, int iy) const {
        return spec_.dim == 1 ? ix : ix * spec_.space[1].cells + iy;
    }
    std::array<int, 2> spatial_multi(int is) const {
        if (spec_.dim == 1) return {is, 0};
        return {is / spec_.space[1].cells, is % spec_.space[1].cells};
    }
    Vec x_at(int is) const {
        auto m = spatial_multi(is);
        return {x_center(0, m[0]), spec_.dim > 1 ? x_center(1, m[1]) : 0.0};
    }
    double spatial_cell_volume() const { return sxvol_; }
    double domain_volume() const { return sxvol_ * ns_; }

    // velocity mesh (symmetric about 0, even cell counts)
    int nv(int axis) const { return spec_.velocity[axis].cells; }
    double dv(int axis) const { return dv_[axis]; }
    double vmax(int axis) const { return spec_.velocity[axis].vmax; }
    double v_center(int axis, int i) const {
        // symmetric form: mirrored cells get exactly negated centers
        const int n = spec_.velocity[axis].cells;
        return static_cast<double>(2 * i + 1 - n) * 0.5 * dv_[axis];
    }
    /// Interior velocity interface k (between cells k and k+1) on an axis.
    double v_interface(int axis, int k) const {
        const int n = spec_.velocity[axis].cells;
        return static_cast<double>(2 * (k + 1) - n) * 0.5 * dv_[axis];
    }
    int velocity_cells() const { return nvtot_; }
    int velocity_index(int ivx, int ivy) const {
        return spec_.dim == 1 ? ivx : ivx * spec_.velocity[1].cells + ivy;
    }
    std::array<int, 2> velocity_multi(int iv) const {
        if (spec_.dim == 1) return {iv, 0};
        return {iv / spec_.velocity[1].cells, iv % spec_.velocity[1].cells};
    }
    const Vec& v_at(int iv) const { return vcenters_[iv]; }
    double speed2_at(int iv) const { return vspeed2_[iv]; }
    double velocity_cell_volume() const { return vvol_; }

    /// Mirrors the given velocity component: v_axis -> -v_axis.
    /// Exact on the symmetric grid (cell centers map to cell centers).
    int mirror_velocity_index(int iv, int axis) const;

    // phase-space field layout: f[is * velocity_cells() + iv]
    std::size_t phase_cells() const {
        return static_cast<std::size_t>(ns_) * nvtot_;
    }
    std::size_t phase_index(int is, int iv) const {
        return static_cast<std::size_t>(is) * nvtot_ + iv;
    }
    double cell_volume() const { return sxvol_ * vvol_; }

    const GridSpec& spec() const { return spec_; }

private:
    GridSpec spec_{};
    std::array<double, 2> dx_{1.0, 1.0};
    std::array<double, 2> dv_{1.0, 1.0};
    int ns_ = 0;
    int nvtot_ = 0;
    double sxvol_ = 1.0;
    double vvol_ = 1.0;
    std::vector<Vec> vcenters_;
    std::vector<double> vspeed2_;
};

/// Midpoint-rule integral of weight(x, v) * f over phase space.
/// Deterministic summation order: spatial-major, then velocity.
template <class W>
double integrate_phase(const PhaseGrid& grid, const std::vector<double>& f, W weight) {
    check_runtime(f.size() == grid.phase_cells(), "integrate_phase: field size does not match grid");
    const double vol = grid.cell_volume();
    double total = 0.0;
    for (int is = 0; is < grid.spatial_cells(); ++is) {
        const Vec x = grid.x_at(is);
        double cell = 0.0;
        for (int iv = 0; iv < grid.velocity_cells(); ++iv)
            cell += f[grid.phase_index(is, iv)] * weight(x, grid.v_at(iv));
        total += cell;
    }
    return total * vol;
}

double integrate_phase(const PhaseGrid& grid, const std::vector<double>& f);

/// One face of the spatial mesh boundary with its velocity-cell partition.
struct BoundaryFace {
    int id = 0;
    int axis = 0;        // normal axis
    int side = 0;        // 0: lower end, 1: upper end
    int spatial_cell = 0;  // adjacent interior cell
    Vec normal{0.0, 0.0};  // outward unit normal
    Vec position{0.0, 0.0};  // face center
    double area = 1.0;       // surface measure (1 in d=1, tangential dx in d=2)
    bool corner = false;     // adjacent cell touches a domain corner (d=2)
    std::vector<int> incoming;  // n.v < 0 at the velocity cell center
    std::vector<int> outgoing;  // n.v > 0
    std::vector<int> grazing;   // n.v == 0 (zero flux)
};

std::vector<BoundaryFace> classify_boundary(const PhaseGrid& grid);

}  // namespace kfp
