#include "kfp/grid.hpp"

#include <cmath>
#include <string>

namespace kfp {

PhaseGrid PhaseGrid::build(const GridSpec& spec) {
    require(spec.dim == 1 || spec.dim == 2, "grid: dimension must be 1 or 2");
    PhaseGrid g;
    g.spec_ = spec;
    g.ns_ = 1;
    g.nvtot_ = 1;
    for (int a = 0; a < spec.dim; ++a) {
        const AxisSpec& ax = spec.space[a];
        require(std::isfinite(ax.lower) && std::isfinite(ax.upper) && ax.upper > ax.lower,
                "grid: spatial extent must be finite with upper > lower (axis " + std::to_string(a) + ")");
        require(ax.cells >= 2, "grid: cell count below minimum (axis " + std::to_string(a) + ")");
        const VelocityAxisSpec& vx = spec.velocity[a];
        require(std::isfinite(vx.vmax) && vx.vmax > 0.0,
                "grid: velocity bound must be finite and positive (axis " + std::to_string(a) + ")");
        require(vx.cells >= 2, "grid: cell count below minimum (velocity axis " + std::to_string(a) + ")");
        require(vx.cells % 2 == 0,
                "grid: velocity cell count must be even so mirrored cells pair exactly (axis " +
                    std::to_string(a) + ")");
        g.dx_[a] = (ax.upper - ax.lower) / ax.cells;
        g.dv_[a] = 2.0 * vx.vmax / vx.cells;
        g.ns_ *= ax.cells;
        g.nvtot_ *= vx.cells;
        g.sxvol_ *= g.dx_[a];
        g.vvol_ *= g.dv_[a];
    }
    g.vcenters_.resize(g.nvtot_);
    g.vspeed2_.resize(g.nvtot_);
    for (int iv = 0; iv < g.nvtot_; ++iv) {
        auto m = g.velocity_multi(iv);
        Vec v{g.v_center(0, m[0]), spec.dim > 1 ? g.v_center(1, m[1]) : 0.0};
        g.vcenters_[iv] = v;
        g.vspeed2_[iv] = norm2(v, spec.dim);
    }
    return g;
}

int PhaseGrid::mirror_velocity_index(int iv, int axis) const {
    auto m = velocity_multi(iv);
    m[axis] = spec_.velocity[axis].cells - 1 - m[axis];
    return velocity_index(m[0], m[1]);
}

double integrate_phase(const PhaseGrid& grid, const std::vector<double>& f) {
    return integrate_phase(grid, f, [](const Vec&, const Vec&) { return 1.0; });
}

namespace {

BoundaryFace make_face(const PhaseGrid& grid, int id, int axis, int side, int tangential) {
    const int d = grid.dim();
    BoundaryFace face;
    face.id = id;
    face.axis = axis;
    face.side = side;
    face.normal[axis] = side == 0 ? -1.0 : 1.0;
    const int edge_cell = side == 0 ? 0 : grid.nx(axis) - 1;
    if (d == 1) {
        face.spatial_cell = edge_cell;
        face.position[0] = side == 0 ? grid.x_lower(0) : grid.x_upper(0);
        face.area = 1.0;
    } else {
        const int other = 1 - axis;
        face.spatial_cell = axis == 0 ? grid.spatial_index(edge_cell, tangential)
                                      : grid.spatial_index(tangential, edge_cell);
        face.position[axis] = side == 0 ? grid.x_lower(axis) : grid.x_upper(axis);
        face.position[other] = grid.x_center(other, tangential);
        face.area = grid.dx(other);
        face.corner = tangential == 0 || tangential == grid.nx(other) - 1;
    }
    for (int iv = 0; iv < grid.velocity_cells(); ++iv) {
        const double nv = dot(face.normal, grid.v_at(iv), d);
        if (nv < 0.0)
            face.incoming.push_back(iv);
        else if (nv > 0.0)
            face.outgoing.push_back(iv);
        else
            face.grazing.push_back(iv);
    }
    return face;
}

}  // namespace

std::vector<BoundaryFace> classify_boundary(const PhaseGrid& grid) {
    std::vector<BoundaryFace> faces;
    int id = 0;
    if (grid.dim() == 1) {
        faces.push_back(make_face(grid, id++, 0, 0, 0));
        faces.push_back(make_face(grid, id++, 0, 1, 0));
        return faces;
    }
    for (int side = 0; side < 2; ++side)
        for (int j = 0; j < grid.nx(1); ++j) faces.push_back(make_face(grid, id++, 0, side, j));
    for (int side = 0; side < 2; ++side)
        for (int i = 0; i < grid.nx(0); ++i) faces.push_back(make_face(grid, id++, 1, side, i));
    return faces;
}

}  // namespace kfp
