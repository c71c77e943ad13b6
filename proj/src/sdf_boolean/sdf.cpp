#include "craftmesh/sdf.hpp"

#include "craftmesh/errors.hpp"

#include <algorithm>
#include <cmath>

namespace craftmesh {

Aabb SdfGrid::bounds() const {
    Aabb box;
    box.extend(origin);
    box.extend(position(dims[0] - 1, dims[1] - 1, dims[2] - 1));
    return box;
}

double SdfGrid::sample(const Vec3& p) const {
    const Vec3 g = (p - origin) / spacing;
    int base[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
        const double c = std::clamp(g[a], 0.0, static_cast<double>(dims[a] - 1));
        base[a] = std::min(static_cast<int>(std::floor(c)), dims[a] - 2);
        frac[a] = c - base[a];
    }
    double result = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
        double w = 1.0;
        int idx[3];
        for (int a = 0; a < 3; ++a) {
            const int bit = (corner >> a) & 1;
            idx[a] = base[a] + bit;
            w *= bit ? frac[a] : 1.0 - frac[a];
        }
        if (w != 0.0) result += w * value(idx[0], idx[1], idx[2]);
    }
    return result;
}

void SdfGrid::validate() const {
    if (!(spacing > 0.0)) throw ParameterError("grid spacing must be positive");
    for (int d : dims) {
        if (d < 2) throw ParameterError("grid needs at least 2 nodes per axis");
    }
    if (values.size() != node_count()) throw ParameterError("grid value count mismatch");
    for (double v : values) {
        if (!std::isfinite(v)) throw ParameterError("grid contains non-finite values");
    }
}

Aabb padded_bounds(const Aabb& box, int resolution, int margin_cells) {
    if (resolution <= 2 * margin_cells) {
        throw ParameterError("resolution " + std::to_string(resolution) +
                             " too small for a margin of " + std::to_string(margin_cells));
    }
    const double extent = std::max(box.extent().maxCoeff(), 1e-9);
    const double spacing = extent / (resolution - 2 * margin_cells);
    Aabb out;
    const Vec3 half = Vec3::Constant(0.5 * resolution * spacing);
    out.min = box.center() - half;
    out.max = box.center() + half;
    return out;
}

namespace {

SdfGrid make_layout(const Aabb& bounds, int resolution) {
    if (resolution < 1) throw ParameterError("grid resolution must be at least 1");
    if (!bounds.valid()) throw ParameterError("grid bounds are empty");
    const Vec3 extent = bounds.extent();
    SdfGrid grid;
    grid.spacing = extent.maxCoeff() / resolution;
    if (!(grid.spacing > 0.0)) throw ParameterError("grid bounds are degenerate");
    grid.origin = bounds.min;
    for (int a = 0; a < 3; ++a) {
        grid.dims[a] = std::max(2, static_cast<int>(std::ceil(extent[a] / grid.spacing - 1e-9)) + 1);
    }
    grid.values.resize(grid.node_count());
    return grid;
}

}  // namespace

SdfGrid sample_sdf(const TriMesh& mesh, const DistanceIndex& index, const Aabb& bounds,
                   int resolution) {
    if (!index.closed()) throw TopologyError("cannot sample a signed distance of an open mesh");
    SdfGrid grid = make_layout(bounds, resolution);
    const Aabb mb = bounding_box(mesh);
    const Aabb gb = grid.bounds();
    const double margin = 2.0 * grid.spacing;
    for (int a = 0; a < 3; ++a) {
        if (mb.min[a] - gb.min[a] < margin - 1e-12 || gb.max[a] - mb.max[a] < margin - 1e-12) {
            throw ParameterError("grid bounds must contain the mesh with a two-cell margin");
        }
    }
    for (int k = 0; k < grid.dims[2]; ++k) {
        for (int j = 0; j < grid.dims[1]; ++j) {
            for (int i = 0; i < grid.dims[0]; ++i) {
                grid.values[grid.index(i, j, k)] =
                    signed_distance(mesh, index, grid.position(i, j, k)).value;
            }
        }
    }
    return grid;
}

SdfGrid sample_function(const std::function<double(const Vec3&)>& f, const Aabb& bounds,
                        int resolution) {
    SdfGrid grid = make_layout(bounds, resolution);
    for (int k = 0; k < grid.dims[2]; ++k) {
        for (int j = 0; j < grid.dims[1]; ++j) {
            for (int i = 0; i < grid.dims[0]; ++i) {
                grid.values[grid.index(i, j, k)] = f(grid.position(i, j, k));
            }
        }
    }
    return grid;
}

SdfGrid combine(const SdfGrid& a, const SdfGrid& b, BooleanOp op) {
    if (!a.same_layout(b) || a.values.size() != b.values.size()) {
        throw ParameterError("cannot combine grids with different layouts");
    }
    SdfGrid out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = op == BooleanOp::Union ? std::min(a.values[i], b.values[i])
                                               : std::max(a.values[i], -b.values[i]);
    }
    return out;
}

SeamPoints extract_seam(const SdfGrid& a, const SdfGrid& b, const TriMesh& merged, double tau) {
    SeamPoints seam;
    for (std::size_t v = 0; v < merged.vertices.size(); ++v) {
        const Vec3& p = merged.vertices[v];
        if (std::abs(a.sample(p)) < tau && std::abs(b.sample(p)) < tau) {
            seam.vertices.push_back(static_cast<int>(v));
            seam.positions.push_back(p);
        }
    }
    return seam;
}

}  // namespace craftmesh
