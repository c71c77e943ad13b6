#pragma once

#include "craftmesh/distance.hpp"
#include "craftmesh/mesh.hpp"

#include <array>
#include <functional>
#include <vector>

namespace craftmesh {

/// Signed distances sampled at the nodes of a regular grid; x varies fastest.
struct SdfGrid {
    Vec3 origin = Vec3::Zero();
    double spacing = 1.0;
    std::array<int, 3> dims{2, 2, 2};
    std::vector<double> values;

    std::size_t node_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
    }
    double value(int i, int j, int k) const { return values[index(i, j, k)]; }
    Vec3 position(int i, int j, int k) const { return origin + spacing * Vec3(i, j, k); }
    Aabb bounds() const;
    bool same_layout(const SdfGrid& o) const {
        return origin == o.origin && spacing == o.spacing && dims == o.dims;
    }
    /// Trilinear interpolation; points outside are clamped to the grid.
    double sample(const Vec3& p) const;
    /// Throws ParameterError on an invalid layout or non-finite values.
    void validate() const;
};

enum class BooleanOp { Union, Difference };

/// Box enclosing `box` with a margin of `margin_cells` cells when split into
/// `resolution` cells along its longest side.
Aabb padded_bounds(const Aabb& box, int resolution, int margin_cells = 3);

/// Grid over `bounds` with cubic cells, `resolution` cells along the longest
/// side. Requires a closed mesh and a margin of at least two cells.
SdfGrid sample_sdf(const TriMesh& mesh, const DistanceIndex& index, const Aabb& bounds,
                   int resolution);

/// Same layout, values from an analytic function (used for tests and
/// primitives).
SdfGrid sample_function(const std::function<double(const Vec3&)>& f, const Aabb& bounds,
                        int resolution);

/// Union -> min(a, b); Difference -> max(a, -b).
SdfGrid combine(const SdfGrid& a, const SdfGrid& b, BooleanOp op);

struct SurfaceExtraction {
    TriMesh mesh;
    bool touches_boundary = false;  ///< level set reaches the grid border; mesh is open there
};

/// Zero level set as an outward-oriented triangle mesh. Each cell is split
/// into six tetrahedra sharing the cell diagonal, so neighbouring cells agree
/// on every face and the surface is watertight; vertices sit at linearly
/// interpolated crossings on grid edges and cell diagonals. Cells are visited
/// in index order, so the output is deterministic.
SurfaceExtraction marching_cubes(const SdfGrid& grid);

struct SeamPoints {
    std::vector<int> vertices;  ///< indices into the merged mesh, ascending
    std::vector<Vec3> positions;
};

/// Vertices of `merged` where both input fields are within tau of zero.
SeamPoints extract_seam(const SdfGrid& a, const SdfGrid& b, const TriMesh& merged, double tau);

}  // namespace craftmesh
