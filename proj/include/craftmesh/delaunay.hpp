#pragma once

#include "craftmesh/mesh.hpp"

#include <array>
#include <vector>

namespace craftmesh {

/// Planar Delaunay triangulation of a point set.
///
/// Input points are snapped to a power-of-two grid fine enough to keep
/// 22 bits per coordinate, so every predicate is evaluated exactly in
/// integers. Points that land on the same grid node are merged. A point on
/// a circumcircle does not invalidate the triangle, which makes cocircular
/// configurations resolve deterministically by insertion order.
struct Delaunay {
    std::vector<Vec2> points;                    ///< snapped, duplicate-free
    std::vector<int> point_of_input;             ///< input index -> points index
    std::vector<std::array<int, 3>> triangles;   ///< counter-clockwise
    std::vector<char> on_hull;                   ///< per point, convex hull vertex or hull edge
};

/// Throws ParameterError for fewer than three distinct points or when every
/// point is collinear.
Delaunay delaunay_triangulate(const std::vector<Vec2>& input);

}  // namespace craftmesh
