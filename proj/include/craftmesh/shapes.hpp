#pragma once

#include "craftmesh/mesh.hpp"

#include <functional>

namespace craftmesh::shapes {

/// Subdivided icosahedron projected to a sphere; outward-facing.
TriMesh icosphere(int subdivisions, double radius = 1.0, const Vec3& center = Vec3::Zero());

/// Axis-aligned box with 8 vertices, 12 outward faces and per-corner UVs.
TriMesh box(const Vec3& min, const Vec3& max);

/// Regular grid over [x0,x1] x [y0,y1] in the z = height(x,y) plane, facing
/// +z, with planar UVs. nx, ny are cell counts.
TriMesh height_field(int nx, int ny, double x0, double x1, double y0, double y1,
                     const std::function<double(double, double)>& height);

/// Latitude-longitude sphere with equirectangular UVs (u along longitude).
TriMesh uv_sphere(int slices, int stacks, double radius = 1.0);

}  // namespace craftmesh::shapes
