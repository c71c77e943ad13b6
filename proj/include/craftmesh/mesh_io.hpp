#pragma once

#include "craftmesh/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace craftmesh {

/// Reads a Wavefront-style text mesh: `v x y z [r g b]`, `vt u v`,
/// `f a/ta b/tb c/tc` (1-based, negative indices are relative). Normals,
/// groups and material statements are ignored. Polygons with more than three
/// corners are rejected.
TriMesh load_mesh(const std::filesystem::path& path);
TriMesh parse_mesh(std::istream& in);

/// Writes the mesh with shortest round-trip float formatting; UVs are written
/// as one `vt` per face corner.
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);
void write_mesh(const TriMesh& mesh, std::ostream& out);
std::string mesh_to_string(const TriMesh& mesh);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace craftmesh
