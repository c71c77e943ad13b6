#include "craftmesh/mesh.hpp"

#include "craftmesh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace craftmesh {

void TriMesh::validate() const {
    const auto nv = static_cast<int>(vertices.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Face& t = faces[f];
        for (int c = 0; c < 3; ++c) {
            if (t[c] < 0 || t[c] >= nv) {
                throw ValidationError("face " + std::to_string(f) + " references vertex " +
                                      std::to_string(t[c]) + " but mesh has " +
                                      std::to_string(nv) + " vertices");
            }
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            throw ValidationError("face " + std::to_string(f) + " repeats a vertex index");
        }
    }
    if (uvs && uvs->size() != faces.size()) {
        throw ValidationError("uv corner count " + std::to_string(uvs->size()) +
                              " does not match face count " + std::to_string(faces.size()));
    }
    if (vertex_colors && vertex_colors->size() != vertices.size()) {
        throw ValidationError("vertex color count does not match vertex count");
    }
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        if (!vertices[v].allFinite()) {
            throw ValidationError("vertex " + std::to_string(v) + " is not finite");
        }
    }
}

Aabb bounding_box(const TriMesh& mesh) {
    Aabb box;
    for (const Vec3& v : mesh.vertices) box.extend(v);
    return box;
}

Vec3 face_cross(const TriMesh& mesh, int face) {
    const Face& t = mesh.faces[face];
    const Vec3& a = mesh.vertices[t[0]];
    return (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a);
}

double face_area(const TriMesh& mesh, int face) { return 0.5 * face_cross(mesh, face).norm(); }

bool is_degenerate(const TriMesh& mesh, int face) {
    return face_cross(mesh, face).squaredNorm() <= kDegenerateAreaSq;
}

Vec3 face_normal(const TriMesh& mesh, int face) {
    if (face < 0 || static_cast<std::size_t>(face) >= mesh.faces.size()) {
        throw ParameterError("face index " + std::to_string(face) + " out of range");
    }
    const Vec3 c = face_cross(mesh, face);
    if (c.squaredNorm() <= kDegenerateAreaSq) {
        throw DegenerateFaceError("face " + std::to_string(face) + " has near-zero area");
    }
    return c / c.norm();
}

double mean_edge_length(const TriMesh& mesh) {
    std::unordered_set<std::uint64_t> seen;
    double total = 0.0;
    std::size_t count = 0;
    for (const Face& t : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            const auto a = static_cast<std::uint32_t>(std::min(t[c], t[(c + 1) % 3]));
            const auto b = static_cast<std::uint32_t>(std::max(t[c], t[(c + 1) % 3]));
            if (seen.insert((std::uint64_t{a} << 32) | b).second) {
                total += (mesh.vertices[a] - mesh.vertices[b]).norm();
                ++count;
            }
        }
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

TriMesh concatenate(const TriMesh& a, const TriMesh& b) {
    TriMesh out;
    out.vertices = a.vertices;
    out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
    out.faces = a.faces;
    const int offset = static_cast<int>(a.vertices.size());
    for (Face t : b.faces) {
        for (int& i : t) i += offset;
        out.faces.push_back(t);
    }
    if (a.uvs && b.uvs) {
        out.uvs = *a.uvs;
        out.uvs->insert(out.uvs->end(), b.uvs->begin(), b.uvs->end());
    }
    if (a.vertex_colors && b.vertex_colors) {
        out.vertex_colors = *a.vertex_colors;
        out.vertex_colors->insert(out.vertex_colors->end(), b.vertex_colors->begin(),
                                  b.vertex_colors->end());
    }
    return out;
}

TriMesh submesh(const TriMesh& mesh, const std::vector<int>& faces, std::vector<int>* vertex_map) {
    std::vector<int> remap(mesh.vertices.size(), -1);
    TriMesh out;
    if (mesh.uvs) out.uvs.emplace();
    for (int f : faces) {
        Face t = mesh.faces[f];
        for (int& i : t) {
            if (remap[i] < 0) {
                remap[i] = static_cast<int>(out.vertices.size());
                out.vertices.push_back(mesh.vertices[i]);
            }
            i = remap[i];
        }
        out.faces.push_back(t);
        if (mesh.uvs) out.uvs->push_back((*mesh.uvs)[f]);
    }
    if (mesh.vertex_colors) {
        out.vertex_colors.emplace(out.vertices.size());
        for (std::size_t v = 0; v < remap.size(); ++v) {
            if (remap[v] >= 0) (*out.vertex_colors)[remap[v]] = (*mesh.vertex_colors)[v];
        }
    }
    if (vertex_map) *vertex_map = std::move(remap);
    return out;
}

}  // namespace craftmesh
