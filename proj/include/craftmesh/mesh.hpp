#pragma once

#include <Eigen/Dense>

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace craftmesh {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;
using FaceUv = std::array<Vec2, 3>;

/// Faces with twice-area squared below this are treated as degenerate.
inline constexpr double kDegenerateAreaSq = 1e-12;

/// Indexed triangle mesh. Faces are counter-clockwise; UVs, when present, are
/// stored per face corner.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::optional<std::vector<FaceUv>> uvs;
    std::optional<std::vector<Vec3>> vertex_colors;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t face_count() const { return faces.size(); }
    bool empty() const { return faces.empty(); }

    /// Throws ValidationError naming the first broken invariant.
    void validate() const;
};

struct Aabb {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    bool valid() const { return (min.array() <= max.array()).all(); }
    void extend(const Vec3& p) {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    void extend(const Aabb& b) {
        min = min.cwiseMin(b.min);
        max = max.cwiseMax(b.max);
    }
    Vec3 center() const { return 0.5 * (min + max); }
    Vec3 extent() const { return max - min; }
    double diagonal() const { return valid() ? extent().norm() : 0.0; }
    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
    /// Squared distance from p to the box (0 inside).
    double squared_distance(const Vec3& p) const {
        const Vec3 d = (min - p).cwiseMax(Vec3::Zero()).cwiseMax(p - max);
        return d.squaredNorm();
    }
};

Aabb bounding_box(const TriMesh& mesh);

/// Unnormalized face normal (cross product of the two edges from corner 0).
Vec3 face_cross(const TriMesh& mesh, int face);

double face_area(const TriMesh& mesh, int face);

bool is_degenerate(const TriMesh& mesh, int face);

/// Unit normal of a face. Throws DegenerateFaceError on near-zero area.
Vec3 face_normal(const TriMesh& mesh, int face);

/// Mean length over all unique edges.
double mean_edge_length(const TriMesh& mesh);

/// Concatenates b after a (indices offset). Attributes are kept only when
/// both meshes carry them.
TriMesh concatenate(const TriMesh& a, const TriMesh& b);

/// Copy of the mesh with the faces listed (in order) and only the vertices
/// they reference. `vertex_map` receives old->new indices (-1 if dropped).
TriMesh submesh(const TriMesh& mesh, const std::vector<int>& faces,
                std::vector<int>* vertex_map = nullptr);

}  // namespace craftmesh
