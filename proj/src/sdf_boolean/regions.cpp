#include "craftmesh/regions.hpp"

#include "craftmesh/distance.hpp"
#include "craftmesh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace craftmesh {

namespace {

/// Uniform hash grid over seam points with cell size equal to the query
/// radius, so every point within the radius lies in the 27 cells around.
class PointHash {
public:
    PointHash(const std::vector<Vec3>& points, double cell) : points_(points), cell_(cell) {
        for (std::size_t i = 0; i < points.size(); ++i) buckets_[key(cell_of(points[i]))].push_back(int(i));
    }

    /// True iff some point is strictly closer than `radius` (<= cell).
    bool any_within(const Vec3& p, double radius) const {
        const auto c = cell_of(p);
        for (long dz = -1; dz <= 1; ++dz) {
            for (long dy = -1; dy <= 1; ++dy) {
                for (long dx = -1; dx <= 1; ++dx) {
                    const auto it = buckets_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
                    if (it == buckets_.end()) continue;
                    for (int i : it->second) {
                        if ((points_[i] - p).norm() < radius) return true;
                    }
                }
            }
        }
        return false;
    }

private:
    std::array<long, 3> cell_of(const Vec3& p) const {
        return {static_cast<long>(std::floor(p.x() / cell_)), static_cast<long>(std::floor(p.y() / cell_)),
                static_cast<long>(std::floor(p.z() / cell_))};
    }
    static std::uint64_t key(const std::array<long, 3>& c) {
        std::uint64_t h = 1469598103934665603ull;
        for (long v : c) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }

    const std::vector<Vec3>& points_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

void check_partition(const std::vector<int>& a, const std::vector<int>& b, std::size_t n) {
    std::vector<char> seen(n, 0);
    for (const auto* list : {&a, &b}) {
        for (int f : *list) {
            if (f < 0 || static_cast<std::size_t>(f) >= n || seen[f]) {
                throw ValidationError("new/preserved face sets do not partition the faces");
            }
            seen[f] = 1;
        }
    }
    if (a.size() + b.size() != n) throw ValidationError("new/preserved face sets miss faces");
}

}  // namespace

void RegionSelection::validate(std::size_t face_count) const {
    if (!(eps1 < eps0)) throw ValidationError("eps1 must be smaller than eps0");
    if (!std::includes(t_in.begin(), t_in.end(), t_opt.begin(), t_opt.end())) {
        throw ValidationError("t_opt is not a subset of t_in");
    }
    if (!new_faces.empty() || !preserved_faces.empty()) {
        check_partition(new_faces, preserved_faces, face_count);
    }
}

RegionSelection extract_regions(const TriMesh& mesh_t, const TriMesh& mesh_e,
                                const std::vector<Vec3>& seam, double eps0, double eps1) {
    if (!(eps1 > 0.0) || !(eps1 < eps0)) {
        throw ParameterError("region radii need 0 < eps1 < eps0 (got eps0=" + std::to_string(eps0) +
                             ", eps1=" + std::to_string(eps1) + ")");
    }
    RegionSelection r;
    r.seam_vertices = seam;
    r.eps0 = eps0;
    r.eps1 = eps1;
    if (seam.empty()) return r;

    const PointHash hash(seam, eps0);
    for (std::size_t v = 0; v < mesh_t.vertices.size(); ++v) {
        if (!hash.any_within(mesh_t.vertices[v], eps0)) continue;
        r.t_in.push_back(static_cast<int>(v));
        if (hash.any_within(mesh_t.vertices[v], eps1)) r.t_opt.push_back(static_cast<int>(v));
    }
    for (std::size_t v = 0; v < mesh_e.vertices.size(); ++v) {
        if (hash.any_within(mesh_e.vertices[v], eps0)) r.e_in.push_back(static_cast<int>(v));
    }
    return r;
}

FaceClassification classify_new_vs_preserved(const TriMesh& merged, const TriMesh& original,
                                             double delta) {
    FaceClassification out;
    if (original.faces.empty()) {
        for (std::size_t f = 0; f < merged.faces.size(); ++f) out.new_faces.push_back(int(f));
        return out;
    }
    const DistanceIndex index(original);
    std::vector<char> near(merged.vertices.size());
    for (std::size_t v = 0; v < merged.vertices.size(); ++v) {
        near[v] = index.unsigned_distance(merged.vertices[v]) <= delta;
    }
    for (std::size_t f = 0; f < merged.faces.size(); ++f) {
        const Face& t = merged.faces[f];
        (near[t[0]] && near[t[1]] && near[t[2]] ? out.preserved_faces : out.new_faces)
            .push_back(static_cast<int>(f));
    }
    return out;
}

std::vector<int> faces_touching(const TriMesh& mesh, const std::vector<int>& vertices) {
    std::vector<char> mark(mesh.vertices.size(), 0);
    for (int v : vertices) mark[v] = 1;
    std::vector<int> out;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& t = mesh.faces[f];
        if (mark[t[0]] || mark[t[1]] || mark[t[2]]) out.push_back(static_cast<int>(f));
    }
    return out;
}

}  // namespace craftmesh
