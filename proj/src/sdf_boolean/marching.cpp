#include "craftmesh/sdf.hpp"

#include <algorithm>
#include <unordered_map>

namespace craftmesh {

namespace {

// Kuhn split of the unit cell: one tetrahedron per axis permutation, each
// walking from corner 0 to corner 7. Corners are bit masks (x=1, y=2, z=4).
constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                             {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

class Extractor {
public:
    explicit Extractor(const SdfGrid& grid) : grid_(grid) {
        // Exact zeros would put several crossings on one node; nudge them to
        // the positive side so every crossing point is distinct.
        values_ = grid.values;
        for (double& v : values_) {
            if (v == 0.0) v = 1e-9 * grid.spacing;
        }
        edge_vertex_.reserve(grid.node_count() / 4);
    }

    SurfaceExtraction run() {
        SurfaceExtraction out;
        const auto& d = grid_.dims;
        for (int k = 0; k + 1 < d[2]; ++k) {
            for (int j = 0; j + 1 < d[1]; ++j) {
                for (int i = 0; i + 1 < d[0]; ++i) cell(i, j, k);
            }
        }
        for (int k = 0; k < d[2]; ++k) {
            for (int j = 0; j < d[1]; ++j) {
                for (int i = 0; i < d[0]; ++i) {
                    const bool border = i == 0 || j == 0 || k == 0 || i == d[0] - 1 ||
                                        j == d[1] - 1 || k == d[2] - 1;
                    if (border && values_[grid_.index(i, j, k)] < 0.0) out.touches_boundary = true;
                }
            }
        }
        out.mesh.vertices = std::move(vertices_);
        out.mesh.faces = std::move(faces_);
        return out;
    }

private:
    void cell(int i, int j, int k) {
        std::size_t node[8];
        double val[8];
        bool any_neg = false;
        bool any_pos = false;
        for (int c = 0; c < 8; ++c) {
            node[c] = grid_.index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
            val[c] = values_[node[c]];
            (val[c] < 0.0 ? any_neg : any_pos) = true;
        }
        if (!any_neg || !any_pos) return;
        const Vec3 base = grid_.position(i, j, k);
        for (const auto& tet : kTets) {
            std::array<int, 4> c{tet[0], tet[1], tet[2], tet[3]};
            tetrahedron(base, c, node, val);
        }
    }

    Vec3 corner_position(const Vec3& base, int c) const {
        return base + grid_.spacing * Vec3(c & 1, (c >> 1) & 1, (c >> 2) & 1);
    }

    int crossing(const Vec3& base, int ca, int cb, const std::size_t* node, const double* val) {
        const std::size_t na = node[ca];
        const std::size_t nb = node[cb];
        const std::uint64_t key = na < nb ? (std::uint64_t(na) << 32) | nb : (std::uint64_t(nb) << 32) | na;
        const auto it = edge_vertex_.find(key);
        if (it != edge_vertex_.end()) return it->second;
        // Interpolate from the lower node index so the point is independent
        // of which cell creates it.
        int lo = ca;
        int hi = cb;
        if (na > nb) std::swap(lo, hi);
        const double t = val[lo] / (val[lo] - val[hi]);
        const Vec3 pa = corner_position(base, lo);
        const Vec3 pb = corner_position(base, hi);
        const int id = static_cast<int>(vertices_.size());
        vertices_.push_back(pa + t * (pb - pa));
        edge_vertex_.emplace(key, id);
        return id;
    }

    void emit(int a, int b, int c, const Vec3& gradient) {
        const Vec3 n = (vertices_[b] - vertices_[a]).cross(vertices_[c] - vertices_[a]);
        if (n.dot(gradient) < 0.0) std::swap(b, c);
        faces_.push_back({a, b, c});
    }

    void tetrahedron(const Vec3& base, const std::array<int, 4>& c, const std::size_t* node,
                     const double* val) {
        int neg[4];
        int pos[4];
        int nn = 0;
        int np = 0;
        for (int v : c) (val[v] < 0.0 ? neg[nn++] : pos[np++]) = v;
        if (nn == 0 || np == 0) return;

        // Gradient of the linear interpolant; the surface normal points along it.
        Eigen::Matrix3d edges;
        Vec3 diffs;
        const Vec3 p0 = corner_position(base, c[0]);
        for (int r = 0; r < 3; ++r) {
            edges.row(r) = (corner_position(base, c[r + 1]) - p0).transpose();
            diffs[r] = val[c[r + 1]] - val[c[0]];
        }
        const Vec3 gradient = edges.partialPivLu().solve(diffs);

        if (nn == 1 || np == 1) {
            const bool lone_neg = nn == 1;
            const int lone = lone_neg ? neg[0] : pos[0];
            const int* others = lone_neg ? pos : neg;
            emit(crossing(base, lone, others[0], node, val), crossing(base, lone, others[1], node, val),
                 crossing(base, lone, others[2], node, val), gradient);
            return;
        }
        // Two and two: the four crossings form a quad a0-b0, a0-b1, a1-b1, a1-b0.
        const int q0 = crossing(base, neg[0], pos[0], node, val);
        const int q1 = crossing(base, neg[0], pos[1], node, val);
        const int q2 = crossing(base, neg[1], pos[1], node, val);
        const int q3 = crossing(base, neg[1], pos[0], node, val);
        emit(q0, q1, q2, gradient);
        emit(q0, q2, q3, gradient);
    }

    const SdfGrid& grid_;
    std::vector<double> values_;
    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::unordered_map<std::uint64_t, int> edge_vertex_;
};

}  // namespace

SurfaceExtraction marching_cubes(const SdfGrid& grid) {
    grid.validate();
    return Extractor(grid).run();
}

}  // namespace craftmesh
