#include "craftmesh/distance.hpp"

#include "craftmesh/errors.hpp"
#include "craftmesh/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace craftmesh {

namespace {

constexpr int kLeafSize = 4;

}  // namespace

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        return a + (d1 / (d1 - d3)) * ab;
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        return a + (d2 / (d2 - d6)) * ac;
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    }

    const double denom = va + vb + vc;
    if (denom == 0.0) {
        // Degenerate triangle: fall back to the nearest of its edges.
        auto seg = [&](const Vec3& s, const Vec3& t) {
            const Vec3 d = t - s;
            const double len2 = d.squaredNorm();
            const double u = len2 > 0.0 ? std::clamp((p - s).dot(d) / len2, 0.0, 1.0) : 0.0;
            return Vec3(s + u * d);
        };
        Vec3 best = seg(a, b);
        for (const Vec3& q : {seg(b, c), seg(c, a)}) {
            if ((q - p).squaredNorm() < (best - p).squaredNorm()) best = q;
        }
        return best;
    }
    const double v = vb / denom;
    const double w = vc / denom;
    return a + ab * v + ac * w;
}

double triangle_winding(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    // Van Oosterom-Strackee solid angle.
    const Vec3 x = a - p;
    const Vec3 y = b - p;
    const Vec3 z = c - p;
    const double lx = x.norm();
    const double ly = y.norm();
    const double lz = z.norm();
    const double num = x.dot(y.cross(z));
    const double den = lx * ly * lz + x.dot(y) * lz + y.dot(z) * lx + z.dot(x) * ly;
    return std::atan2(num, den) / (2.0 * std::numbers::pi);
}

DistanceIndex::DistanceIndex(const TriMesh& mesh) : vertices_(mesh.vertices), faces_(mesh.faces) {
    if (faces_.empty()) throw ParameterError("distance index needs a non-empty mesh");
    closed_ = Topology(mesh).is_closed();

    std::vector<Vec3> centroids(faces_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        const Face& t = faces_[f];
        centroids[f] = (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
    }
    order_.resize(faces_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f) order_[f] = static_cast<int>(f);
    nodes_.reserve(2 * faces_.size() / kLeafSize + 2);
    build(0, static_cast<int>(faces_.size()), centroids);
    box_slack_ = 1e-9 * std::max(nodes_[0].box.diagonal(), 1e-300);
}

int DistanceIndex::build(int begin, int end, const std::vector<Vec3>& centroids) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Aabb box;
    Aabb cbox;
    for (int i = begin; i < end; ++i) {
        const Face& t = faces_[order_[i]];
        for (int c = 0; c < 3; ++c) box.extend(vertices_[t[c]]);
        cbox.extend(centroids[order_[i]]);
    }
    nodes_[id].box = box;
    nodes_[id].begin = begin;
    nodes_[id].end = end;

    if (end - begin > kLeafSize) {
        int axis = 0;
        cbox.extent().maxCoeff(&axis);
        const int mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int l, int r) {
                             if (centroids[l][axis] != centroids[r][axis]) {
                                 return centroids[l][axis] < centroids[r][axis];
                             }
                             return l < r;
                         });
        const int left = build(begin, mid, centroids);
        const int right = build(mid, end, centroids);
        nodes_[id].left = left;
        nodes_[id].right = right;
    }

    // Oriented edges that do not cancel within the subtree form its boundary.
    std::map<std::pair<int, int>, int> count;
    for (int i = begin; i < end; ++i) {
        const Face& t = faces_[order_[i]];
        for (int c = 0; c < 3; ++c) {
            const int u = t[c];
            const int v = t[(c + 1) % 3];
            if (u < v) {
                ++count[{u, v}];
            } else {
                --count[{v, u}];
            }
        }
    }
    auto& boundary = nodes_[id].boundary;
    for (const auto& [edge, n] : count) {
        for (int k = 0; k < std::abs(n); ++k) {
            boundary.push_back(n > 0 ? std::array<int, 2>{edge.first, edge.second}
                                     : std::array<int, 2>{edge.second, edge.first});
        }
    }
    return id;
}

void DistanceIndex::closest_recursive(int node_id, const Vec3& p, ClosestHit& best) const {
    const Node& node = nodes_[node_id];
    if (node.is_leaf()) {
        for (int i = node.begin; i < node.end; ++i) {
            const int f = order_[i];
            const Face& t = faces_[f];
            const Vec3 q = closest_point_on_triangle(p, vertices_[t[0]], vertices_[t[1]],
                                                     vertices_[t[2]]);
            const double d2 = (q - p).squaredNorm();
            if (d2 < best.squared_distance || (d2 == best.squared_distance && f < best.face)) {
                best = ClosestHit{f, q, d2};
            }
        }
        return;
    }
    const double dl = nodes_[node.left].box.squared_distance(p);
    const double dr = nodes_[node.right].box.squared_distance(p);
    const int first = dl <= dr ? node.left : node.right;
    const int second = dl <= dr ? node.right : node.left;
    const double dfirst = std::min(dl, dr);
    const double dsecond = std::max(dl, dr);
    if (dfirst <= best.squared_distance) closest_recursive(first, p, best);
    if (dsecond <= best.squared_distance) closest_recursive(second, p, best);
}

ClosestHit DistanceIndex::closest(const Vec3& p) const {
    ClosestHit best;
    best.squared_distance = std::numeric_limits<double>::infinity();
    closest_recursive(0, p, best);
    return best;
}

double DistanceIndex::unsigned_distance(const Vec3& p) const {
    return std::sqrt(closest(p).squared_distance);
}

double DistanceIndex::leaf_winding(const Node& node, const Vec3& p) const {
    double w = 0.0;
    for (int i = node.begin; i < node.end; ++i) {
        const Face& t = faces_[order_[i]];
        w += triangle_winding(p, vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    }
    return w;
}

double DistanceIndex::winding_recursive(int node_id, const Vec3& p) const {
    const Node& node = nodes_[node_id];
    const auto face_count = static_cast<std::size_t>(node.end - node.begin);
    if (node.box.squared_distance(p) > box_slack_ * box_slack_ &&
        node.boundary.size() < face_count) {
        // The subtree plus a fan over its boundary is a closed surface inside
        // the box, whose winding number at an outside point is zero.
        if (node.boundary.empty()) return 0.0;
        const Vec3& anchor = vertices_[node.boundary.front()[0]];
        double w = 0.0;
        for (const auto& e : node.boundary) {
            w += triangle_winding(p, anchor, vertices_[e[0]], vertices_[e[1]]);
        }
        return w;
    }
    if (node.is_leaf()) return leaf_winding(node, p);
    return winding_recursive(node.left, p) + winding_recursive(node.right, p);
}

double DistanceIndex::winding_number(const Vec3& p) const { return winding_recursive(0, p); }

SignedDistance DistanceIndex::signed_distance(const Vec3& p) const {
    const double d = unsigned_distance(p);
    if (!closed_) return {d, false};
    if (d == 0.0) return {0.0, true};
    return {winding_number(p) > 0.5 ? -d : d, true};
}

std::vector<std::vector<int>> DistanceIndex::leaf_faces() const {
    std::vector<std::vector<int>> leaves;
    for (const Node& node : nodes_) {
        if (!node.is_leaf()) continue;
        leaves.emplace_back(order_.begin() + node.begin, order_.begin() + node.end);
    }
    return leaves;
}

SignedDistance signed_distance(const TriMesh& mesh, const DistanceIndex& index, const Vec3& point) {
    if (mesh.faces.empty()) throw ParameterError("signed distance to an empty mesh");
    if (mesh.faces.size() != index.face_count()) {
        throw ParameterError("distance index was built for a different mesh");
    }
    return index.signed_distance(point);
}

}  // namespace craftmesh
