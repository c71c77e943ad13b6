#include "craftmesh/fusion.hpp"

#include "craftmesh/errors.hpp"
#include "craftmesh/topology.hpp"

#include <algorithm>
#include <tuple>

namespace craftmesh {

namespace {

constexpr int kMaxPasses = 64;
// Collapses may turn an incident face normal by at most acos of this.
constexpr double kMinTurnCos = 0.866;

class Remesher {
public:
    Remesher(const TriMesh& mesh, const std::vector<int>& region)
        : pos_(mesh.vertices), faces_(mesh.faces), face_alive_(mesh.faces.size(), 1),
          vertex_alive_(mesh.vertices.size(), 1), in_region_(mesh.vertices.size(), 0) {
        if (mesh.vertex_colors) colors_ = *mesh.vertex_colors;
        origin_.resize(pos_.size());
        for (std::size_t v = 0; v < pos_.size(); ++v) origin_[v] = static_cast<int>(v);
        for (int v : region) in_region_[v] = 1;
    }

    int split_long(double max_edge) {
        int total = 0;
        for (int pass = 0; pass < kMaxPasses; ++pass) {
            const Topology topo(current());
            std::vector<std::tuple<double, int, int, int>> candidates;  // -length, a, b, edge
            for (std::size_t e = 0; e < topo.edges().size(); ++e) {
                const Edge& edge = topo.edges()[e];
                if (!in_region_[edge.a] || !in_region_[edge.b]) continue;
                const double len = (pos_[edge.a] - pos_[edge.b]).norm();
                if (len > max_edge) candidates.emplace_back(-len, edge.a, edge.b, static_cast<int>(e));
            }
            if (candidates.empty()) break;
            std::sort(candidates.begin(), candidates.end());
            std::vector<char> touched(faces_.size(), 0);
            int done = 0;
            for (const auto& [neg_len, a, b, e] : candidates) {
                const std::vector<int>& adj = topo.edges()[e].faces;
                if (std::any_of(adj.begin(), adj.end(), [&](int f) { return touched[f]; })) continue;
                const int m = add_vertex(0.5 * (pos_[a] + pos_[b]), a, b);
                for (int f : adj) {
                    touched[f] = 1;
                    split_face(f, a, b, m);
                }
                ++done;
            }
            total += done;
            if (done == 0) break;
        }
        return total;
    }

    int collapse_short(double min_edge, double max_edge) {
        int total = 0;
        for (int pass = 0; pass < kMaxPasses; ++pass) {
            const TriMesh mesh = current();
            const Topology topo(mesh);
            rebuild_incidence();
            std::vector<std::tuple<double, int, int>> candidates;
            for (const Edge& edge : topo.edges()) {
                if (edge.boundary() || !in_region_[edge.a] || !in_region_[edge.b]) continue;
                if (topo.is_boundary_vertex(edge.a) || topo.is_boundary_vertex(edge.b)) continue;
                const double len = (pos_[edge.a] - pos_[edge.b]).norm();
                if (len < min_edge) candidates.emplace_back(len, edge.a, edge.b);
            }
            if (candidates.empty()) break;
            std::sort(candidates.begin(), candidates.end());
            std::vector<char> dirty(pos_.size(), 0);
            int done = 0;
            for (const auto& [len, a, b] : candidates) {
                if (dirty[a] || dirty[b] || !vertex_alive_[a] || !vertex_alive_[b]) continue;
                if (try_collapse(a, b, max_edge, dirty)) ++done;
            }
            total += done;
            if (done == 0) break;
        }
        return total;
    }

    RemeshResult finish(int splits, int collapses) const {
        RemeshResult out;
        out.splits = splits;
        out.collapses = collapses;
        std::vector<int> remap(pos_.size(), -1);
        for (std::size_t v = 0; v < pos_.size(); ++v) {
            if (!vertex_alive_[v]) continue;
            remap[v] = static_cast<int>(out.mesh.vertices.size());
            out.mesh.vertices.push_back(pos_[v]);
            out.vertex_origin.push_back(origin_[v]);
            if (in_region_[v]) out.region.push_back(remap[v]);
        }
        if (!colors_.empty()) {
            out.mesh.vertex_colors.emplace();
            for (std::size_t v = 0; v < pos_.size(); ++v) {
                if (vertex_alive_[v]) out.mesh.vertex_colors->push_back(colors_[v]);
            }
        }
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            if (!face_alive_[f]) continue;
            const Face& t = faces_[f];
            out.mesh.faces.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
        }
        return out;
    }

private:
    // Live faces only; live_ids_ maps their positions back to faces_.
    TriMesh current() const {
        TriMesh live;
        live.vertices = pos_;
        live_ids_.clear();
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            if (face_alive_[f]) {
                live.faces.push_back(faces_[f]);
                live_ids_.push_back(static_cast<int>(f));
            }
        }
        return live;
    }

    int add_vertex(const Vec3& p, int a, int b) {
        pos_.push_back(p);
        origin_.push_back(-1);
        vertex_alive_.push_back(1);
        in_region_.push_back(1);
        if (!colors_.empty()) colors_.push_back(0.5 * (colors_[a] + colors_[b]));
        return static_cast<int>(pos_.size() - 1);
    }

    // `f` is an index into the live face list of the Topology it came from.
    void split_face(int live_face, int a, int b, int m) {
        const int f = live_ids_[live_face];
        const Face t = faces_[f];
        int i = 0;
        while (!((t[i] == a && t[(i + 1) % 3] == b) || (t[i] == b && t[(i + 1) % 3] == a))) ++i;
        const int u = t[i];
        const int v = t[(i + 1) % 3];
        const int w = t[(i + 2) % 3];
        faces_[f] = {u, m, w};
        faces_.push_back({m, v, w});
        face_alive_.push_back(1);
    }

    void rebuild_incidence() {
        incident_.assign(pos_.size(), {});
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            if (!face_alive_[f]) continue;
            for (int v : faces_[f]) incident_[v].push_back(static_cast<int>(f));
        }
    }

    std::vector<int> neighbours(int v) const {
        std::vector<int> out;
        for (int f : incident_[v]) {
            if (!face_alive_[f]) continue;
            for (int u : faces_[f]) {
                if (u != v) out.push_back(u);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    bool try_collapse(int a, int b, double max_edge, std::vector<char>& dirty) {
        const std::vector<int> na = neighbours(a);
        const std::vector<int> nb = neighbours(b);
        std::vector<int> common;
        std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
        if (common.size() != 2) return false;
        for (int c : common) {
            if (neighbours(c).size() <= 3) return false;
        }
        const Vec3 m = 0.5 * (pos_[a] + pos_[b]);
        std::vector<int> shared;
        for (int v : {a, b}) {
            for (int f : incident_[v]) {
                if (!face_alive_[f]) continue;
                const Face& t = faces_[f];
                const bool has_a = t[0] == a || t[1] == a || t[2] == a;
                const bool has_b = t[0] == b || t[1] == b || t[2] == b;
                if (has_a && has_b) {
                    if (v == a) shared.push_back(f);
                    continue;
                }
                Vec3 p[3];
                for (int k = 0; k < 3; ++k) p[k] = (t[k] == a || t[k] == b) ? m : pos_[t[k]];
                const Vec3 before = (pos_[t[1]] - pos_[t[0]]).cross(pos_[t[2]] - pos_[t[0]]);
                const Vec3 after = (p[1] - p[0]).cross(p[2] - p[0]);
                if (after.squaredNorm() <= 4.0 * kDegenerateAreaSq) return false;
                if (before.dot(after) < kMinTurnCos * before.norm() * after.norm()) return false;
                for (int k = 0; k < 3; ++k) {
                    if ((p[k] - p[(k + 1) % 3]).norm() > max_edge) return false;
                }
            }
        }
        for (int f : shared) face_alive_[f] = 0;
        for (int f : incident_[b]) {
            if (!face_alive_[f]) continue;
            for (int& v : faces_[f]) {
                if (v == b) v = a;
            }
            incident_[a].push_back(f);
        }
        incident_[b].clear();
        std::erase_if(incident_[a], [&](int f) { return !face_alive_[f]; });
        std::sort(incident_[a].begin(), incident_[a].end());
        incident_[a].erase(std::unique(incident_[a].begin(), incident_[a].end()), incident_[a].end());
        pos_[a] = m;
        if (!colors_.empty()) colors_[a] = 0.5 * (colors_[a] + colors_[b]);
        origin_[a] = -1;
        vertex_alive_[b] = 0;
        dirty[a] = dirty[b] = 1;
        for (int u : neighbours(a)) dirty[u] = 1;
        return true;
    }

    std::vector<Vec3> pos_;
    std::vector<Vec3> colors_;
    std::vector<Face> faces_;
    std::vector<char> face_alive_;
    std::vector<char> vertex_alive_;
    std::vector<char> in_region_;
    std::vector<int> origin_;
    std::vector<std::vector<int>> incident_;
    mutable std::vector<int> live_ids_;
};

}  // namespace

RemeshResult remesh_region(const TriMesh& mesh, const std::vector<int>& region, double min_edge,
                           double max_edge) {
    if (!(min_edge < max_edge)) throw ParameterError("remesh needs min_edge < max_edge");
    Remesher r(mesh, region);
    const int splits = r.split_long(max_edge);
    const int collapses = r.collapse_short(min_edge, max_edge);
    if (splits == 0 && collapses == 0) {
        RemeshResult same;
        same.mesh = mesh;
        same.region = region;
        same.vertex_origin.resize(mesh.vertices.size());
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) same.vertex_origin[v] = static_cast<int>(v);
        return same;
    }
    return r.finish(splits, collapses);
}

}  // namespace craftmesh
