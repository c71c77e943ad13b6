#include "craftmesh/fusion.hpp"

#include "craftmesh/topology.hpp"

namespace craftmesh {

namespace {

std::vector<int> slots_for(std::size_t vertex_count, const std::vector<int>& free_vertices) {
    std::vector<int> slot(vertex_count, -1);
    for (std::size_t i = 0; i < free_vertices.size(); ++i) slot[free_vertices[i]] = static_cast<int>(i);
    return slot;
}

}  // namespace

LossGradient normal_loss_and_grad(const TriMesh& mesh, const FaceTargets& targets,
                                  const std::vector<int>& free_vertices) {
    LossGradient out;
    out.gradient.assign(free_vertices.size(), Vec3::Zero());
    const std::vector<int> slot = slots_for(mesh.vertices.size(), free_vertices);
    for (std::size_t f = 0; f < mesh.faces.size() && f < targets.size(); ++f) {
        const double w = targets.weight[f];
        if (w <= 0.0) continue;
        if (is_degenerate(mesh, static_cast<int>(f))) {
            ++out.skipped;
            continue;
        }
        const Face& t = mesh.faces[f];
        const Vec3 c = face_cross(mesh, static_cast<int>(f));
        const double len = c.norm();
        const Vec3 n = c / len;
        const Vec3 d = n - targets.target(static_cast<int>(f));
        out.value += w * d.squaredNorm();
        if (slot[t[0]] < 0 && slot[t[1]] < 0 && slot[t[2]] < 0) continue;

        // dL/dc = (I - n n^T) / |c| * dL/dn with c = e1 x e2.
        const Vec3 dn = 2.0 * w * d;
        const Vec3 g = (dn - n * n.dot(dn)) / len;
        const Vec3 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
        const Vec3 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
        const Vec3 g1 = e2.cross(g);
        const Vec3 g2 = g.cross(e1);
        const Vec3 corner[3] = {-(g1 + g2), g1, g2};
        for (int k = 0; k < 3; ++k) {
            if (slot[t[k]] >= 0) out.gradient[slot[t[k]]] += corner[k];
        }
    }
    return out;
}

LossGradient smoothness_loss_and_grad(const TriMesh& mesh, const std::vector<int>& free_vertices) {
    LossGradient out;
    out.gradient.assign(free_vertices.size(), Vec3::Zero());
    const std::vector<int> slot = slots_for(mesh.vertices.size(), free_vertices);
    const Topology topo(mesh);
    for (std::size_t i = 0; i < free_vertices.size(); ++i) {
        const int v = free_vertices[i];
        const std::vector<int>& nb = topo.neighbors_of(v);
        if (nb.empty()) {
            ++out.skipped;
            continue;
        }
        Vec3 mean = Vec3::Zero();
        for (int u : nb) mean += mesh.vertices[u];
        mean /= static_cast<double>(nb.size());
        const Vec3 r = mesh.vertices[v] - mean;
        out.value += r.squaredNorm();
        out.gradient[i] += 2.0 * r;
        const Vec3 share = 2.0 * r / static_cast<double>(nb.size());
        for (int u : nb) {
            if (slot[u] >= 0) out.gradient[slot[u]] -= share;
        }
    }
    return out;
}

}  // namespace craftmesh
