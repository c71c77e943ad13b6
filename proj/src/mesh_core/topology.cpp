#include "craftmesh/topology.hpp"

#include "craftmesh/errors.hpp"

#include <algorithm>
#include <numeric>

namespace craftmesh {

std::uint64_t Topology::key(int u, int v) {
    const auto lo = static_cast<std::uint32_t>(std::min(u, v));
    const auto hi = static_cast<std::uint32_t>(std::max(u, v));
    return (std::uint64_t{lo} << 32) | hi;
}

Topology::Topology(const TriMesh& mesh)
    : vertex_count_(mesh.vertices.size()),
      face_count_(mesh.faces.size()),
      vertex_faces_(mesh.vertices.size()),
      vertex_neighbors_(mesh.vertices.size()),
      face_edges_(mesh.faces.size()),
      boundary_vertex_(mesh.vertices.size(), 0) {
    edge_index_.reserve(mesh.faces.size() * 2);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& t = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            vertex_faces_[t[c]].push_back(static_cast<int>(f));
            const int u = t[c];
            const int v = t[(c + 1) % 3];
            auto [it, inserted] = edge_index_.try_emplace(key(u, v), static_cast<int>(edges_.size()));
            if (inserted) edges_.push_back(Edge{std::min(u, v), std::max(u, v), {}});
            Edge& e = edges_[it->second];
            e.faces.push_back(static_cast<int>(f));
            if (e.faces.size() > 2) {
                throw TopologyError("edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                                    ") has more than two incident faces");
            }
            face_edges_[f].push_back(it->second);
        }
    }
    for (const Edge& e : edges_) {
        vertex_neighbors_[e.a].push_back(e.b);
        vertex_neighbors_[e.b].push_back(e.a);
        if (e.boundary()) {
            ++boundary_edge_count_;
            boundary_vertex_[e.a] = 1;
            boundary_vertex_[e.b] = 1;
        }
    }
    for (auto& n : vertex_neighbors_) std::sort(n.begin(), n.end());
}

int Topology::find_edge(int u, int v) const {
    const auto it = edge_index_.find(key(u, v));
    return it == edge_index_.end() ? -1 : it->second;
}

int Topology::euler_characteristic() const {
    std::size_t used = 0;
    for (const auto& f : vertex_faces_) used += f.empty() ? 0 : 1;
    return static_cast<int>(used) - static_cast<int>(edges_.size()) +
           static_cast<int>(face_count_);
}

std::vector<int> Topology::face_components(int* count) const {
    std::vector<int> parent(face_count_);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const Edge& e : edges_) {
        if (e.faces.size() == 2) {
            const int a = find(e.faces[0]);
            const int b = find(e.faces[1]);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::vector<int> label(face_count_, -1);
    std::vector<int> root_label(face_count_, -1);
    int next = 0;
    for (std::size_t f = 0; f < face_count_; ++f) {
        const int r = find(static_cast<int>(f));
        if (root_label[r] < 0) root_label[r] = next++;
        label[f] = root_label[r];
    }
    if (count) *count = next;
    return label;
}

}  // namespace craftmesh
