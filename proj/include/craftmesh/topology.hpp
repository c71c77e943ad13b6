#pragma once

#include "craftmesh/mesh.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace craftmesh {

struct Edge {
    int a = 0;  ///< smaller vertex index
    int b = 0;  ///< larger vertex index
    std::vector<int> faces;
    bool boundary() const { return faces.size() == 1; }
};

/// Connectivity derived from a TriMesh face list.
class Topology {
public:
    /// Throws TopologyError if an edge has more than two incident faces.
    explicit Topology(const TriMesh& mesh);

    const std::vector<std::vector<int>>& vertex_faces() const { return vertex_faces_; }
    const std::vector<int>& faces_of(int v) const { return vertex_faces_[v]; }
    const std::vector<int>& neighbors_of(int v) const { return vertex_neighbors_[v]; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Index into edges(), or -1 if (u,v) is not an edge.
    int find_edge(int u, int v) const;
    bool is_closed() const { return boundary_edge_count_ == 0 && !edges_.empty(); }
    std::size_t boundary_edge_count() const { return boundary_edge_count_; }
    bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
    int euler_characteristic() const;
    /// Connected components over face adjacency (shared edges); returns a
    /// component id per face and writes the count.
    std::vector<int> face_components(int* count) const;

private:
    static std::uint64_t key(int u, int v);

    std::size_t vertex_count_ = 0;
    std::size_t face_count_ = 0;
    std::vector<std::vector<int>> vertex_faces_;
    std::vector<std::vector<int>> vertex_neighbors_;
    std::vector<Edge> edges_;
    std::unordered_map<std::uint64_t, int> edge_index_;
    std::vector<std::vector<int>> face_edges_;
    std::vector<char> boundary_vertex_;
    std::size_t boundary_edge_count_ = 0;
};

}  // namespace craftmesh
