#include "craftmesh/texture.hpp"

#include "craftmesh/errors.hpp"
#include "craftmesh/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace craftmesh {

namespace {

// Boundary loops of a mesh, each as a vertex cycle in face orientation
// (interior on the left).
std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh, const Topology& topo, int component) {
    std::vector<int> next(mesh.vertices.size(), -1);
    for (const Edge& e : topo.edges()) {
        if (!e.boundary()) continue;
        const Face& t = mesh.faces[e.faces[0]];
        int from = e.a;
        int to = e.b;
        for (int k = 0; k < 3; ++k) {
            if (t[k] == e.b && t[(k + 1) % 3] == e.a) std::swap(from, to);
        }
        if (next[from] >= 0) {
            std::ostringstream msg;
            msg << "new-region component " << component << " is not a manifold disk: boundary vertex "
                << from << " is pinched";
            throw TopologyError(msg.str());
        }
        next[from] = to;
    }
    std::vector<std::vector<int>> loops;
    std::vector<char> seen(mesh.vertices.size(), 0);
    for (std::size_t v = 0; v < next.size(); ++v) {
        if (next[v] < 0 || seen[v]) continue;
        std::vector<int> loop;
        int u = static_cast<int>(v);
        while (!seen[u]) {
            seen[u] = 1;
            loop.push_back(u);
            u = next[u];
            if (u < 0) throw TopologyError("open boundary chain in new-region component");
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

std::vector<Vec2> embed_disk(const TriMesh& disk, int component) {
    const Topology topo(disk);
    const auto loops = boundary_loops(disk, topo, component);
    const int chi = topo.euler_characteristic();
    const int b = static_cast<int>(loops.size());
    if (b != 1 || chi != 1) {
        std::ostringstream msg;
        msg << "new-region component " << component << " is not a disk: genus " << (2 - chi - b) / 2 << ", "
            << b << " boundary loop" << (b == 1 ? "" : "s") << " (Euler characteristic " << chi << ")";
        throw TopologyError(msg.str());
    }
    const std::vector<int>& loop = loops[0];
    const std::size_t n = disk.vertices.size();
    std::vector<Vec2> uv(n, Vec2::Zero());
    std::vector<char> fixed(n, 0);
    double perimeter = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        perimeter += (disk.vertices[loop[(i + 1) % loop.size()]] - disk.vertices[loop[i]]).norm();
    }
    if (!(perimeter > 0.0)) throw NumericError("new-region boundary loop has zero length");
    double walked = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const double angle = 2.0 * std::numbers::pi * walked / perimeter;
        uv[loop[i]] = Vec2(std::cos(angle), std::sin(angle));
        fixed[loop[i]] = 1;
        walked += (disk.vertices[loop[(i + 1) % loop.size()]] - disk.vertices[loop[i]]).norm();
    }

    if (loop.size() < n) {
        std::vector<linalg::Triplet> entries;
        for (const Edge& e : topo.edges()) {
            entries.push_back({e.a, e.b, -1.0});
            entries.push_back({e.b, e.a, -1.0});
            entries.push_back({e.a, e.a, 1.0});
            entries.push_back({e.b, e.b, 1.0});
        }
        const auto lap = linalg::SparseMatrix::from_triplets(static_cast<int>(n), std::move(entries));
        std::vector<std::vector<double>> zero(2, std::vector<double>(n, 0.0));
        std::vector<std::vector<double>> values(2, std::vector<double>(n, 0.0));
        for (std::size_t v = 0; v < n; ++v) {
            values[0][v] = uv[v].x();
            values[1][v] = uv[v].y();
        }
        const linalg::SparseSystem system = linalg::apply_dirichlet(lap, zero, fixed, values);
        linalg::CgOptions options;
        options.tolerance = 1e-13;
        options.jacobi = true;
        const linalg::CgResult res = linalg::cg_solve(system, options);
        if (!res.summary().converged) throw NumericError("Tutte embedding solve did not converge");
        for (std::size_t v = 0; v < n; ++v) {
            if (!fixed[v]) uv[v] = Vec2(res.solutions[0][v], res.solutions[1][v]);
        }
    }

    for (std::size_t f = 0; f < disk.faces.size(); ++f) {
        const Face& t = disk.faces[f];
        const Vec2 e1 = uv[t[1]] - uv[t[0]];
        const Vec2 e2 = uv[t[2]] - uv[t[0]];
        if (!(e1.x() * e2.y() - e1.y() * e2.x() > 0.0)) {
            std::ostringstream msg;
            msg << "parameterization of new-region component " << component << " flips face " << f;
            throw NumericError(msg.str());
        }
    }
    return uv;
}

}  // namespace

RegionParameterization parameterize_new_region(const TriMesh& mesh, const std::vector<int>& new_faces) {
    RegionParameterization out;
    out.corners.assign(mesh.faces.size(), FaceUv{Vec2::Zero(), Vec2::Zero(), Vec2::Zero()});
    out.face_component.assign(mesh.faces.size(), -1);
    std::vector<int> faces = new_faces;
    std::sort(faces.begin(), faces.end());
    faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
    for (int f : faces) {
        if (f < 0 || static_cast<std::size_t>(f) >= mesh.faces.size()) throw ParameterError("new face index out of range");
    }
    if (faces.empty()) return out;

    const TriMesh region = submesh(mesh, faces);
    const Topology topo(region);
    int count = 0;
    const std::vector<int> comp = topo.face_components(&count);
    out.components = count;
    for (int c = 0; c < count; ++c) {
        std::vector<int> local;
        for (std::size_t f = 0; f < comp.size(); ++f) {
            if (comp[f] == c) local.push_back(static_cast<int>(f));
        }
        const TriMesh disk = submesh(region, local);
        const std::vector<Vec2> uv = embed_disk(disk, c);
        for (std::size_t i = 0; i < local.size(); ++i) {
            const int f = faces[local[i]];
            for (int k = 0; k < 3; ++k) out.corners[f][k] = uv[disk.faces[i][k]];
            out.face_component[f] = c;
        }
    }
    return out;
}

}  // namespace craftmesh
