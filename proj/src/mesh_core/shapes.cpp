#include "craftmesh/shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace craftmesh::shapes {

TriMesh icosphere(int subdivisions, double radius, const Vec3& center) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                           {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                           {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (Vec3& p : v) p.normalize();
    std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                           {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                           {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                           {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            const int id = static_cast<int>(v.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Face> next;
        next.reserve(f.size() * 4);
        for (const Face& tri : f) {
            const int ab = mid(tri[0], tri[1]);
            const int bc = mid(tri[1], tri[2]);
            const int ca = mid(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    TriMesh mesh;
    mesh.vertices.reserve(v.size());
    for (const Vec3& p : v) mesh.vertices.push_back(center + radius * p);
    mesh.faces = std::move(f);
    return mesh;
}

TriMesh box(const Vec3& lo, const Vec3& hi) {
    TriMesh mesh;
    for (int i = 0; i < 8; ++i) {
        mesh.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(),
                                   i & 4 ? hi.z() : lo.z());
    }
    // Each quad listed counter-clockwise seen from outside.
    const int quads[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4},
                             {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
    mesh.uvs.emplace();
    for (int q = 0; q < 6; ++q) {
        const double u0 = (q % 3) / 3.0;
        const double v0 = (q / 3) / 2.0;
        const Vec2 c[4] = {{u0, v0}, {u0 + 1.0 / 3.0, v0}, {u0 + 1.0 / 3.0, v0 + 0.5}, {u0, v0 + 0.5}};
        mesh.faces.push_back({quads[q][0], quads[q][1], quads[q][2]});
        mesh.uvs->push_back({c[0], c[1], c[2]});
        mesh.faces.push_back({quads[q][0], quads[q][2], quads[q][3]});
        mesh.uvs->push_back({c[0], c[2], c[3]});
    }
    return mesh;
}

TriMesh height_field(int nx, int ny, double x0, double x1, double y0, double y1,
                     const std::function<double(double, double)>& height) {
    TriMesh mesh;
    mesh.uvs.emplace();
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Vec2> uv;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const double s = static_cast<double>(i) / nx;
            const double t = static_cast<double>(j) / ny;
            const double x = x0 + (x1 - x0) * s;
            const double y = y0 + (y1 - y0) * t;
            mesh.vertices.emplace_back(x, y, height(x, y));
            uv.emplace_back(s, t);
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = id(i, j);
            const int b = id(i + 1, j);
            const int c = id(i + 1, j + 1);
            const int d = id(i, j + 1);
            // Alternate the diagonal so the grid has no preferred direction.
            if ((i + j) % 2 == 0) {
                mesh.faces.push_back({a, b, c});
                mesh.faces.push_back({a, c, d});
                mesh.uvs->push_back({uv[a], uv[b], uv[c]});
                mesh.uvs->push_back({uv[a], uv[c], uv[d]});
            } else {
                mesh.faces.push_back({a, b, d});
                mesh.faces.push_back({b, c, d});
                mesh.uvs->push_back({uv[a], uv[b], uv[d]});
                mesh.uvs->push_back({uv[b], uv[c], uv[d]});
            }
        }
    }
    return mesh;
}

TriMesh uv_sphere(int slices, int stacks, double radius) {
    TriMesh mesh;
    mesh.uvs.emplace();
    const double pi = std::numbers::pi;
    // Poles are single vertices; ring vertices are shared, UVs are per corner.
    mesh.vertices.emplace_back(0.0, 0.0, radius);
    for (int s = 1; s < stacks; ++s) {
        const double theta = pi * s / stacks;
        for (int k = 0; k < slices; ++k) {
            const double phi = 2.0 * pi * k / slices;
            mesh.vertices.emplace_back(radius * std::sin(theta) * std::cos(phi),
                                       radius * std::sin(theta) * std::sin(phi),
                                       radius * std::cos(theta));
        }
    }
    mesh.vertices.emplace_back(0.0, 0.0, -radius);
    const int south = static_cast<int>(mesh.vertices.size()) - 1;
    auto ring = [&](int s, int k) { return 1 + (s - 1) * slices + (k % slices); };
    auto uv = [&](int s, int k) {
        return Vec2(static_cast<double>(k) / slices, 1.0 - static_cast<double>(s) / stacks);
    };
    for (int k = 0; k < slices; ++k) {
        mesh.faces.push_back({0, ring(1, k), ring(1, k + 1)});
        mesh.uvs->push_back({Vec2((k + 0.5) / slices, 1.0), uv(1, k), uv(1, k + 1)});
    }
    for (int s = 1; s < stacks - 1; ++s) {
        for (int k = 0; k < slices; ++k) {
            const int a = ring(s, k);
            const int b = ring(s + 1, k);
            const int c = ring(s + 1, k + 1);
            const int d = ring(s, k + 1);
            mesh.faces.push_back({a, b, c});
            mesh.uvs->push_back({uv(s, k), uv(s + 1, k), uv(s + 1, k + 1)});
            mesh.faces.push_back({a, c, d});
            mesh.uvs->push_back({uv(s, k), uv(s + 1, k + 1), uv(s, k + 1)});
        }
    }
    for (int k = 0; k < slices; ++k) {
        mesh.faces.push_back({south, ring(stacks - 1, k + 1), ring(stacks - 1, k)});
        mesh.uvs->push_back(
            {Vec2((k + 0.5) / slices, 0.0), uv(stacks - 1, k + 1), uv(stacks - 1, k)});
    }
    return mesh;
}

}  // namespace craftmesh::shapes
