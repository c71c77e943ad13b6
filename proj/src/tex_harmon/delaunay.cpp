#include "craftmesh/delaunay.hpp"

#include "craftmesh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace craftmesh {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

constexpr int kInf = -1;

struct IPoint {
    i64 x, y;
};

i64 orient(const IPoint& a, const IPoint& b, const IPoint& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// Positive when d is strictly inside the circle through counter-clockwise a, b, c.
bool incircle(const IPoint& a, const IPoint& b, const IPoint& c, const IPoint& d) {
    const i64 adx = a.x - d.x, ady = a.y - d.y;
    const i64 bdx = b.x - d.x, bdy = b.y - d.y;
    const i64 cdx = c.x - d.x, cdy = c.y - d.y;
    const i128 al = static_cast<i128>(adx * adx + ady * ady);
    const i128 bl = static_cast<i128>(bdx * bdx + bdy * bdy);
    const i128 cl = static_cast<i128>(cdx * cdx + cdy * cdy);
    const i128 det = al * static_cast<i128>(bdx * cdy - cdx * bdy) + bl * static_cast<i128>(cdx * ady - adx * cdy) +
                     cl * static_cast<i128>(adx * bdy - bdx * ady);
    return det > 0;
}

struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> n;
    bool alive = true;
    bool ghost() const { return v[0] == kInf || v[1] == kInf || v[2] == kInf; }
};

class Triangulator {
public:
    explicit Triangulator(std::vector<IPoint> pts) : p_(std::move(pts)) {}

    void run(const std::vector<int>& order) {
        const int a0 = order[0];
        const int b0 = order[1];
        std::size_t k = 2;
        while (k < order.size() && orient(p_[a0], p_[b0], p_[order[k]]) == 0) ++k;
        if (k == order.size()) throw ParameterError("Delaunay input is degenerate: all points are collinear");
        int a = a0, b = b0;
        const int c = order[k];
        if (orient(p_[a], p_[b], p_[c]) < 0) std::swap(a, b);
        tris_.push_back({{a, b, c}, {-1, -1, -1}});
        tris_.push_back({{c, b, kInf}, {-1, -1, -1}});
        tris_.push_back({{a, c, kInf}, {-1, -1, -1}});
        tris_.push_back({{b, a, kInf}, {-1, -1, -1}});
        link_all();
        last_ = 0;
        for (std::size_t i = 2; i < order.size(); ++i) {
            if (i != k) insert(order[i]);
        }
    }

    const std::vector<Tri>& triangles() const { return tris_; }

private:
    void link_all() {
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            for (int i = 0; i < 3; ++i) {
                const int x = tris_[t].v[(i + 1) % 3];
                const int y = tris_[t].v[(i + 2) % 3];
                for (std::size_t u = 0; u < tris_.size(); ++u) {
                    if (u == t) continue;
                    for (int j = 0; j < 3; ++j) {
                        if (tris_[u].v[(j + 1) % 3] == y && tris_[u].v[(j + 2) % 3] == x) {
                            tris_[t].n[i] = static_cast<int>(u);
                        }
                    }
                }
            }
        }
    }

    bool conflicts(const Tri& t, const IPoint& q) const {
        if (!t.ghost()) return incircle(p_[t.v[0]], p_[t.v[1]], p_[t.v[2]], q);
        const IPoint& u = p_[t.v[0]];
        const IPoint& w = p_[t.v[1]];
        const i64 o = orient(u, w, q);
        if (o != 0) return o > 0;
        const i64 d1 = (q.x - u.x) * (w.x - u.x) + (q.y - u.y) * (w.y - u.y);
        const i64 d2 = (q.x - w.x) * (u.x - w.x) + (q.y - w.y) * (u.y - w.y);
        return d1 > 0 && d2 > 0;
    }

    int locate(const IPoint& q) {
        int t = last_;
        const std::size_t cap = 4 * tris_.size() + 16;
        for (std::size_t steps = 0; steps < cap; ++steps) {
            const Tri& tri = tris_[t];
            if (tri.ghost()) return t;
            bool moved = false;
            for (int r = 0; r < 3; ++r) {
                const int i = (r + static_cast<int>(steps)) % 3;
                if (orient(p_[tri.v[(i + 1) % 3]], p_[tri.v[(i + 2) % 3]], q) < 0) {
                    t = tri.n[i];
                    moved = true;
                    break;
                }
            }
            if (!moved) return t;
        }
        for (std::size_t u = 0; u < tris_.size(); ++u) {
            if (tris_[u].alive && conflicts(tris_[u], q)) return static_cast<int>(u);
        }
        throw NumericError("Delaunay point location failed");
    }

    void insert(int pi) {
        const IPoint& q = p_[pi];
        const int start = locate(q);
        std::vector<int> cavity{start};
        std::vector<int> stack{start};
        stamp_.resize(tris_.size(), 0);
        ++epoch_;
        stamp_[start] = epoch_;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            for (int nb : tris_[t].n) {
                if (stamp_[nb] == epoch_ || !conflicts(tris_[nb], q)) continue;
                stamp_[nb] = epoch_;
                cavity.push_back(nb);
                stack.push_back(nb);
            }
        }

        struct Rim {
            int a, b, outside, old;
        };
        std::vector<Rim> rim;
        for (int t : cavity) {
            for (int i = 0; i < 3; ++i) {
                const int nb = tris_[t].n[i];
                if (stamp_[nb] != epoch_) rim.push_back({tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3], nb, t});
            }
        }
        for (int t : cavity) tris_[t].alive = false;

        const int first = static_cast<int>(tris_.size());
        for (const Rim& r : rim) {
            const int id = static_cast<int>(tris_.size());
            tris_.push_back({{r.a, r.b, pi}, {-1, -1, r.outside}});
            Tri& out = tris_[r.outside];
            for (int j = 0; j < 3; ++j) {
                if (out.n[j] == r.old) out.n[j] = id;
            }
        }
        const int last = static_cast<int>(tris_.size());
        for (int t = first; t < last; ++t) {
            for (int u = first; u < last; ++u) {
                if (tris_[u].v[0] == tris_[t].v[1]) tris_[t].n[0] = u;
                if (tris_[u].v[1] == tris_[t].v[0]) tris_[t].n[1] = u;
            }
        }
        for (int t = first; t < last; ++t) {
            Tri& tri = tris_[t];
            int k = 0;
            while (k < 3 && tri.v[k] != kInf) ++k;
            if (k == 3) {
                last_ = t;
                continue;
            }
            if (k == 2) continue;
            const Tri copy = tri;
            for (int i = 0; i < 3; ++i) {
                tri.v[i] = copy.v[(i + k + 1) % 3];
                tri.n[i] = copy.n[(i + k + 1) % 3];
            }
        }
        stamp_.resize(tris_.size(), 0);
    }

    std::vector<IPoint> p_;
    std::vector<Tri> tris_;
    std::vector<int> stamp_;
    int epoch_ = 0;
    int last_ = 0;
};

std::uint64_t morton(std::uint32_t x, std::uint32_t y) {
    std::uint64_t out = 0;
    for (int bit = 0; bit < 32; ++bit) {
        out |= static_cast<std::uint64_t>((x >> bit) & 1u) << (2 * bit);
        out |= static_cast<std::uint64_t>((y >> bit) & 1u) << (2 * bit + 1);
    }
    return out;
}

}  // namespace

Delaunay delaunay_triangulate(const std::vector<Vec2>& input) {
    double extent = 0.0;
    for (const Vec2& p : input) {
        if (!p.allFinite()) throw ParameterError("Delaunay input contains a non-finite point");
        extent = std::max({extent, std::abs(p.x()), std::abs(p.y())});
    }
    Delaunay out;
    if (extent == 0.0 && input.size() > 0) extent = 1.0;
    int exponent = 0;
    std::frexp(extent, &exponent);
    const double scale = std::ldexp(1.0, 22 - exponent);

    std::vector<IPoint> grid;
    std::unordered_map<std::uint64_t, int> index;
    out.point_of_input.reserve(input.size());
    for (const Vec2& p : input) {
        const IPoint q{std::llround(p.x() * scale), std::llround(p.y() * scale)};
        const std::uint64_t key = (static_cast<std::uint64_t>(q.x + (1 << 23)) << 32) |
                                  static_cast<std::uint64_t>(q.y + (1 << 23));
        auto [it, fresh] = index.emplace(key, static_cast<int>(grid.size()));
        if (fresh) {
            grid.push_back(q);
            out.points.emplace_back(static_cast<double>(q.x) / scale, static_cast<double>(q.y) / scale);
        }
        out.point_of_input.push_back(it->second);
    }
    if (grid.size() < 3) throw ParameterError("Delaunay input needs at least three distinct points");

    std::vector<int> order(grid.size());
    std::vector<std::uint64_t> code(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        order[i] = static_cast<int>(i);
        code[i] = morton(static_cast<std::uint32_t>(grid[i].x + (1 << 23)),
                         static_cast<std::uint32_t>(grid[i].y + (1 << 23)));
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) { return code[a] < code[b]; });

    Triangulator tri(grid);
    tri.run(order);
    out.on_hull.assign(grid.size(), 0);
    for (const Tri& t : tri.triangles()) {
        if (!t.alive) continue;
        if (t.ghost()) {
            out.on_hull[t.v[0]] = 1;
            out.on_hull[t.v[1]] = 1;
        } else {
            out.triangles.push_back(t.v);
        }
    }
    return out;
}

}  // namespace craftmesh
