#include "craftmesh/distance.hpp"
#include "craftmesh/errors.hpp"
#include "craftmesh/random.hpp"
#include "craftmesh/regions.hpp"
#include "craftmesh/sdf.hpp"
#include "craftmesh/shapes.hpp"
#include "craftmesh/topology.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace craftmesh;

namespace {

auto sphere_sdf(const Vec3& c, double r) {
    return [c, r](const Vec3& p) { return (p - c).norm() - r; };
}

int union_find_components(const TriMesh& m) {
    std::vector<int> parent(m.vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const Face& t : m.faces) {
        parent[find(t[1])] = find(t[0]);
        parent[find(t[2])] = find(t[0]);
    }
    std::vector<char> root(m.vertices.size(), 0);
    int count = 0;
    for (const Face& t : m.faces) {
        const int r = find(t[0]);
        if (!root[r]) {
            root[r] = 1;
            ++count;
        }
    }
    return count;
}

double signed_volume(const TriMesh& m) {
    double v = 0.0;
    for (const Face& t : m.faces) {
        v += m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]])) / 6.0;
    }
    return v;
}

double max_radius_error(const TriMesh& m) {
    double e = 0.0;
    for (const Vec3& v : m.vertices) e = std::max(e, std::abs(v.norm() - 1.0));
    return e;
}

Aabb cube(double half) {
    Aabb b;
    b.min = Vec3::Constant(-half);
    b.max = Vec3::Constant(half);
    return b;
}

}  // namespace

TEST_CASE("sample_sdf of the unit icosphere") {
    const TriMesh sphere = shapes::icosphere(3);
    const DistanceIndex index(sphere);
    const Aabb bounds = padded_bounds(bounding_box(sphere), 32);
    const SdfGrid grid = sample_sdf(sphere, index, bounds, 32);
    REQUIRE(grid.dims == std::array<int, 3>{33, 33, 33});
    CHECK(std::abs(grid.value(16, 16, 16) + 1.0) < grid.spacing);
    const Vec3 corner = grid.position(0, 0, 0);
    CHECK(grid.value(0, 0, 0) > 0.0);
    CHECK(std::abs(grid.value(0, 0, 0) - (corner.norm() - 1.0)) < grid.spacing);
    // Every value is the signed distance at its node.
    Rng rng(1);
    for (int s = 0; s < 100; ++s) {
        const int i = int(rng.below(33)), j = int(rng.below(33)), k = int(rng.below(33));
        CHECK(std::abs(grid.value(i, j, k) - index.signed_distance(grid.position(i, j, k)).value) <= 1e-9);
    }
}

TEST_CASE("sample_sdf is translation equivariant") {
    TriMesh sphere = shapes::icosphere(2);
    const Aabb bounds = padded_bounds(bounding_box(sphere), 12);
    const SdfGrid a = sample_sdf(sphere, DistanceIndex(sphere), bounds, 12);
    const Vec3 shift(0.25, -0.5, 1.0);
    for (Vec3& v : sphere.vertices) v += shift;
    Aabb moved = bounds;
    moved.min += shift;
    moved.max += shift;
    const SdfGrid b = sample_sdf(sphere, DistanceIndex(sphere), moved, 12);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-12);
}

TEST_CASE("sample_sdf preconditions") {
    const TriMesh plane = shapes::height_field(2, 2, 0, 1, 0, 1, [](double, double) { return 0.0; });
    CHECK_THROWS_AS(sample_sdf(plane, DistanceIndex(plane), cube(3.0), 8), TopologyError);
    const TriMesh sphere = shapes::icosphere(1);
    CHECK_THROWS_AS(sample_sdf(sphere, DistanceIndex(sphere), cube(1.05), 8), ParameterError);
}

TEST_CASE("combine identities") {
    const SdfGrid a = sample_function(sphere_sdf(Vec3::Zero(), 1.0), cube(1.5), 16);
    const SdfGrid u = combine(a, a, BooleanOp::Union);
    CHECK(u.values == a.values);
    SdfGrid empty = a;
    std::fill(empty.values.begin(), empty.values.end(), 1e9);
    CHECK(combine(a, empty, BooleanOp::Difference).values == a.values);
    const SdfGrid far = sample_function(sphere_sdf(Vec3(20, 0, 0), 1.0), cube(1.5), 16);
    CHECK(combine(a, far, BooleanOp::Difference).values == a.values);
    // Union is the pointwise minimum.
    const SdfGrid b = sample_function(sphere_sdf(Vec3(0.5, 0, 0), 0.7), cube(1.5), 16);
    const SdfGrid ab = combine(a, b, BooleanOp::Union);
    for (std::size_t i = 0; i < ab.values.size(); ++i) {
        CHECK(ab.values[i] == std::min(a.values[i], b.values[i]));
    }
    const SdfGrid other = sample_function(sphere_sdf(Vec3::Zero(), 1.0), cube(1.5), 17);
    CHECK_THROWS_AS(combine(a, other, BooleanOp::Union), ParameterError);
}

TEST_CASE("union of two disjoint spheres extracts two components") {
    Aabb bounds;
    bounds.min = Vec3(-3.5, -1.5, -1.5);
    bounds.max = Vec3(3.5, 1.5, 1.5);
    const SdfGrid a = sample_function(sphere_sdf(Vec3(-2, 0, 0), 1.0), bounds, 56);
    const SdfGrid b = sample_function(sphere_sdf(Vec3(2, 0, 0), 1.0), bounds, 56);
    const SurfaceExtraction s = marching_cubes(combine(a, b, BooleanOp::Union));
    CHECK_FALSE(s.touches_boundary);
    CHECK(union_find_components(s.mesh) == 2);
    int labels = 0;
    Topology(s.mesh).face_components(&labels);
    CHECK(labels == 2);
}

TEST_CASE("marching_cubes canonical cases") {
    SdfGrid g = sample_function([](const Vec3&) { return 1.0; }, cube(1.0), 4);
    CHECK(marching_cubes(g).mesh.empty());

    g.values[g.index(2, 2, 2)] = -0.5;
    const SurfaceExtraction single = marching_cubes(g);
    CHECK(single.mesh.face_count() > 0);
    CHECK_FALSE(single.touches_boundary);
    const Topology topo(single.mesh);
    CHECK(topo.is_closed());
    CHECK(topo.euler_characteristic() == 2);
    CHECK(signed_volume(single.mesh) > 0.0);

    SdfGrid open = g;
    open.values[open.index(0, 2, 2)] = -0.5;
    CHECK(marching_cubes(open).touches_boundary);
}

TEST_CASE("marching_cubes on the unit sphere is closed, outward and accurate") {
    const SdfGrid g = sample_function(sphere_sdf(Vec3::Zero(), 1.0), cube(1.5), 64);
    const SurfaceExtraction s = marching_cubes(g);
    CHECK_FALSE(s.touches_boundary);
    s.mesh.validate();
    const Topology topo(s.mesh);
    CHECK(topo.is_closed());
    CHECK(topo.euler_characteristic() == 2);
    CHECK(max_radius_error(s.mesh) < 2.0 * g.spacing);
    CHECK(signed_volume(s.mesh) == doctest::Approx(4.0 / 3.0 * M_PI).epsilon(0.01));
    // Every face points away from the center.
    int inward = 0;
    for (std::size_t f = 0; f < s.mesh.faces.size(); ++f) {
        if (is_degenerate(s.mesh, int(f))) continue;
        const Face& t = s.mesh.faces[f];
        const Vec3 c = (s.mesh.vertices[t[0]] + s.mesh.vertices[t[1]] + s.mesh.vertices[t[2]]) / 3.0;
        if (face_cross(s.mesh, int(f)).dot(c) <= 0.0) ++inward;
    }
    CHECK(inward == 0);
}

TEST_CASE("marching_cubes error shrinks with resolution") {
    const SdfGrid g32 = sample_function(sphere_sdf(Vec3::Zero(), 1.0), cube(1.5), 32);
    const SdfGrid g64 = sample_function(sphere_sdf(Vec3::Zero(), 1.0), cube(1.5), 64);
    const double e32 = max_radius_error(marching_cubes(g32).mesh);
    const double e64 = max_radius_error(marching_cubes(g64).mesh);
    MESSAGE("sphere error 32^3 = " << e32 << ", 64^3 = " << e64 << ", ratio = " << e64 / e32);
    CHECK(e64 <= 0.65 * e32);
}

TEST_CASE("union surface matches the individual surfaces away from the seam") {
    const SdfGrid a = sample_function(sphere_sdf(Vec3(-0.4, 0, 0), 0.8), cube(1.5), 48);
    const SdfGrid b = sample_function(sphere_sdf(Vec3(0.5, 0.1, 0), 0.6), cube(1.5), 48);
    const TriMesh merged = marching_cubes(combine(a, b, BooleanOp::Union)).mesh;
    const TriMesh ma = marching_cubes(a).mesh;
    const TriMesh mb = marching_cubes(b).mesh;
    const DistanceIndex ia(ma);
    const DistanceIndex ib(mb);
    const double h = a.spacing;
    Rng rng(4);
    int checked = 0;
    for (int s = 0; s < 1000; ++s) {
        const Face& t = merged.faces[rng.below(merged.faces.size())];
        double u = rng.uniform();
        double v = rng.uniform();
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        const Vec3 p = merged.vertices[t[0]] + u * (merged.vertices[t[1]] - merged.vertices[t[0]]) +
                       v * (merged.vertices[t[2]] - merged.vertices[t[0]]);
        if (std::abs(a.sample(p)) < 2 * h && std::abs(b.sample(p)) < 2 * h) continue;  // seam band
        ++checked;
        CHECK(std::min(ia.unsigned_distance(p), ib.unsigned_distance(p)) <= 2 * h);
    }
    CHECK(checked > 900);
}

TEST_CASE("extract_seam") {
    const SdfGrid a = sample_function(sphere_sdf(Vec3(-0.5, 0, 0), 1.0), cube(2.0), 48);
    const SdfGrid b = sample_function(sphere_sdf(Vec3(0.5, 0, 0), 1.0), cube(2.0), 48);
    const TriMesh merged = marching_cubes(combine(a, b, BooleanOp::Union)).mesh;
    const double h = a.spacing;
    const double tau = 2 * h;
    const SeamPoints seam = extract_seam(a, b, merged, tau);
    REQUIRE(!seam.vertices.empty());
    CHECK(std::is_sorted(seam.vertices.begin(), seam.vertices.end()));
    const double radius = std::sqrt(1.0 - 0.25);
    for (const Vec3& p : seam.positions) {
        CHECK(std::abs((p - Vec3(-0.5, 0, 0)).norm() - 1.0) < tau + 2 * h);
        CHECK(std::abs((p - Vec3(0.5, 0, 0)).norm() - 1.0) < tau + 2 * h);
        const double to_circle = std::hypot(p.x(), std::hypot(p.y(), p.z()) - radius);
        CHECK(to_circle < 2 * h + tau);
    }
    CHECK(extract_seam(a, b, merged, 0.0).vertices.empty());

    const SdfGrid c = sample_function(sphere_sdf(Vec3(-1.2, 0, 0), 0.5), cube(2.0), 48);
    const SdfGrid d = sample_function(sphere_sdf(Vec3(1.2, 0, 0), 0.5), cube(2.0), 48);
    const TriMesh apart = marching_cubes(combine(c, d, BooleanOp::Union)).mesh;
    CHECK(extract_seam(c, d, apart, tau).vertices.empty());
}

TEST_CASE("extract_regions on a line of vertices") {
    TriMesh line;
    for (int x = 0; x < 4; ++x) line.vertices.emplace_back(x, 0, 0);
    const RegionSelection r = extract_regions(line, line, {Vec3::Zero()}, 2.5, 1.5);
    CHECK(r.t_in == std::vector<int>{0, 1, 2});
    CHECK(r.t_opt == std::vector<int>{0, 1});
    CHECK(r.e_in == std::vector<int>{0, 1, 2});
    r.validate(0);

    const RegionSelection none = extract_regions(line, line, {}, 2.5, 1.5);
    CHECK(none.t_in.empty());
    CHECK(none.t_opt.empty());
    CHECK(none.e_in.empty());

    CHECK_THROWS_AS(extract_regions(line, line, {}, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(extract_regions(line, line, {}, 1.0, 2.0), ParameterError);
}

TEST_CASE("extract_regions equals brute force and ignores seam order") {
    Rng rng(99);
    TriMesh mt;
    TriMesh me;
    for (int i = 0; i < 1000; ++i) {
        mt.vertices.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        me.vertices.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    }
    std::vector<Vec3> seam;
    for (int i = 0; i < 40; ++i) seam.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double eps0 = 0.2;
    const double eps1 = 0.12;
    const RegionSelection r = extract_regions(mt, me, seam, eps0, eps1);
    auto brute = [&](const TriMesh& m, double eps) {
        std::vector<int> out;
        for (std::size_t v = 0; v < m.vertices.size(); ++v) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& u : seam) best = std::min(best, (u - m.vertices[v]).norm());
            if (best < eps) out.push_back(int(v));
        }
        return out;
    };
    CHECK(r.t_in == brute(mt, eps0));
    CHECK(r.e_in == brute(me, eps0));
    CHECK(r.t_opt == brute(mt, eps1));
    CHECK(std::includes(r.t_in.begin(), r.t_in.end(), r.t_opt.begin(), r.t_opt.end()));

    std::reverse(seam.begin(), seam.end());
    const RegionSelection reversed = extract_regions(mt, me, seam, eps0, eps1);
    CHECK(reversed.t_in == r.t_in);
    CHECK(reversed.t_opt == r.t_opt);
    CHECK(reversed.e_in == r.e_in);
}

TEST_CASE("classify_new_vs_preserved") {
    const TriMesh sphere = shapes::icosphere(2);
    const FaceClassification same = classify_new_vs_preserved(sphere, sphere, 1e-3);
    CHECK(same.new_faces.empty());
    CHECK(same.preserved_faces.size() == sphere.faces.size());

    const TriMesh with_cube = concatenate(sphere, shapes::box(Vec3(5, 5, 5), Vec3(6, 6, 6)));
    const FaceClassification cube_split = classify_new_vs_preserved(with_cube, sphere, 1e-3);
    std::vector<int> expected(12);
    std::iota(expected.begin(), expected.end(), int(sphere.faces.size()));
    CHECK(cube_split.new_faces == expected);

    // Sphere with a bump; labels from a brute-force distance oracle.
    TriMesh bumped = shapes::icosphere(2);
    for (Vec3& v : bumped.vertices) {
        if (v.z() > 0.8) v *= 1.3;
    }
    const double delta = 2.0 * (3.0 / 64.0);
    std::vector<int> want_new;
    for (std::size_t f = 0; f < bumped.faces.size(); ++f) {
        bool all_near = true;
        for (int c = 0; c < 3; ++c) {
            const Vec3& p = bumped.vertices[bumped.faces[f][c]];
            double best = std::numeric_limits<double>::infinity();
            for (const Face& t : sphere.faces) {
                best = std::min(best, (closest_point_on_triangle(p, sphere.vertices[t[0]], sphere.vertices[t[1]],
                                                                 sphere.vertices[t[2]]) - p).norm());
            }
            all_near = all_near && best <= delta;
        }
        if (!all_near) want_new.push_back(int(f));
    }
    const FaceClassification bump = classify_new_vs_preserved(bumped, sphere, delta);
    CHECK(bump.new_faces == want_new);
    CHECK(!bump.new_faces.empty());
    CHECK(bump.new_faces.size() + bump.preserved_faces.size() == bumped.faces.size());

    RegionSelection sel;
    sel.new_faces = bump.new_faces;
    sel.preserved_faces = bump.preserved_faces;
    sel.validate(bumped.faces.size());
    sel.preserved_faces.pop_back();
    CHECK_THROWS_AS(sel.validate(bumped.faces.size()), ValidationError);
}
