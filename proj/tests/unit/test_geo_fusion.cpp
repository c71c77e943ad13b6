#include "craftmesh/errors.hpp"
#include "craftmesh/fixtures.hpp"
#include "craftmesh/fusion.hpp"
#include "craftmesh/poisson.hpp"
#include "craftmesh/random.hpp"
#include "craftmesh/shapes.hpp"
#include "craftmesh/topology.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace craftmesh;

namespace {

std::vector<int> all_vertices(const TriMesh& m) {
    std::vector<int> v(m.vertices.size());
    std::iota(v.begin(), v.end(), 0);
    return v;
}

TriMesh jittered_sphere(std::uint64_t seed, double amount) {
    TriMesh m = shapes::icosphere(1);
    Rng rng(seed);
    for (Vec3& v : m.vertices) v += amount * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    return m;
}

FaceTargets random_targets(const TriMesh& m, Rng& rng) {
    FaceTargets t(m.faces.size());
    for (std::size_t f = 0; f < m.faces.size(); ++f) {
        if (rng.uniform() < 0.2) continue;
        t.direction_sum[f] = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        t.weight[f] = rng.uniform(0.5, 2.0);
    }
    return t;
}

std::vector<int> random_subset(int n, Rng& rng) {
    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
        if (rng.uniform() < 0.6) out.push_back(i);
    }
    return out;
}

// Central differences of `loss` w.r.t. every coordinate of the free vertices.
template <class Loss>
double worst_relative_error(TriMesh m, const std::vector<int>& free, const std::vector<Vec3>& analytic, Loss loss) {
    const double h = 1e-6;
    double largest = 0.0;
    for (const Vec3& g : analytic) largest = std::max(largest, g.cwiseAbs().maxCoeff());
    double worst = 0.0;
    for (std::size_t i = 0; i < free.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            double& x = m.vertices[free[i]][c];
            const double x0 = x;
            x = x0 + h;
            const double up = loss(m);
            x = x0 - h;
            const double down = loss(m);
            x = x0;
            const double fd = (up - down) / (2 * h);
            const double denom = std::max({std::abs(fd), std::abs(analytic[i][c]), 1e-3 * largest});
            worst = std::max(worst, std::abs(fd - analytic[i][c]) / denom);
        }
    }
    return worst;
}

std::vector<Camera> views(const Vec3& center, double radius, int count, int res, std::uint64_t seed) {
    return sample_viewpoints(count, center, radius, seed, res, res);
}

RegionSelection region_of(const std::vector<int>& t_opt, const std::vector<int>& t_in, const std::vector<int>& e_in) {
    RegionSelection r;
    r.t_opt = t_opt;
    r.t_in = t_in;
    r.e_in = e_in;
    return r;
}

}  // namespace

TEST_CASE("FusionConfig validation") {
    FusionConfig c;
    c.validate();
    CHECK(c.iterations == 1000);
    FusionConfig bad = c;
    bad.lambda_smooth = -1;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = c;
    bad.min_edge = bad.max_edge;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = c;
    bad.iterations = -1;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("blended targets: empty region and identity reference") {
    const TriMesh sphere = shapes::icosphere(3);
    const auto cams = views(Vec3::Zero(), 3.0, 8, 64, 1);
    const FaceTargets none = compute_blended_targets(sphere, sphere, RegionSelection{}, cams);
    CHECK(none.weighted_faces() == 0);

    std::vector<int> cap;
    for (int v = 0; v < int(sphere.vertices.size()); ++v) {
        if (sphere.vertices[v].z() > 0.3) cap.push_back(v);
    }
    const FaceTargets same = compute_blended_targets(sphere, sphere, region_of(cap, cap, cap), cams);
    CHECK(same.weighted_faces() > 0);
    for (std::size_t f = 0; f < same.size(); ++f) {
        if (same.weight[f] > 0) CHECK((same.target(int(f)) - face_normal(sphere, int(f))).norm() <= 1e-3);
    }

    // Region that no camera sees.
    const auto away = std::vector<Camera>{views(Vec3(0, 0, 50), 3.0, 1, 32, 0)[0]};
    CHECK_THROWS_AS(compute_blended_targets(sphere, sphere, region_of(cap, cap, cap), away), ParameterError);
}

TEST_CASE("blended targets tilt a bump toward the flat reference") {
    auto bump = [](double x, double y) { return 0.25 * std::exp(-(x * x + y * y) / 0.08); };
    const TriMesh t = shapes::height_field(24, 24, -1, 1, -1, 1, bump);
    const TriMesh e = shapes::height_field(20, 20, -1, 1, -1, 1, [](double, double) { return 0.0; });
    std::vector<int> opt;
    std::vector<int> in;
    for (int v = 0; v < int(t.vertices.size()); ++v) {
        const double r = std::hypot(t.vertices[v].x(), t.vertices[v].y());
        if (r < 0.5) opt.push_back(v);
        if (r < 0.7) in.push_back(v);
    }
    std::vector<int> e_in;
    for (int v = 0; v < int(e.vertices.size()); ++v) {
        if (std::hypot(e.vertices[v].x(), e.vertices[v].y()) < 0.7) e_in.push_back(v);
    }
    const RegionSelection sel = region_of(opt, in, e_in);

    std::vector<Camera> cams;
    for (const Camera& c : views(Vec3::Zero(), 3.0, 8, 64, 4)) {
        if (c.eye.z() > 0.5) cams.push_back(c);
    }
    REQUIRE(!cams.empty());
    const FaceTargets targets = compute_blended_targets(t, e, sel, cams);
    double before = 0.0;
    double after = 0.0;
    int counted = 0;
    for (std::size_t f = 0; f < targets.size(); ++f) {
        if (targets.weight[f] <= 0) continue;
        before += std::acos(std::clamp(face_normal(t, int(f)).z(), -1.0, 1.0));
        after += std::acos(std::clamp(targets.target(int(f)).z(), -1.0, 1.0));
        ++counted;
    }
    REQUIRE(counted > 0);
    MESSAGE("mean tilt from +z: current " << before / counted << ", target " << after / counted);
    CHECK(after < 0.5 * before);

    // Single 8x8 view against a dense Poisson oracle.
    Camera small;
    small.eye = Vec3(0.1, -0.2, 2.0);
    small.look_at = Vec3::Zero();
    small.up = Vec3(0, 1, 0);
    small.fov_y = 0.6;
    small.width = small.height = 8;
    const FaceTargets one = compute_blended_targets(t, e, sel, {small});
    const RenderTarget rt = render(t, small, faces_touching(t, opt));
    const RenderTarget re = render(e, small);
    std::vector<char> e_face(e.faces.size(), 0);
    for (int f : faces_touching(e, e_in)) e_face[f] = 1;
    std::vector<int> id(64, -1);
    std::vector<int> px;
    for (int y = 1; y < 7; ++y) {
        for (int x = 1; x < 7; ++x) {
            const int p = y * 8 + x;
            if (rt.mask[p]) {
                id[p] = int(px.size());
                px.push_back(p);
            }
        }
    }
    REQUIRE(!px.empty());
    auto enc_t = [&](int p, int c) { return rt.face_id[p] >= 0 ? 0.5 * (rt.normal[p][c] + 1) : 0.5; };
    auto enc_s = [&](int p, int c) {
        if (re.face_id[p] >= 0 && e_face[re.face_id[p]]) return 0.5 * (re.normal[p][c] + 1);
        return enc_t(p, c);
    };
    const int n = int(px.size());
    std::vector<Vec3> blended(n);
    for (int c = 0; c < 3; ++c) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            const int p = px[i];
            a(i, i) = 4;
            for (int q : {p - 1, p + 1, p - 8, p + 8}) {
                b(i) += enc_s(p, c) - enc_s(q, c);
                if (id[q] >= 0) a(i, id[q]) = -1;
                else b(i) += enc_t(q, c);
            }
        }
        const Eigen::VectorXd x = a.fullPivLu().solve(b);
        for (int i = 0; i < n; ++i) blended[i][c] = std::clamp(x(i), 0.0, 1.0);
    }
    FaceTargets oracle(t.faces.size());
    for (int i = 0; i < n; ++i) {
        const Vec3 v = (2.0 * blended[i] - Vec3::Ones()).normalized();
        oracle.direction_sum[rt.face_id[px[i]]] += v;
        oracle.weight[rt.face_id[px[i]]] += 1;
    }
    for (std::size_t f = 0; f < oracle.size(); ++f) {
        CHECK(one.weight[f] == oracle.weight[f]);
        CHECK((one.direction_sum[f] - oracle.direction_sum[f]).norm() <= 1e-8);
    }
}

TEST_CASE("normal loss") {
    TriMesh tri;
    tri.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    tri.faces = {{0, 1, 2}};
    FaceTargets exact(1);
    exact.direction_sum[0] = Vec3(0, 0, 3);
    exact.weight[0] = 2.5;
    const LossGradient zero = normal_loss_and_grad(tri, exact, {0, 1, 2});
    CHECK(zero.value == 0.0);
    for (const Vec3& g : zero.gradient) CHECK(g.norm() == 0.0);

    FaceTargets right(1);
    right.direction_sum[0] = Vec3(1, 0, 0);
    right.weight[0] = 1.5;
    CHECK(normal_loss_and_grad(tri, right, {}).value == doctest::Approx(2 * 1.5).epsilon(1e-15));

    // Vertices of unweighted faces get no gradient.
    TriMesh two = concatenate(tri, shapes::box(Vec3(3, 3, 3), Vec3(4, 4, 4)));
    FaceTargets partial(two.faces.size());
    partial.direction_sum[0] = Vec3(1, 0, 0);
    partial.weight[0] = 1;
    const LossGradient lg = normal_loss_and_grad(two, partial, all_vertices(two));
    for (std::size_t v = 3; v < two.vertices.size(); ++v) CHECK(lg.gradient[v] == Vec3::Zero());

    TriMesh degenerate = tri;
    degenerate.vertices[2] = Vec3(2, 0, 0);
    CHECK(normal_loss_and_grad(degenerate, right, {0}).skipped == 1);

    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const TriMesh m = jittered_sphere(100 + trial, 0.1);
        const FaceTargets t = random_targets(m, rng);
        const std::vector<int> free = random_subset(int(m.vertices.size()), rng);
        const LossGradient a = normal_loss_and_grad(m, t, free);
        const double err = worst_relative_error(m, free, a.gradient,
                                                [&](const TriMesh& x) { return normal_loss_and_grad(x, t, {}).value; });
        CHECK(err <= 1e-4);
    }
}

TEST_CASE("smoothness loss") {
    const TriMesh grid = shapes::height_field(6, 6, 0, 1, 0, 1, [](double, double) { return 0.0; });
    const Topology topo(grid);
    std::vector<int> interior;
    for (int v = 0; v < int(grid.vertices.size()); ++v) {
        if (!topo.is_boundary_vertex(v)) interior.push_back(v);
    }
    CHECK(smoothness_loss_and_grad(grid, interior).value <= 1e-20);

    TriMesh bumped = shapes::height_field(6, 6, 0, 1, 0, 1, [](double, double) { return 0.0; });
    const int centre = 3 * 7 + 3;
    const Vec3 d(0.01, -0.02, 0.05);
    bumped.vertices[centre] += d;
    CHECK(smoothness_loss_and_grad(bumped, {centre}).value == doctest::Approx(d.squaredNorm()).epsilon(1e-12));

    TriMesh lonely = grid;
    lonely.vertices.emplace_back(5, 5, 5);
    CHECK(smoothness_loss_and_grad(lonely, {int(lonely.vertices.size()) - 1}).skipped == 1);

    Rng rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const TriMesh m = jittered_sphere(200 + trial, 0.1);
        const std::vector<int> free = random_subset(int(m.vertices.size()), rng);
        const LossGradient a = smoothness_loss_and_grad(m, free);
        const double err = worst_relative_error(m, free, a.gradient,
                                                [&](const TriMesh& x) { return smoothness_loss_and_grad(x, free).value; });
        CHECK(err <= 1e-4);
    }
}

TEST_CASE("total loss gradient on random configurations") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const TriMesh m = jittered_sphere(300 + trial, 0.15);
        REQUIRE(m.vertices.size() <= 100);
        const FaceTargets t = random_targets(m, rng);
        const std::vector<int> free = random_subset(int(m.vertices.size()), rng);
        const double lambda = rng.uniform(0.0, 1.0);
        auto total = [&](const TriMesh& x) {
            return normal_loss_and_grad(x, t, {}).value + lambda * smoothness_loss_and_grad(x, free).value;
        };
        const LossGradient a = normal_loss_and_grad(m, t, free);
        const LossGradient b = smoothness_loss_and_grad(m, free);
        std::vector<Vec3> g(free.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = a.gradient[i] + lambda * b.gradient[i];
        CHECK(worst_relative_error(m, free, g, total) <= 1e-4);
    }
}

TEST_CASE("remesh_region") {
    const TriMesh grid = shapes::height_field(4, 4, 0, 1, 0, 1, [](double, double) { return 0.0; });
    const RemeshResult same = remesh_region(grid, all_vertices(grid), 0.1, 1.0);
    CHECK(same.splits == 0);
    CHECK(same.collapses == 0);
    CHECK(same.mesh.vertices == grid.vertices);
    CHECK(same.mesh.faces == grid.faces);

    TriMesh tri;
    tri.vertices = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(1, 0.5, 0)};
    tri.faces = {{0, 1, 2}};
    const RemeshResult split = remesh_region(tri, {0, 1}, 0.1, 1.0);
    CHECK(split.splits == 1);
    CHECK(split.mesh.vertices.size() == 4);
    CHECK(split.mesh.faces.size() == 2);
    CHECK(split.region == std::vector<int>{0, 1, 3});
    CHECK(split.vertex_origin == std::vector<int>{0, 1, 2, -1});
    for (std::size_t f = 0; f < split.mesh.faces.size(); ++f) CHECK(face_normal(split.mesh, int(f)).z() > 0.99);

    const TriMesh sphere = shapes::icosphere(2);
    const double limit = 0.5 * mean_edge_length(sphere);
    const RemeshResult fine = remesh_region(sphere, all_vertices(sphere), 0.01, limit);
    fine.mesh.validate();
    double longest = 0.0;
    for (const Face& t : fine.mesh.faces) {
        for (int k = 0; k < 3; ++k) longest = std::max(longest, (fine.mesh.vertices[t[k]] - fine.mesh.vertices[t[(k + 1) % 3]]).norm());
    }
    CHECK(longest <= limit);
    const Topology topo(fine.mesh);
    CHECK(topo.is_closed());
    CHECK(topo.euler_characteristic() == 2);

    // Collapse short edges of a finely split sphere back down.
    const RemeshResult coarse = remesh_region(fine.mesh, all_vertices(fine.mesh), 0.9 * limit, 4 * limit);
    CHECK(coarse.collapses > 0);
    coarse.mesh.validate();
    const Topology ct(coarse.mesh);
    CHECK(ct.is_closed());
    CHECK(ct.euler_characteristic() == 2);
    for (std::size_t f = 0; f < coarse.mesh.faces.size(); ++f) {
        const Face& t = coarse.mesh.faces[f];
        const Vec3 c = (coarse.mesh.vertices[t[0]] + coarse.mesh.vertices[t[1]] + coarse.mesh.vertices[t[2]]) / 3;
        CHECK(face_cross(coarse.mesh, int(f)).dot(c) > 0);
    }

    // Vertices outside the region are untouched.
    std::vector<int> half;
    for (int v = 0; v < int(sphere.vertices.size()); ++v) {
        if (sphere.vertices[v].z() > 0) half.push_back(v);
    }
    const RemeshResult partial = remesh_region(sphere, half, 0.01, limit);
    for (std::size_t v = 0; v < partial.mesh.vertices.size(); ++v) {
        const int o = partial.vertex_origin[v];
        if (o >= 0) CHECK(partial.mesh.vertices[v] == sphere.vertices[o]);
        if (o >= 0 && sphere.vertices[o].z() <= 0) CHECK_FALSE(std::binary_search(partial.region.begin(), partial.region.end(), int(v)));
    }
    CHECK(Topology(partial.mesh).euler_characteristic() == 2);
}

TEST_CASE("fuse_geometry trivial cases") {
    const TriMesh sphere = shapes::icosphere(3);
    std::vector<int> cap;
    std::vector<int> ring;
    for (int v = 0; v < int(sphere.vertices.size()); ++v) {
        if (sphere.vertices[v].z() > 0.6) cap.push_back(v);
        if (sphere.vertices[v].z() > 0.4) ring.push_back(v);
    }
    const RegionSelection sel = region_of(cap, ring, ring);
    FusionConfig cfg;
    cfg.views = 6;
    cfg.resolution = 64;
    cfg.iterations = 0;
    const FusionResult none = fuse_geometry(sphere, sphere, sel, cfg, 1);
    CHECK(none.mesh.vertices == sphere.vertices);
    CHECK(none.trace.empty());

    cfg.iterations = 60;
    cfg.reblend_interval = 20;
    cfg.remesh_interval = 0;
    const FusionResult ident = fuse_geometry(sphere, sphere, sel, cfg, 2);
    double moved = 0.0;
    for (std::size_t v = 0; v < sphere.vertices.size(); ++v) {
        moved = std::max(moved, (ident.mesh.vertices[v] - sphere.vertices[v]).norm());
    }
    CHECK(moved <= 1e-3 * bounding_box(sphere).diagonal());

    cfg.iterations = 1;
    cfg.lambda_smooth = 0.0;
    const FusionResult step = fuse_geometry(sphere, sphere, sel, cfg, 3);
    for (std::size_t v = 0; v < sphere.vertices.size(); ++v) {
        CHECK((step.mesh.vertices[v] - sphere.vertices[v]).norm() <= 1e-12);
    }

    TriMesh broken = sphere;
    broken.vertices[cap[0]].x() = std::nan("");
    CHECK_THROWS_AS(fuse_geometry(broken, sphere, sel, cfg, 4), ValidationError);
    // Steps are bounded by the local altitude, so even an absurd learning
    // rate keeps every vertex finite and the faces unfolded.
    const RegionSelection bumpy = region_of(cap, ring, {});
    TriMesh dented = sphere;
    for (int v : cap) dented.vertices[v] *= 0.9 + 0.2 * (v % 2);
    cfg.iterations = 5;
    cfg.learning_rate = 1e300;
    cfg.lambda_smooth = 1.0;
    const FusionResult wild = fuse_geometry(dented, sphere, bumpy, cfg, 4);
    for (const Vec3& p : wild.mesh.vertices) CHECK(p.allFinite());
    for (std::size_t f = 0; f < dented.faces.size(); ++f) {
        CHECK(face_cross(wild.mesh, int(f)).dot(face_cross(dented, int(f))) > 0.0);
    }
    // A loss that overflows stops the run with the iteration state.
    TriMesh spiky = sphere;
    for (int v : cap) spiky.vertices[v] *= 0.5 + 2.0 * (v % 2);
    cfg.learning_rate = 1e-3;
    cfg.lambda_smooth = std::numeric_limits<double>::max();
    CHECK_THROWS_WITH_AS(fuse_geometry(spiky, sphere, bumpy, cfg, 4), doctest::Contains("iteration"), NumericError);
}

TEST_CASE("fuse_geometry on the ridge scene") {
    const fixtures::RidgeScene scene = fixtures::ridge_scene();
    REQUIRE(!scene.regions.t_opt.empty());
    FusionConfig cfg;
    cfg.views = 24;
    cfg.resolution = 64;
    cfg.iterations = 100;
    cfg.min_edge = 0.01;
    cfg.max_edge = 0.12;
    const FusionResult res = fuse_geometry(scene.merged, scene.reference, scene.regions, cfg, 9);
    REQUIRE(res.trace.size() == 100);

    std::vector<char> free(scene.merged.vertices.size(), 0);
    for (int v : scene.regions.t_opt) free[v] = 1;
    int conserved = 0;
    for (std::size_t v = 0; v < res.mesh.vertices.size(); ++v) {
        const int o = res.vertex_origin[v];
        if (o < 0 || free[o]) continue;
        CHECK(res.mesh.vertices[v] == scene.merged.vertices[o]);
        ++conserved;
    }
    CHECK(conserved == int(scene.merged.vertices.size() - scene.regions.t_opt.size()));

    const int window = 50;
    std::vector<double> means;
    for (std::size_t s = 0; s + window <= res.trace.size(); s += window) {
        double m = 0.0;
        for (std::size_t i = s; i < s + window; ++i) m += res.trace[i].total;
        means.push_back(m / window);
    }
    for (std::size_t i = 1; i < means.size(); ++i) CHECK(means[i] <= means[i - 1]);
    const double before = seam_dihedral(scene.merged, scene.regions.t_opt);
    const double after = seam_dihedral(res.mesh, res.t_opt);
    MESSAGE("loss " << res.trace.front().total << " -> " << res.trace.back().total << ", dihedral " << before
                    << " -> " << after);
    CHECK(after < before);
}

TEST_CASE("rigid alignment") {
    TriMesh target_box = shapes::icosphere(3);
    for (Vec3& v : target_box.vertices) v = Vec3(v.x(), 0.7 * v.y(), 0.5 * v.z() + 0.2 * std::max(0.0, v.x()) * v.y());
    TriMesh moved = target_box;
    const Eigen::Matrix3d r = Eigen::AngleAxisd(0.1, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    for (Vec3& v : moved.vertices) v = r * v + Vec3(0.05, -0.03, 0.02);
    const TriMesh back = align_rigid(moved, target_box, 100);
    double err = 0.0;
    for (std::size_t v = 0; v < back.vertices.size(); ++v) err = std::max(err, (back.vertices[v] - target_box.vertices[v]).norm());
    CHECK(err < 1e-3);
}
