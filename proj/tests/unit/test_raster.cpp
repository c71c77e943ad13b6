#include "craftmesh/errors.hpp"
#include "craftmesh/random.hpp"
#include "craftmesh/raster.hpp"
#include "craftmesh/shapes.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace craftmesh;

namespace {

Camera front_camera(int size = 64) {
    Camera c;
    c.eye = Vec3(0, 0, 3);
    c.look_at = Vec3::Zero();
    c.up = Vec3(0, 1, 0);
    c.width = size;
    c.height = size;
    return c;
}

TriMesh triangle(double z, const Vec3& a, const Vec3& b, const Vec3& c) {
    TriMesh m;
    m.vertices = {a + Vec3(0, 0, z), b + Vec3(0, 0, z), c + Vec3(0, 0, z)};
    m.faces = {{0, 1, 2}};
    return m;
}

// Moller-Trumbore ray/triangle distance, or NaN when missed.
double ray_triangle(const Ray& r, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 p = r.direction.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-15) return std::nan("");
    const Vec3 s = r.origin - a;
    const double u = s.dot(p) / det;
    const Vec3 q = s.cross(e1);
    const double v = r.direction.dot(q) / det;
    const double tol = 1e-9;
    if (u < -tol || v < -tol || u + v > 1 + tol) return std::nan("");
    return e2.dot(q) / det;
}

}  // namespace

TEST_CASE("sample_viewpoints") {
    const auto one = sample_viewpoints(1, Vec3(1, 2, 3), 2.5, 0);
    REQUIRE(one.size() == 1);
    CHECK(std::abs((one[0].eye - Vec3(1, 2, 3)).norm() - 2.5) < 1e-9);
    CHECK(one[0].look_at == Vec3(1, 2, 3));
    one[0].validate();

    const auto a = sample_viewpoints(6, Vec3::Zero(), 1.0, 7);
    const auto b = sample_viewpoints(6, Vec3::Zero(), 1.0, 7);
    for (int i = 0; i < 6; ++i) {
        CHECK(a[i].eye == b[i].eye);
        CHECK(a[i].up == b[i].up);
    }
    const auto other = sample_viewpoints(6, Vec3::Zero(), 1.0, 8);
    CHECK(other[0].eye != a[0].eye);

    const int n = 100;
    const auto many = sample_viewpoints(n, Vec3::Zero(), 1.0, 3);
    const double ideal = std::sqrt(4.0 * M_PI / n);
    double min_angle = M_PI;
    for (int i = 0; i < n; ++i) {
        many[i].validate();
        CHECK(std::abs(many[i].eye.norm() - 1.0) < 1e-9);
        for (int j = i + 1; j < n; ++j) {
            const double c = std::clamp(many[i].eye.normalized().dot(many[j].eye.normalized()), -1.0, 1.0);
            min_angle = std::min(min_angle, std::acos(c));
        }
    }
    MESSAGE("min separation / ideal spacing = " << min_angle / ideal);
    CHECK(min_angle >= 0.5 * ideal);

    CHECK_THROWS_AS(sample_viewpoints(0, Vec3::Zero(), 1.0, 0), ParameterError);
    CHECK_THROWS_AS(sample_viewpoints(3, Vec3::Zero(), 0.0, 0), ParameterError);
}

TEST_CASE("camera validation") {
    Camera c = front_camera();
    c.look_at = c.eye;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = front_camera();
    c.fov_y = M_PI;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = front_camera(4);
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = front_camera();
    c.up = Vec3(0, 0, 1);
    CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("head-on triangle") {
    const TriMesh m = triangle(0, Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(0, 1, 0));
    const RenderTarget t = render(m, front_camera());
    int covered = 0;
    for (std::size_t p = 0; p < t.pixel_count(); ++p) {
        if (!t.foreground(p)) {
            CHECK(t.normal[p] == Vec3::Zero());
            CHECK(t.mask[p] == 0);
            CHECK(std::isinf(t.depth[p]));
            continue;
        }
        ++covered;
        CHECK(t.face_id[p] == 0);
        CHECK(t.mask[p] == 1);
        CHECK((t.normal[p] - Vec3(0, 0, 1)).norm() < 1e-12);
    }
    CHECK(covered > 100);

    TriMesh flipped = m;
    std::swap(flipped.faces[0][1], flipped.faces[0][2]);
    const RenderTarget back = render(flipped, front_camera());
    CHECK(back.face_id == t.face_id);
    for (std::size_t p = 0; p < back.pixel_count(); ++p) {
        if (back.foreground(p)) CHECK((back.normal[p] - Vec3(0, 0, -1)).norm() < 1e-12);
    }
}

TEST_CASE("z-buffer keeps the nearer of stacked triangles") {
    const TriMesh far = triangle(-0.5, Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(0, 1, 0));
    const TriMesh near = triangle(0.5, Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(0, 1, 0));
    const RenderTarget t = render(concatenate(far, near), front_camera());
    const RenderTarget alone = render(near, front_camera());
    for (std::size_t p = 0; p < t.pixel_count(); ++p) {
        if (alone.foreground(p)) CHECK(t.face_id[p] == 1);
    }
    // Identical coplanar faces tie; the lower index wins and the tie is counted.
    const RenderTarget tie = render(concatenate(near, near), front_camera());
    int fg = 0;
    for (std::size_t p = 0; p < tie.pixel_count(); ++p) {
        if (tie.foreground(p)) {
            ++fg;
            CHECK(tie.face_id[p] == 0);
        }
    }
    CHECK(tie.depth_ties == fg);
}

TEST_CASE("sphere coverage matches the projected disk") {
    const TriMesh sphere = shapes::icosphere(4);
    for (const Camera& base : sample_viewpoints(4, Vec3::Zero(), 3.0, 11, 128, 96)) {
        const RenderTarget t = render(sphere, base);
        const long covered = std::count_if(t.face_id.begin(), t.face_id.end(), [](int f) { return f >= 0; });
        const double alpha = std::asin(1.0 / 3.0);
        const double focal = 0.5 * base.height / std::tan(0.5 * base.fov_y);
        const double expected = M_PI * std::pow(std::tan(alpha) * focal, 2);
        CHECK(std::abs(covered - expected) < 0.05 * expected);
        CHECK(t.depth_ties == 0);
    }
}

TEST_CASE("closed mesh renders without cracks") {
    const TriMesh sphere = shapes::icosphere(3);
    const RenderTarget t = render(sphere, front_camera(96));
    // Every pixel whose centre ray hits the sphere mesh must be covered.
    for (int y = 0; y < t.height; ++y) {
        for (int x = 0; x < t.width; ++x) {
            const Ray r = pixel_ray(front_camera(96), x, y);
            bool hit = false;
            for (const Face& f : sphere.faces) {
                const double d = ray_triangle(r, sphere.vertices[f[0]], sphere.vertices[f[1]], sphere.vertices[f[2]]);
                if (d > 0) {
                    hit = true;
                    break;
                }
            }
            if (hit) CHECK(t.foreground(t.index(x, y)));
        }
    }
}

TEST_CASE("stored depth matches an independent ray intersection") {
    const TriMesh mesh = concatenate(shapes::icosphere(2, 0.7, Vec3(0.3, 0, 0)), shapes::box(Vec3(-1, -1, -1), Vec3(0, 0.5, 0)));
    for (const Camera& cam : sample_viewpoints(3, Vec3::Zero(), 3.0, 5, 80, 80)) {
        const RenderTarget t = render(mesh, cam);
        Rng rng(17);
        int sampled = 0;
        for (int attempt = 0; attempt < 20000 && sampled < 1000; ++attempt) {
            const int x = int(rng.below(t.width));
            const int y = int(rng.below(t.height));
            const std::size_t p = t.index(x, y);
            if (!t.foreground(p)) continue;
            ++sampled;
            const Face& f = mesh.faces[t.face_id[p]];
            const double d = ray_triangle(pixel_ray(cam, x, y), mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
            REQUIRE(!std::isnan(d));
            CHECK(std::abs(d - t.depth[p]) <= 1e-6);
            CHECK(std::abs(t.normal[p].norm() - 1.0) <= 1e-6);
        }
        CHECK(sampled == 1000);
    }
}

TEST_CASE("subset mask and permutation invariance") {
    const TriMesh sphere = shapes::icosphere(2);
    const Camera cam = sample_viewpoints(1, Vec3::Zero(), 3.0, 2, 64, 64)[0];
    std::vector<int> subset;
    for (int f = 0; f < int(sphere.faces.size()); f += 3) subset.push_back(f);
    const RenderTarget all = render(sphere, cam);
    const RenderTarget part = render(sphere, cam, subset);
    CHECK(part.face_id == all.face_id);
    bool some_off = false;
    for (std::size_t p = 0; p < all.pixel_count(); ++p) {
        CHECK(part.mask[p] <= all.mask[p]);
        if (part.mask[p]) CHECK(std::binary_search(subset.begin(), subset.end(), part.face_id[p]));
        some_off = some_off || (all.mask[p] && !part.mask[p]);
    }
    CHECK(some_off);

    std::vector<int> perm(sphere.faces.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(3);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    TriMesh shuffled = sphere;
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled.faces[i] = sphere.faces[perm[i]];
    const RenderTarget s = render(shuffled, cam);
    REQUIRE(all.depth_ties == 0);
    REQUIRE(s.depth_ties == 0);
    for (std::size_t p = 0; p < all.pixel_count(); ++p) {
        CHECK(all.foreground(p) == s.foreground(p));
        if (s.foreground(p)) CHECK(perm[s.face_id[p]] == all.face_id[p]);
    }

    CHECK(render(TriMesh{}, cam).face_id == std::vector<int>(64 * 64, -1));
}

TEST_CASE("normal image encoding") {
    RenderTarget t;
    t.width = 2;
    t.height = 1;
    t.normal = {Vec3(0, 0, 1), Vec3::Zero()};
    t.mask = {1, 0};
    t.face_id = {0, -1};
    t.depth = {1.0, std::numeric_limits<double>::infinity()};
    const Image img = encode_normal_image(t);
    CHECK(img.at(0, 0, 0) == 0.5);
    CHECK(img.at(0, 0, 1) == 0.5);
    CHECK(img.at(0, 0, 2) == 1.0);
    for (int c = 0; c < 3; ++c) CHECK(img.at(1, 0, c) == 0.5);

    const RenderTarget sphere = render(shapes::icosphere(2), front_camera());
    const auto decoded = decode_normal_image(encode_normal_image(sphere));
    for (std::size_t p = 0; p < sphere.pixel_count(); ++p) {
        if (sphere.foreground(p)) CHECK((decoded[p] - sphere.normal[p]).norm() <= 1e-6);
        else CHECK(decoded[p] == Vec3::Zero());
    }
}

TEST_CASE("orthographic rendering") {
    Camera c = front_camera();
    c.orthographic = true;
    c.ortho_half_height = 2.0;
    const TriMesh quad = shapes::height_field(1, 1, -1, 1, -1, 1, [](double, double) { return 0.0; });
    const RenderTarget t = render(quad, c);
    const long covered = std::count_if(t.face_id.begin(), t.face_id.end(), [](int f) { return f >= 0; });
    CHECK(covered == 32 * 32);
    for (std::size_t p = 0; p < t.pixel_count(); ++p) {
        if (t.foreground(p)) CHECK(std::abs(t.depth[p] - 3.0) < 1e-12);
    }
}
