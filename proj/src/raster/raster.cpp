#include "craftmesh/raster.hpp"

#include "craftmesh/errors.hpp"
#include "craftmesh/random.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>

namespace craftmesh {

void Camera::validate() const {
    if ((eye - look_at).norm() <= 0.0) throw ParameterError("camera eye coincides with look_at");
    if (!(fov_y > 0.0 && fov_y < M_PI)) throw ParameterError("camera fov must lie in (0, pi)");
    if (width < 8 || height < 8) throw ParameterError("camera resolution must be at least 8x8");
    const Vec3 f = (look_at - eye).normalized();
    if (f.cross(up).norm() < 1e-9 * std::max(1.0, up.norm())) {
        throw ParameterError("camera up vector is parallel to the view direction");
    }
    if (orthographic && !(ortho_half_height > 0.0)) throw ParameterError("orthographic extent must be positive");
}

CameraFrame camera_frame(const Camera& camera) {
    CameraFrame fr;
    fr.forward = (camera.look_at - camera.eye).normalized();
    fr.right = fr.forward.cross(camera.up).normalized();
    fr.up = fr.right.cross(fr.forward);
    return fr;
}

namespace {

double aspect(const Camera& c) { return static_cast<double>(c.width) / c.height; }

Vec2 ndc(const Camera& c, int x, int y) {
    return {2.0 * (x + 0.5) / c.width - 1.0, 1.0 - 2.0 * (y + 0.5) / c.height};
}

Ray make_ray(const Camera& c, const CameraFrame& fr, int x, int y) {
    const Vec2 s = ndc(c, x, y);
    if (c.orthographic) {
        const double hh = c.ortho_half_height;
        return {c.eye + s.x() * hh * aspect(c) * fr.right + s.y() * hh * fr.up, fr.forward};
    }
    const double th = std::tan(0.5 * c.fov_y);
    const Vec3 d = fr.forward + s.x() * th * aspect(c) * fr.right + s.y() * th * fr.up;
    return {c.eye, d.normalized()};
}

}  // namespace

Ray pixel_ray(const Camera& camera, int x, int y) { return make_ray(camera, camera_frame(camera), x, y); }

std::vector<Camera> sample_viewpoints(int count, const Vec3& center, double radius, std::uint64_t seed,
                                      int width, int height) {
    if (count < 1) throw ParameterError("viewpoint count must be at least 1");
    if (!(radius > 0.0)) throw ParameterError("viewpoint radius must be positive");
    Rng rng(seed);
    // Uniform random rotation from a uniform unit quaternion.
    const double u1 = rng.uniform();
    const double u2 = rng.uniform(0.0, 2.0 * M_PI);
    const double u3 = rng.uniform(0.0, 2.0 * M_PI);
    const Eigen::Quaterniond q(std::sqrt(u1) * std::cos(u3), std::sqrt(1 - u1) * std::sin(u2),
                               std::sqrt(1 - u1) * std::cos(u2), std::sqrt(u1) * std::sin(u3));
    const Eigen::Matrix3d rot = q.normalized().toRotationMatrix();
    const double jitter = 0.1 * std::sqrt(4.0 * M_PI / count);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));

    std::vector<Camera> cams;
    cams.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / count;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        Vec3 dir = rot * Vec3(r * std::cos(phi), r * std::sin(phi), z);
        // Tangential jitter of at most `jitter` radians.
        Vec3 t1 = dir.unitOrthogonal();
        Vec3 t2 = dir.cross(t1);
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        const double m = jitter * rng.uniform();
        dir = (std::cos(m) * dir + std::sin(m) * (std::cos(a) * t1 + std::sin(a) * t2)).normalized();

        Camera c;
        c.eye = center + radius * dir;
        c.look_at = center;
        c.up = std::abs(dir.z()) > 0.9 ? Vec3(0, 1, 0) : Vec3(0, 0, 1);
        c.width = width;
        c.height = height;
        cams.push_back(c);
    }
    return cams;
}

RenderTarget render(const TriMesh& mesh, const Camera& camera, const std::optional<std::vector<int>>& face_subset) {
    camera.validate();
    RenderTarget t;
    t.width = camera.width;
    t.height = camera.height;
    const std::size_t n = static_cast<std::size_t>(t.width) * t.height;
    t.normal.assign(n, Vec3::Zero());
    t.mask.assign(n, 0);
    t.face_id.assign(n, -1);
    t.depth.assign(n, std::numeric_limits<double>::infinity());

    const CameraFrame fr = camera_frame(camera);
    const double th = std::tan(0.5 * camera.fov_y);
    const double asp = aspect(camera);
    const double near = 1e-9 * std::max(1.0, (camera.eye - camera.look_at).norm());

    // Screen positions in continuous pixel units; pixel centres sit at +0.5.
    std::vector<Vec2> screen(mesh.vertices.size());
    std::vector<char> in_front(mesh.vertices.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const Vec3 q = mesh.vertices[v] - camera.eye;
        const double z = q.dot(fr.forward);
        in_front[v] = z > near;
        double sx;
        double sy;
        if (camera.orthographic) {
            sx = q.dot(fr.right) / (camera.ortho_half_height * asp);
            sy = q.dot(fr.up) / camera.ortho_half_height;
        } else {
            sx = q.dot(fr.right) / (z * th * asp);
            sy = q.dot(fr.up) / (z * th);
        }
        screen[v] = Vec2((sx + 1.0) * 0.5 * t.width, (1.0 - sy) * 0.5 * t.height);
    }

    // Edge functions are evaluated with the lower vertex index first so two
    // faces sharing an edge see bit-identical values; with an inclusive test
    // no pixel centre falls through a crack.
    auto edge = [&](int u, int v, double px, double py) {
        const bool swap = u > v;
        const Vec2& a = screen[swap ? v : u];
        const Vec2& b = screen[swap ? u : v];
        const double e = (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
        return swap ? -e : e;
    };

    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& tri = mesh.faces[f];
        if (!in_front[tri[0]] || !in_front[tri[1]] || !in_front[tri[2]]) continue;
        if (is_degenerate(mesh, static_cast<int>(f))) continue;
        const double area = edge(tri[0], tri[1], screen[tri[2]].x(), screen[tri[2]].y());
        if (area == 0.0) continue;
        const double sign = area > 0.0 ? 1.0 : -1.0;
        const Vec3 normal = face_normal(mesh, static_cast<int>(f));
        const Vec3& p0 = mesh.vertices[tri[0]];

        const double min_x = std::min({screen[tri[0]].x(), screen[tri[1]].x(), screen[tri[2]].x()});
        const double max_x = std::max({screen[tri[0]].x(), screen[tri[1]].x(), screen[tri[2]].x()});
        const double min_y = std::min({screen[tri[0]].y(), screen[tri[1]].y(), screen[tri[2]].y()});
        const double max_y = std::max({screen[tri[0]].y(), screen[tri[1]].y(), screen[tri[2]].y()});
        const int x0 = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
        const int x1 = std::min(t.width - 1, static_cast<int>(std::floor(max_x - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
        const int y1 = std::min(t.height - 1, static_cast<int>(std::floor(max_y - 0.5)));

        for (int y = y0; y <= y1; ++y) {
            const double py = y + 0.5;
            for (int x = x0; x <= x1; ++x) {
                const double px = x + 0.5;
                if (sign * edge(tri[0], tri[1], px, py) < 0.0 || sign * edge(tri[1], tri[2], px, py) < 0.0 ||
                    sign * edge(tri[2], tri[0], px, py) < 0.0) {
                    continue;
                }
                const Ray ray = make_ray(camera, fr, x, y);
                const double denom = normal.dot(ray.direction);
                if (std::abs(denom) < 1e-12) continue;
                const double depth = normal.dot(p0 - ray.origin) / denom;
                if (!(depth > 0.0)) continue;
                const std::size_t p = t.index(x, y);
                if (depth < t.depth[p]) {
                    t.depth[p] = depth;
                    t.face_id[p] = static_cast<int>(f);
                    t.normal[p] = normal;
                } else if (depth == t.depth[p]) {
                    ++t.depth_ties;
                }
            }
        }
    }

    std::vector<char> selected;
    if (face_subset) {
        selected.assign(mesh.faces.size(), 0);
        for (int f : *face_subset) {
            if (f >= 0 && static_cast<std::size_t>(f) < selected.size()) selected[f] = 1;
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (t.face_id[p] >= 0) t.mask[p] = face_subset ? selected[t.face_id[p]] : 1;
    }
    return t;
}

Image encode_normal_image(const RenderTarget& target) {
    Image img(target.width, target.height, 3, 0.5);
    for (std::size_t p = 0; p < target.pixel_count(); ++p) {
        if (!target.foreground(p)) continue;
        for (int c = 0; c < 3; ++c) img.values[p * 3 + c] = 0.5 * (target.normal[p][c] + 1.0);
    }
    return img;
}

std::vector<Vec3> decode_normal_image(const Image& image) {
    if (image.channels < 3) throw ParameterError("normal image needs 3 channels");
    std::vector<Vec3> out(image.pixel_count(), Vec3::Zero());
    for (std::size_t p = 0; p < out.size(); ++p) {
        const double* px = &image.values[p * image.channels];
        const Vec3 n(2.0 * px[0] - 1.0, 2.0 * px[1] - 1.0, 2.0 * px[2] - 1.0);
        if (n.norm() > 0.5) out[p] = n.normalized();
    }
    return out;
}

void write_debug_images(const RenderTarget& target, const std::filesystem::path& prefix) {
    write_png(encode_normal_image(target), prefix.string() + "_normal.png");
    Image mask(target.width, target.height, 1);
    Image depth(target.width, target.height, 1);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t p = 0; p < target.pixel_count(); ++p) {
        mask.values[p] = target.mask[p];
        if (target.foreground(p)) {
            lo = std::min(lo, target.depth[p]);
            hi = std::max(hi, target.depth[p]);
        }
    }
    for (std::size_t p = 0; p < target.pixel_count(); ++p) {
        if (target.foreground(p)) depth.values[p] = hi > lo ? 1.0 - (target.depth[p] - lo) / (hi - lo) : 1.0;
    }
    write_png(mask, prefix.string() + "_mask.png");
    write_png(depth, prefix.string() + "_depth.png");
}

}  // namespace craftmesh
