#include "craftmesh/pipeline.hpp"

#include "craftmesh/distance.hpp"
#include "craftmesh/mesh_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace craftmesh {

Frame Frame::of(const TriMesh& mesh) {
    Frame f;
    const Aabb box = bounding_box(mesh);
    if (!box.valid()) return f;
    f.center = box.center();
    const double extent = box.extent().maxCoeff();
    f.scale = extent > 0.0 ? 1.0 / extent : 1.0;
    return f;
}

TriMesh Frame::to_unit(const TriMesh& mesh) const {
    TriMesh out = mesh;
    for (Vec3& p : out.vertices) p = (p - center) * scale;
    return out;
}

TriMesh Frame::from_unit(const TriMesh& mesh) const {
    TriMesh out = mesh;
    for (Vec3& p : out.vertices) p = p / scale + center;
    return out;
}

Camera reference_camera(const TriMesh& mesh, int resolution) {
    const Aabb box = bounding_box(mesh);
    const double radius = std::max(0.5 * box.diagonal(), 1e-9);
    Camera cam;
    cam.look_at = box.center();
    cam.eye = cam.look_at + Vec3(0.3, -1.0, 0.8).normalized() * (3.0 * radius);
    cam.up = Vec3(0, 0, 1);
    cam.width = resolution;
    cam.height = resolution;
    return cam;
}

Image render_reference(const TriMesh& mesh, int resolution) {
    const Image img = encode_normal_image(render(mesh, reference_camera(mesh, resolution)));
    return from_bytes(img.width, img.height, img.channels, to_bytes(img));
}

TriMesh with_packed_uvs(const TriMesh& mesh) {
    TriMesh out = mesh;
    const std::size_t cells = (mesh.faces.size() + 1) / 2;
    const int n = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cells)))));
    auto at = [n](int k, int l) { return Vec2(static_cast<double>(k) / n, static_cast<double>(l) / n); };
    out.uvs.emplace(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const int cell = static_cast<int>(f / 2);
        const int cx = cell % n;
        const int cy = cell / n;
        if (f % 2 == 0) {
            (*out.uvs)[f] = {at(cx, cy), at(cx + 1, cy), at(cx, cy + 1)};
        } else {
            (*out.uvs)[f] = {at(cx + 1, cy), at(cx + 1, cy + 1), at(cx, cy + 1)};
        }
    }
    return out;
}

std::vector<double> sample_atlas(const TextureAtlas& atlas, const Vec2& uv) {
    const int w = atlas.width();
    const int h = atlas.height();
    const double fx = std::clamp(uv.x() * w - 0.5, 0.0, w - 1.0);
    const double fy = std::clamp((1.0 - uv.y()) * h - 0.5, 0.0, h - 1.0);
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double tx = fx - x0;
    const double ty = fy - y0;
    std::vector<double> out(atlas.channel_count());
    for (int c = 0; c < atlas.channel_count(); ++c) {
        auto v = [&](int x, int y) { return atlas.value(static_cast<std::size_t>(y) * w + x, c); };
        out[c] = (1 - ty) * ((1 - tx) * v(x0, y0) + tx * v(x1, y0)) + ty * ((1 - tx) * v(x0, y1) + tx * v(x1, y1));
    }
    return out;
}

namespace {

Vec3 barycentric(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 v0 = b - a, v1 = c - a, v2 = p - a;
    const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
    const double d20 = v2.dot(v0), d21 = v2.dot(v1);
    const double den = d00 * d11 - d01 * d01;
    if (!(std::abs(den) > 0.0)) return Vec3(1, 0, 0);
    const double v = (d11 * d20 - d01 * d21) / den;
    const double w = (d00 * d21 - d01 * d20) / den;
    return Vec3(1.0 - v - w, v, w);
}

class SurfaceSampler {
public:
    explicit SurfaceSampler(const TexturedMesh& source) : source_(source), index_(source.mesh) {}

    std::vector<double> color_at(const Vec3& p) const {
        const ClosestHit hit = index_.closest(p);
        const Face& t = source_.mesh.faces[hit.face];
        const Vec3 b = barycentric(hit.point, source_.mesh.vertices[t[0]], source_.mesh.vertices[t[1]],
                                   source_.mesh.vertices[t[2]]);
        const FaceUv& uv = (*source_.mesh.uvs)[hit.face];
        return sample_atlas(source_.atlas, b[0] * uv[0] + b[1] * uv[1] + b[2] * uv[2]);
    }

private:
    const TexturedMesh& source_;
    DistanceIndex index_;
};

}  // namespace

TextureAtlas transfer_texture(const TriMesh& mesh, int resolution, const TexelCorrespondence& corr,
                              const TexturedMesh& preserved, const TexturedMesh& added) {
    if (!mesh.uvs) throw ParameterError("texture transfer needs a mesh with UVs");
    if (corr.width != resolution || corr.height != resolution) throw ParameterError("correspondence size mismatch");
    TextureAtlas atlas(resolution, resolution);
    atlas.valid.assign(atlas.texel_count(), 0);
    std::optional<SurfaceSampler> keep;
    std::optional<SurfaceSampler> fresh;
    for (std::size_t t = 0; t < atlas.texel_count(); ++t) {
        const TexelLabel label = corr.label[t];
        if (label == TexelLabel::invalid) continue;
        atlas.valid[t] = 1;
        std::optional<SurfaceSampler>& sampler = label == TexelLabel::added ? fresh : keep;
        if (!sampler) sampler.emplace(label == TexelLabel::added ? added : preserved);
        const std::vector<double> color = sampler->color_at(corr.samples[t].point);
        for (int c = 0; c < 3; ++c) atlas.set_value(t, c, color[c]);
    }
    return atlas;
}

namespace {

void write_list(std::ostream& out, const char* name, const std::vector<int>& list) {
    out << name << ' ' << list.size();
    for (int v : list) out << ' ' << v;
    out << '\n';
}

std::vector<int> read_list(std::istream& in, const char* name) {
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != name) throw FormatError(std::string("region file: expected '") + name + "'", 0);
    std::vector<int> out(n);
    for (int& v : out) {
        if (!(in >> v)) throw FormatError(std::string("region file: truncated list '") + name + "'", 0);
    }
    return out;
}

}  // namespace

void save_regions(const RegionSelection& r, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "eps0 " << format_double(r.eps0) << '\n' << "eps1 " << format_double(r.eps1) << '\n';
    out << "seam " << r.seam_vertices.size() << '\n';
    for (const Vec3& p : r.seam_vertices) {
        out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
    }
    write_list(out, "t_in", r.t_in);
    write_list(out, "e_in", r.e_in);
    write_list(out, "t_opt", r.t_opt);
    write_list(out, "new_faces", r.new_faces);
    write_list(out, "preserved_faces", r.preserved_faces);
    if (!out) throw IoError("failed writing " + path.string());
}

RegionSelection load_regions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    RegionSelection r;
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> r.eps0) || tag != "eps0") throw FormatError("region file: expected 'eps0'", 1);
    if (!(in >> tag >> r.eps1) || tag != "eps1") throw FormatError("region file: expected 'eps1'", 2);
    if (!(in >> tag >> n) || tag != "seam") throw FormatError("region file: expected 'seam'", 3);
    r.seam_vertices.resize(n);
    for (Vec3& p : r.seam_vertices) {
        if (!(in >> p.x() >> p.y() >> p.z())) throw FormatError("region file: truncated seam points", 0);
    }
    r.t_in = read_list(in, "t_in");
    r.e_in = read_list(in, "e_in");
    r.t_opt = read_list(in, "t_opt");
    r.new_faces = read_list(in, "new_faces");
    r.preserved_faces = read_list(in, "preserved_faces");
    return r;
}

}  // namespace craftmesh
