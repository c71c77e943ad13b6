#include "craftmesh/pipeline.hpp"

#include "craftmesh/mesh_io.hpp"
#include "craftmesh/shapes.hpp"

#include <cmath>
#include <fstream>

namespace craftmesh {

namespace {

constexpr double kBumpRadius = 0.4;

// Sphere cap over the slab top, blended into the plane by a soft maximum so
// the reference has a fillet where the raw Boolean would have a crease.
double filleted_cap(double x, double y) {
    const double r2 = x * x + y * y;
    const double cap = std::sqrt(std::max(0.0, kBumpRadius * kBumpRadius - r2));
    const double s = 0.1;
    return s * std::log1p(std::exp(cap / s)) - s * std::log(2.0);
}

Image checker(int size, const Vec3& a, const Vec3& b, int cells) {
    Image img(size, size, 3);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const bool odd = ((x * cells / size) + (y * cells / size)) % 2 == 1;
            const Vec3& c = odd ? b : a;
            for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = c[ch];
        }
    }
    return img;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

}  // namespace

std::filesystem::path write_bump_fixture(const std::filesystem::path& dir, bool light) {
    namespace fs = std::filesystem;
    const fs::path backend = dir / "backend";
    fs::create_directories(backend);
    fs::remove(backend / "manifest.txt");

    const int view_resolution = light ? 64 : 256;
    const int texture_size = light ? 64 : 256;
    const std::string instruction = "add a round bump on top";

    const TriMesh slab = with_packed_uvs(shapes::box(Vec3(-1, -1, -0.6), Vec3(1, 1, 0)));
    save_mesh(slab, dir / "slab.obj");
    write_png(checker(texture_size, Vec3(0.8, 0.75, 0.65), Vec3(0.7, 0.65, 0.55), 8), dir / "slab.png");

    const TriMesh bump = shapes::icosphere(light ? 2 : 3, kBumpRadius);
    save_mesh(bump, backend / "bump.obj");
    const int n = light ? 32 : 96;
    const TriMesh reference = shapes::height_field(n, n, -1, 1, -1, 1, filleted_cap);
    save_mesh(reference, backend / "reference.obj");

    // Keys are computed from exactly what the workflow will see: the
    // reference render of the loaded slab and the PNGs read back from disk.
    const Image view = render_reference(load_mesh(dir / "slab.obj"), view_resolution);
    write_png(render_reference(reference, view_resolution), backend / "edited.png");
    write_png(render_reference(bump, view_resolution), backend / "region.png");
    FilesystemBackend::stage(backend, "image-edit", image_edit_key(view, instruction), {"edited.png", "region.png"});
    FilesystemBackend::stage(backend, "mesh-gen", mesh_gen_key(read_png(backend / "edited.png")), {"reference.obj"});
    FilesystemBackend::stage(backend, "mesh-gen", mesh_gen_key(read_png(backend / "region.png")), {"bump.obj"});

    save_mesh(with_packed_uvs(bump), backend / "bump_textured.obj");
    write_png(checker(texture_size, Vec3(0.45, 0.2, 0.15), Vec3(0.5, 0.25, 0.2), 16), backend / "bump.png");
    FilesystemBackend::stage(backend, "texture-gen", texture_gen_key(load_mesh(backend / "bump.obj"), instruction),
                             {"bump_textured.obj", "bump.png"});

    std::string config = "task = insert\n"
                         "mesh = slab.obj\n"
                         "texture = slab.png\n"
                         "backend_root = backend\n"
                         "output = out\n"
                         "instruction = " + instruction + "\n"
                         "view_resolution = " + std::to_string(view_resolution) + "\n";
    if (light) {
        config += "grid_resolution = 32\n"
                  "atlas_resolution = 128\n"
                  "views = 4\n"
                  "render_resolution = 64\n"
                  "iterations = 20\n"
                  "remesh_interval = 10\n"
                  "reblend_interval = 10\n"
                  "min_edge = 0.01\n"
                  "max_edge = 0.12\n";
    } else {
        config += "grid_resolution = 64\n"
                  "atlas_resolution = 512\n"
                  "views = 24\n"
                  "render_resolution = 256\n"
                  "iterations = 200\n"
                  "min_edge = 0.008\n"
                  "max_edge = 0.03\n";
    }
    write_text(dir / "config.txt", config);
    return dir / "config.txt";
}

}  // namespace craftmesh
