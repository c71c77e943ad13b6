#include "craftmesh/fixtures.hpp"

#include "craftmesh/shapes.hpp"

#include <cmath>

namespace craftmesh::fixtures {

namespace {

// Ramp max(0, t) convolved with a Gaussian of width sigma.
double smooth_ramp(double t, double sigma) {
    const double z = t / sigma;
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    return t * cdf + sigma * pdf;
}

}  // namespace

RidgeScene ridge_scene(int cells) {
    RidgeScene scene;
    const double h = scene.ridge_height;
    const double w = scene.ridge_half_width;
    scene.merged = shapes::height_field(cells, cells, -1, 1, -1, 1,
                                        [&](double x, double) { return h * std::max(0.0, 1.0 - std::abs(x) / w); });
    const double sigma = 0.15;
    const int ref_cells = cells + cells / 4;
    scene.reference = shapes::height_field(ref_cells, ref_cells, -1, 1, -1, 1, [&](double x, double) {
        return h / w * (smooth_ramp(x + w, sigma) - 2.0 * smooth_ramp(x, sigma) + smooth_ramp(x - w, sigma));
    });
    scene.merged.uvs.reset();
    scene.reference.uvs.reset();

    std::vector<Vec3> seam;
    for (const Vec3& v : scene.merged.vertices) {
        if (std::abs(std::abs(v.x()) - w) < 1e-9) seam.push_back(v);
    }
    scene.regions = extract_regions(scene.merged, scene.reference, seam, 0.2, 0.12);
    return scene;
}

}  // namespace craftmesh::fixtures
