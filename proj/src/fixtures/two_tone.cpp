#include "craftmesh/fixtures.hpp"

#include "craftmesh/shapes.hpp"

#include <cmath>

namespace craftmesh::fixtures {

TwoToneScene two_tone_sphere(int width, int height) {
    TwoToneScene scene;
    scene.mesh = shapes::uv_sphere(32, 16, 1.0);
    for (std::size_t f = 0; f < scene.mesh.faces.size(); ++f) {
        const FaceUv& uv = (*scene.mesh.uvs)[f];
        const Vec2 c = (uv[0] + uv[1] + uv[2]) / 3.0;
        const bool patch = c.x() > 0.25 && c.x() < 0.5 && c.y() > 0.3 && c.y() < 0.7;
        (patch ? scene.regions.new_faces : scene.regions.preserved_faces).push_back(static_cast<int>(f));
    }

    const TexelCorrespondence corr = build_correspondence(scene.mesh, width, height, scene.regions.new_faces);
    scene.atlas = TextureAtlas(width, height);
    scene.atlas.valid.assign(scene.atlas.texel_count(), 0);
    const double preserved[3] = {0.75, 0.68, 0.6};
    const double fresh[3] = {0.3, 0.38, 0.45};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t t = static_cast<std::size_t>(y) * width + x;
            if (corr.label[t] == TexelLabel::invalid) continue;
            scene.atlas.valid[t] = 1;
            const double sign = (x + y) % 2 == 0 ? 1.0 : -1.0;
            for (int c = 0; c < 3; ++c) {
                const double v = corr.label[t] == TexelLabel::added ? fresh[c] + sign * scene.checker_amplitude
                                                                    : preserved[c];
                scene.atlas.set_value(t, c, v);
            }
        }
    }
    return scene;
}

double interior_detail_change(const TexelCorrespondence& corr, const TextureAtlas& before,
                              const TextureAtlas& after, int margin) {
    const int w = corr.width;
    const int h = corr.height;
    auto interior = [&](int x, int y) {
        for (int dy = -margin; dy <= margin; ++dy) {
            for (int dx = -margin; dx <= margin; ++dx) {
                const int u = x + dx;
                const int v = y + dy;
                if (u < 0 || v < 0 || u >= w || v >= h) return false;
                if (corr.label[static_cast<std::size_t>(v) * w + u] != TexelLabel::added) return false;
            }
        }
        return true;
    };
    double change = 0.0;
    double total = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!interior(x, y)) continue;
            const std::size_t t = static_cast<std::size_t>(y) * w + x;
            for (const std::size_t u : {t + 1, t + static_cast<std::size_t>(w)}) {
                const int ux = static_cast<int>(u % w);
                const int uy = static_cast<int>(u / w);
                if (uy >= h || !interior(ux, uy)) continue;
                for (int c = 0; c < 3; ++c) {
                    const double db = before.value(u, c) - before.value(t, c);
                    const double da = after.value(u, c) - after.value(t, c);
                    change += std::abs(da - db);
                    total += std::abs(db);
                }
            }
        }
    }
    return total > 0.0 ? change / total : 0.0;
}

}  // namespace craftmesh::fixtures
