#include "craftmesh/fusion.hpp"

#include "craftmesh/errors.hpp"
#include "craftmesh/poisson.hpp"

#include <cmath>

namespace craftmesh {

Vec3 FaceTargets::target(int face) const {
    if (weight[face] <= 0.0) return Vec3::Zero();
    const double len = direction_sum[face].norm();
    return len > 0.0 ? Vec3(direction_sum[face] / len) : Vec3::Zero();
}

std::size_t FaceTargets::weighted_faces() const {
    std::size_t n = 0;
    for (double w : weight) n += w > 0.0;
    return n;
}

FaceTargets compute_blended_targets(const TriMesh& mesh_t, const TriMesh& mesh_e,
                                    const RegionSelection& regions, const std::vector<Camera>& cameras) {
    FaceTargets out(mesh_t.faces.size());
    out.view_pixels.assign(cameras.size(), 0);
    if (regions.t_opt.empty()) return out;

    const std::vector<int> opt_faces = faces_touching(mesh_t, regions.t_opt);
    std::vector<char> reference_face(mesh_e.faces.size(), 0);
    for (int f : faces_touching(mesh_e, regions.e_in)) reference_face[f] = 1;

    BlendOptions options;
    options.erode_border = true;
    long total = 0;
    for (std::size_t view = 0; view < cameras.size(); ++view) {
        const Camera& cam = cameras[view];
        const RenderTarget current = render(mesh_t, cam, opt_faces);
        PixelMask mask(current.width, current.height);
        mask.values = current.mask;
        mask = mask.without_border();
        if (mask.count() == 0) continue;

        const RenderTarget reference = render(mesh_e, cam);
        const Image target = encode_normal_image(current);
        Image source = target;
        for (std::size_t p = 0; p < reference.pixel_count(); ++p) {
            if (!reference.foreground(p) || !reference_face[reference.face_id[p]]) continue;
            for (int c = 0; c < 3; ++c) source.values[p * 3 + c] = 0.5 * (reference.normal[p][c] + 1.0);
        }
        const Image blended = blend_normal_images(target, source, mask, options);
        for (std::size_t p = 0; p < mask.values.size(); ++p) {
            if (!mask.values[p]) continue;
            const Vec3 n(2.0 * blended.values[p * 3] - 1.0, 2.0 * blended.values[p * 3 + 1] - 1.0,
                         2.0 * blended.values[p * 3 + 2] - 1.0);
            const double len = n.norm();
            if (len < 1e-6) continue;
            const int f = current.face_id[p];
            out.direction_sum[f] += n / len;
            out.weight[f] += 1.0;
            ++out.view_pixels[view];
            ++total;
        }
    }
    if (total == 0) throw ParameterError("no camera sees the faces around the optimized vertices");
    return out;
}

}  // namespace craftmesh
