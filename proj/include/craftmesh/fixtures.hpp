#pragma once

#include "craftmesh/mesh.hpp"
#include "craftmesh/regions.hpp"
#include "craftmesh/texture.hpp"

namespace craftmesh::fixtures {

/// Flat plane with a sharp tent ridge along y, as left by a Boolean union of
/// a slab and a prism, plus a smooth reference ridge of the same height.
/// The seam runs along the two ridge feet.
struct RidgeScene {
    TriMesh merged;
    TriMesh reference;
    RegionSelection regions;
    double ridge_height = 0.3;
    double ridge_half_width = 0.5;
};

RidgeScene ridge_scene(int cells = 40);

/// UV sphere with an equirectangular atlas: one flat tone on the preserved
/// surface and a darker tone with a 2-texel checker on a rectangular patch
/// of new faces. The patch is a disk away from the poles and the UV seam.
struct TwoToneScene {
    TriMesh mesh;
    TextureAtlas atlas;
    RegionSelection regions;
    double checker_amplitude = 0.08;
};

TwoToneScene two_tone_sphere(int width = 256, int height = 128);

/// Relative change of 4-neighbour texel differences between two atlases,
/// sum |d_after - d_before| / sum |d_before| over RGB, restricted to added
/// texel pairs at least `margin` texels (Chebyshev) from any other texel.
double interior_detail_change(const TexelCorrespondence& corr, const TextureAtlas& before,
                              const TextureAtlas& after, int margin = 4);

}  // namespace craftmesh::fixtures
