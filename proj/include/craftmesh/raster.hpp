#pragma once

#include "craftmesh/image.hpp"
#include "craftmesh/mesh.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace craftmesh {

struct Camera {
    Vec3 eye = Vec3(0, 0, 3);
    Vec3 look_at = Vec3::Zero();
    Vec3 up = Vec3(0, 1, 0);
    double fov_y = 40.0 * M_PI / 180.0;  ///< radians, perspective only
    int width = 512;
    int height = 512;
    bool orthographic = false;
    double ortho_half_height = 1.0;  ///< half the view height in model units

    /// Throws ParameterError unless eye != look_at, up is not parallel to the
    /// view direction, 0 < fov < pi and both sides are at least 8 pixels.
    void validate() const;
};

/// Orthonormal camera frame: forward points from eye to look_at, row 0 of
/// the image is at the top.
struct CameraFrame {
    Vec3 forward;
    Vec3 right;
    Vec3 up;
};
CameraFrame camera_frame(const Camera& camera);

struct Ray {
    Vec3 origin;
    Vec3 direction;  ///< unit length
};

/// Ray through the centre of pixel (x, y).
Ray pixel_ray(const Camera& camera, int x, int y);

/// Cameras looking at `center` from `radius` away. Directions follow a
/// Fibonacci lattice under a seeded random rotation plus a small seeded
/// jitter. Throws ParameterError if count < 1 or radius <= 0.
std::vector<Camera> sample_viewpoints(int count, const Vec3& center, double radius, std::uint64_t seed,
                                      int width = 512, int height = 512);

/// Per-pixel geometry buffers. Background: normal (0,0,0), mask 0,
/// face_id -1, depth +inf.
struct RenderTarget {
    int width = 0;
    int height = 0;
    std::vector<Vec3> normal;  ///< flat world-space face normal
    std::vector<std::uint8_t> mask;
    std::vector<int> face_id;
    std::vector<double> depth;  ///< distance from the eye along the pixel ray
    /// Pixels where two different faces produced exactly the same depth;
    /// the lower face index was kept.
    int depth_ties = 0;

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    std::size_t pixel_count() const { return normal.size(); }
    bool foreground(std::size_t p) const { return face_id[p] >= 0; }
};

/// Z-buffered point-sampled rasterization with flat per-face normals and no
/// culling. `mask` marks pixels whose visible face is in `face_subset`
/// (every covered pixel when absent). Degenerate faces and faces reaching
/// behind the eye plane are skipped.
RenderTarget render(const TriMesh& mesh, const Camera& camera,
                    const std::optional<std::vector<int>>& face_subset = std::nullopt);

/// (n + 1) / 2 per channel; background is 0.5 gray.
Image encode_normal_image(const RenderTarget& target);

/// Inverse of the encoding; pixels that decode to (near) zero become the
/// zero vector, everything else is renormalized.
std::vector<Vec3> decode_normal_image(const Image& image);

/// Writes <prefix>_normal.png, <prefix>_mask.png and <prefix>_depth.png.
void write_debug_images(const RenderTarget& target, const std::filesystem::path& prefix);

}  // namespace craftmesh
