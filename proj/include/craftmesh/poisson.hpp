#pragma once

#include "craftmesh/image.hpp"
#include "craftmesh/linalg.hpp"

#include <cstdint>
#include <vector>

namespace craftmesh {

/// Per-pixel {0,1} selection over an image grid.
struct PixelMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;

    PixelMask() = default;
    PixelMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    bool at(int x, int y) const { return values[index(x, y)] != 0; }
    void set(int x, int y, bool v) { values[index(x, y)] = v ? 1 : 0; }
    std::size_t count() const;
    bool touches_border() const;
    /// Unselected pixels 4-adjacent to a selected one.
    PixelMask boundary() const;
    /// Clears selected pixels on the outermost ring.
    PixelMask without_border() const;
};

/// Mask from a single-channel image: selected where the value is >= 0.5.
PixelMask mask_from_image(const Image& image);
Image mask_to_image(const PixelMask& mask);

struct BlendOptions {
    bool mixed_gradients = false;  ///< keep the stronger of source/target gradient per edge
    bool erode_border = false;     ///< drop mask pixels on the image border instead of failing
    bool clamp_output = true;      ///< clamp the blended pixels to [0,1]
    double tolerance = 1e-12;      ///< relative CG residual
};

/// Poisson image editing: inside the mask the output has the source's
/// gradients, on the boundary it meets the target, outside it is the target
/// bit for bit. Channels are solved independently with CG on the 5-point
/// Laplacian. Throws ParameterError on size/channel mismatch or a mask that
/// touches the image border (unless erode_border), NumericError if the
/// solver fails to converge.
Image poisson_blend(const Image& target, const Image& source, const PixelMask& mask,
                    const BlendOptions& options = {}, linalg::SolveReport* report = nullptr);

/// Blends encoded normal maps channel-wise and renormalizes every blended
/// pixel to a unit normal in the same encoding.
Image blend_normal_images(const Image& target, const Image& source, const PixelMask& mask,
                          const BlendOptions& options = {});

}  // namespace craftmesh
