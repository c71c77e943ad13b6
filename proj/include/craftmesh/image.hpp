#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace craftmesh {

/// Row-major multi-channel image of doubles, nominally in [0,1].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> values;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          values(static_cast<std::size_t>(w) * h * c, fill) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    double& at(int x, int y, int c) { return values[index(x, y) * channels + c]; }
    double at(int x, int y, int c) const { return values[index(x, y) * channels + c]; }
    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

/// Decodes an 8-bit PNG (gray, gray+alpha, RGB or RGBA) into [0,1] values.
/// Alpha is kept as a channel.
Image read_png(const std::filesystem::path& path);

/// Encodes an image with 1-4 channels as 8-bit PNG. Values are clamped to
/// [0,1] and rounded to the nearest byte.
void write_png(const Image& image, const std::filesystem::path& path);

/// Quantizes to bytes exactly as write_png does.
std::vector<std::uint8_t> to_bytes(const Image& image);
Image from_bytes(int width, int height, int channels, const std::vector<std::uint8_t>& bytes);

}  // namespace craftmesh
