#include "craftmesh/poisson.hpp"

#include "craftmesh/errors.hpp"

#include <algorithm>
#include <cmath>

namespace craftmesh {

std::size_t PixelMask::count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](std::uint8_t v) { return v != 0; }));
}

bool PixelMask::touches_border() const {
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if ((x == 0 || y == 0 || x == width - 1 || y == height - 1) && at(x, y)) return true;
        }
    }
    return false;
}

PixelMask PixelMask::boundary() const {
    PixelMask out(width, height);
    static constexpr int dx[4] = {1, -1, 0, 0};
    static constexpr int dy[4] = {0, 0, 1, -1};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (at(x, y)) continue;
            for (int k = 0; k < 4; ++k) {
                const int nx = x + dx[k];
                const int ny = y + dy[k];
                if (nx >= 0 && ny >= 0 && nx < width && ny < height && at(nx, ny)) {
                    out.set(x, y, true);
                    break;
                }
            }
        }
    }
    return out;
}

PixelMask PixelMask::without_border() const {
    PixelMask out = *this;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (x == 0 || y == 0 || x == width - 1 || y == height - 1) out.set(x, y, false);
        }
    }
    return out;
}

PixelMask mask_from_image(const Image& image) {
    PixelMask m(image.width, image.height);
    for (std::size_t p = 0; p < m.values.size(); ++p) m.values[p] = image.values[p * image.channels] >= 0.5;
    return m;
}

Image mask_to_image(const PixelMask& mask) {
    Image img(mask.width, mask.height, 1);
    for (std::size_t p = 0; p < mask.values.size(); ++p) img.values[p] = mask.values[p] ? 1.0 : 0.0;
    return img;
}

Image poisson_blend(const Image& target, const Image& source, const PixelMask& mask,
                    const BlendOptions& options, linalg::SolveReport* report) {
    if (!target.same_shape(source)) throw ParameterError("target and source images differ in shape");
    if (mask.width != target.width || mask.height != target.height) {
        throw ParameterError("mask size does not match the images");
    }
    PixelMask region = mask;
    if (region.touches_border()) {
        if (!options.erode_border) throw ParameterError("blend mask touches the image border");
        region = region.without_border();
    }

    const int w = target.width;
    const int channels = target.channels;
    std::vector<int> unknown(region.values.size(), -1);
    std::vector<std::size_t> pixels;
    for (std::size_t p = 0; p < region.values.size(); ++p) {
        if (region.values[p]) {
            unknown[p] = static_cast<int>(pixels.size());
            pixels.push_back(p);
        }
    }
    Image out = target;
    if (report) *report = linalg::SolveReport{0, 0.0, true};
    if (pixels.empty()) return out;

    const int n = static_cast<int>(pixels.size());
    std::vector<linalg::Triplet> triplets;
    triplets.reserve(pixels.size() * 5);
    linalg::SparseSystem system;
    system.rhs.assign(channels, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        const std::size_t p = pixels[i];
        const std::size_t neighbours[4] = {p - 1, p + 1, p - w, p + w};
        triplets.push_back({i, i, 4.0});
        for (std::size_t q : neighbours) {
            if (unknown[q] >= 0) triplets.push_back({i, unknown[q], -1.0});
            for (int c = 0; c < channels; ++c) {
                const double sp = source.values[p * channels + c];
                const double sq = source.values[q * channels + c];
                double g = sp - sq;
                if (options.mixed_gradients) {
                    const double tg = target.values[p * channels + c] - target.values[q * channels + c];
                    if (std::abs(tg) > std::abs(g)) g = tg;
                }
                double rhs = g;
                if (unknown[q] < 0) rhs += target.values[q * channels + c];
                system.rhs[c][i] += rhs;
            }
        }
    }
    system.matrix = linalg::SparseMatrix::from_triplets(n, std::move(triplets));

    linalg::CgOptions cg;
    cg.tolerance = options.tolerance;
    const linalg::CgResult solved = linalg::cg_solve(system, cg);
    const linalg::SolveReport summary = solved.summary();
    if (report) *report = summary;
    if (!summary.converged) {
        throw NumericError("Poisson blend did not converge (relative residual " +
                           std::to_string(summary.residual) + ")");
    }
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < channels; ++c) {
            double v = solved.solutions[c][i];
            if (options.clamp_output) v = std::clamp(v, 0.0, 1.0);
            out.values[pixels[i] * channels + c] = v;
        }
    }
    return out;
}

Image blend_normal_images(const Image& target, const Image& source, const PixelMask& mask,
                          const BlendOptions& options) {
    if (target.channels != 3) throw ParameterError("normal images need 3 channels");
    Image out = poisson_blend(target, source, mask, options);
    PixelMask region = options.erode_border ? mask.without_border() : mask;
    for (std::size_t p = 0; p < region.values.size(); ++p) {
        if (!region.values[p]) continue;
        double* px = &out.values[p * 3];
        double n[3];
        double len = 0.0;
        for (int c = 0; c < 3; ++c) {
            n[c] = 2.0 * px[c] - 1.0;
            len += n[c] * n[c];
        }
        len = std::sqrt(len);
        if (len < 1e-6) continue;
        for (int c = 0; c < 3; ++c) px[c] = 0.5 * (n[c] / len + 1.0);
    }
    return out;
}

}  // namespace craftmesh
