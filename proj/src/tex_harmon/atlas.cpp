#include "craftmesh/texture.hpp"

#include "craftmesh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace craftmesh {

TextureAtlas::TextureAtlas(Image rgb) : color(std::move(rgb)) {
    if (color.channels != 3) throw ParameterError("texture atlas color image must have 3 channels");
}

double TextureAtlas::value(std::size_t texel, int channel) const {
    if (channel < 3) return color.values[texel * 3 + channel];
    return extra[channel - 3].values[texel];
}

void TextureAtlas::set_value(std::size_t texel, int channel, double v) {
    if (channel < 3) {
        color.values[texel * 3 + channel] = v;
    } else {
        extra[channel - 3].values[texel] = v;
    }
}

void TextureAtlas::validate() const {
    if (color.channels != 3) throw ValidationError("atlas color image must have 3 channels");
    if (color.values.size() != color.pixel_count() * 3) throw ValidationError("atlas color buffer size mismatch");
    if (!extra_names.empty() && extra_names.size() != extra.size()) {
        throw ValidationError("atlas extra channel names do not match the maps");
    }
    for (const Image& map : extra) {
        if (map.width != color.width || map.height != color.height || map.channels != 1 ||
            map.values.size() != map.pixel_count()) {
            throw ValidationError("atlas extra maps must be single-channel and match the color size");
        }
    }
    if (!valid.empty() && valid.size() != texel_count()) throw ValidationError("atlas validity mask size mismatch");
    for (std::size_t t = 0; t < texel_count(); ++t) {
        if (!is_valid(t)) continue;
        for (int c = 0; c < channel_count(); ++c) {
            if (!std::isfinite(value(t, c))) {
                std::ostringstream msg;
                msg << "atlas texel " << t << " channel " << c << " is not finite";
                throw ValidationError(msg.str());
            }
        }
    }
}

Vec2 texel_center_uv(int x, int y, int width, int height) {
    return {(x + 0.5) / width, 1.0 - (y + 0.5) / height};
}

std::vector<int> TexelCorrespondence::texels_with(TexelLabel l) const {
    std::vector<int> out;
    for (std::size_t t = 0; t < label.size(); ++t) {
        if (label[t] == l) out.push_back(static_cast<int>(t));
    }
    return out;
}

namespace {

// Edge function with the endpoints in a fixed order, so both faces sharing
// a UV edge evaluate bit-identical values.
struct CanonicalEdge {
    Vec2 lo, hi;
    CanonicalEdge(const Vec2& a, const Vec2& b) {
        const bool swap = b.x() < a.x() || (b.x() == a.x() && b.y() < a.y());
        lo = swap ? b : a;
        hi = swap ? a : b;
    }
    double operator()(const Vec2& p) const {
        return (hi.x() - lo.x()) * (p.y() - lo.y()) - (hi.y() - lo.y()) * (p.x() - lo.x());
    }
};

}  // namespace

TexelCorrespondence build_correspondence(const TriMesh& mesh, int width, int height,
                                         const std::vector<int>& new_faces) {
    if (!mesh.uvs) throw ParameterError("texel correspondence needs a mesh with UVs");
    if (width <= 0 || height <= 0) throw ParameterError("atlas dimensions must be positive");
    TexelCorrespondence out;
    out.width = width;
    out.height = height;
    const std::size_t count = static_cast<std::size_t>(width) * height;
    out.label.assign(count, TexelLabel::invalid);
    out.samples.assign(count, TexelSample{});
    std::vector<char> is_new(mesh.faces.size(), 0);
    for (int f : new_faces) {
        if (f < 0 || static_cast<std::size_t>(f) >= mesh.faces.size()) {
            throw ParameterError("new face index out of range");
        }
        is_new[f] = 1;
    }

    std::vector<int> overlaps;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const FaceUv& uv = (*mesh.uvs)[f];
        const CanonicalEdge edges[3] = {{uv[1], uv[2]}, {uv[2], uv[0]}, {uv[0], uv[1]}};
        double side[3];
        bool degenerate = false;
        for (int k = 0; k < 3; ++k) {
            const double s = edges[k](uv[k]);
            degenerate |= s == 0.0;
            side[k] = s > 0.0 ? 1.0 : -1.0;
        }
        if (degenerate) continue;
        const double area2 = (uv[1] - uv[0]).x() * (uv[2] - uv[0]).y() - (uv[1] - uv[0]).y() * (uv[2] - uv[0]).x();

        const double umin = std::min({uv[0].x(), uv[1].x(), uv[2].x()});
        const double umax = std::max({uv[0].x(), uv[1].x(), uv[2].x()});
        const double vmin = std::min({uv[0].y(), uv[1].y(), uv[2].y()});
        const double vmax = std::max({uv[0].y(), uv[1].y(), uv[2].y()});
        const int x0 = std::max(0, static_cast<int>(std::floor(umin * width - 0.5)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(umax * width - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::floor((1.0 - vmax) * height - 0.5)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil((1.0 - vmin) * height - 0.5)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Vec2 p = texel_center_uv(x, y, width, height);
                bool inside = true;
                for (int k = 0; k < 3 && inside; ++k) {
                    const double e = edges[k](p) * side[k];
                    inside = e > 0.0 || (e == 0.0 && side[k] > 0.0);
                }
                if (!inside) continue;
                const std::size_t t = static_cast<std::size_t>(y) * width + x;
                if (out.samples[t].face >= 0) {
                    overlaps.push_back(static_cast<int>(t));
                    continue;
                }
                Vec3 bary;
                for (int k = 0; k < 3; ++k) {
                    const Vec2& a = uv[(k + 1) % 3];
                    const Vec2& b = uv[(k + 2) % 3];
                    bary[k] = ((b - a).x() * (p - a).y() - (b - a).y() * (p - a).x()) / area2;
                }
                bary = bary.cwiseMax(0.0);
                bary /= bary.sum();
                const Face& tri = mesh.faces[f];
                TexelSample& s = out.samples[t];
                s.face = static_cast<int>(f);
                s.barycentric = bary;
                s.point = bary[0] * mesh.vertices[tri[0]] + bary[1] * mesh.vertices[tri[1]] +
                          bary[2] * mesh.vertices[tri[2]];
                out.label[t] = is_new[f] ? TexelLabel::added : TexelLabel::preserved;
            }
        }
    }
    if (!overlaps.empty()) {
        std::sort(overlaps.begin(), overlaps.end());
        overlaps.erase(std::unique(overlaps.begin(), overlaps.end()), overlaps.end());
        std::ostringstream msg;
        msg << overlaps.size() << " texels are claimed by more than one UV triangle (overlapping charts):";
        for (std::size_t i = 0; i < overlaps.size() && i < 16; ++i) {
            msg << " (" << overlaps[i] % width << "," << overlaps[i] / width << ")";
        }
        if (overlaps.size() > 16) msg << " ...";
        throw ValidationError(msg.str());
    }
    return out;
}

TexelCorrespondence build_correspondence(const TriMesh& mesh, const TextureAtlas& atlas,
                                         const RegionSelection& regions) {
    return build_correspondence(mesh, atlas.width(), atlas.height(), regions.new_faces);
}

double cross_seam_difference(const TextureAtlas& atlas, const TexelCorrespondence& corr) {
    double sum = 0.0;
    std::size_t pairs = 0;
    auto visit = [&](std::size_t a, std::size_t b) {
        const TexelLabel la = corr.label[a];
        const TexelLabel lb = corr.label[b];
        const bool across = (la == TexelLabel::added && lb == TexelLabel::preserved) ||
                            (la == TexelLabel::preserved && lb == TexelLabel::added);
        if (!across) return;
        for (int c = 0; c < 3; ++c) sum += std::abs(atlas.value(a, c) - atlas.value(b, c));
        ++pairs;
    };
    for (int y = 0; y < corr.height; ++y) {
        for (int x = 0; x < corr.width; ++x) {
            const std::size_t t = static_cast<std::size_t>(y) * corr.width + x;
            if (x + 1 < corr.width) visit(t, t + 1);
            if (y + 1 < corr.height) visit(t, t + corr.width);
        }
    }
    return pairs ? sum / (3.0 * pairs) : 0.0;
}

}  // namespace craftmesh
