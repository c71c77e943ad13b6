#include "craftmesh/texture.hpp"

#include "craftmesh/delaunay.hpp"
#include "craftmesh/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace craftmesh {

void TexelMesh::validate() const {
    const std::size_t n = positions.size();
    if (boundary.size() != n || texel.size() != n || aliases.size() != n || component.size() != n) {
        throw ValidationError("texel mesh per-vertex arrays disagree in size");
    }
    for (const auto& channel : colors) {
        if (channel.size() != n) throw ValidationError("texel mesh color channel size mismatch");
    }
    if (area.size() != triangles.size() || basis_gradients.size() != triangles.size()) {
        throw ValidationError("texel mesh per-triangle arrays disagree in size");
    }
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        for (int v : triangles[t]) {
            if (v < 0 || static_cast<std::size_t>(v) >= n) throw ValidationError("texel mesh index out of range");
        }
        const Vec2 e1 = positions[triangles[t][1]] - positions[triangles[t][0]];
        const Vec2 e2 = positions[triangles[t][2]] - positions[triangles[t][0]];
        const double a = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
        if (!(a > 1e-14)) {
            std::ostringstream msg;
            msg << "texel mesh triangle " << t << " has area " << a;
            throw ValidationError(msg.str());
        }
    }
}

// Hat-function gradient of corner i in triangle (i, j, k): the edge
// v_k - v_j turned a quarter left, over twice the area.
void TexelMesh::compute_geometry() {
    area.resize(triangles.size());
    basis_gradients.resize(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        const Vec2 e1 = positions[tri[1]] - positions[tri[0]];
        const Vec2 e2 = positions[tri[2]] - positions[tri[0]];
        const double a = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
        area[t] = a;
        for (int c = 0; c < 3; ++c) {
            const Vec2 d = positions[tri[(c + 2) % 3]] - positions[tri[(c + 1) % 3]];
            basis_gradients[t][c] = Vec2(-d.y(), d.x()) / (2.0 * a);
        }
    }
}

namespace {

// Uniform grid over preserved texel surface points for nearest queries.
class PreservedLookup {
public:
    PreservedLookup(const TexelCorrespondence& corr) : corr_(corr) {
        texels_ = corr.texels_with(TexelLabel::preserved);
        if (texels_.empty()) return;
        for (int t : texels_) box_.extend(corr.samples[t].point);
        const double volume_cells = std::max<double>(1.0, texels_.size() / 2.0);
        const Vec3 ext = box_.extent().cwiseMax(1e-12);
        cell_ = std::cbrt(ext.prod() / volume_cells);
        cell_ = std::max(cell_, ext.maxCoeff() / 256.0);
        for (int k = 0; k < 3; ++k) dims_[k] = std::max(1, static_cast<int>(std::ceil(ext[k] / cell_)));
        buckets_.assign(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2], {});
        for (int t : texels_) buckets_[bucket(cell_of(corr.samples[t].point))].push_back(t);
    }

    bool empty() const { return texels_.empty(); }

    int nearest(const Vec3& p) const {
        const std::array<int, 3> c = cell_of(p);
        double best = std::numeric_limits<double>::infinity();
        int found = -1;
        const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
        for (int r = 0; r <= max_ring; ++r) {
            for (int i = c[0] - r; i <= c[0] + r; ++i) {
                for (int j = c[1] - r; j <= c[1] + r; ++j) {
                    for (int k = c[2] - r; k <= c[2] + r; ++k) {
                        if (std::max({std::abs(i - c[0]), std::abs(j - c[1]), std::abs(k - c[2])}) != r) continue;
                        if (i < 0 || j < 0 || k < 0 || i >= dims_[0] || j >= dims_[1] || k >= dims_[2]) continue;
                        for (int t : buckets_[bucket({i, j, k})]) {
                            const double d = (corr_.samples[t].point - p).squaredNorm();
                            if (d < best || (d == best && t < found)) {
                                best = d;
                                found = t;
                            }
                        }
                    }
                }
            }
            // Every point outside ring r is at least r cells away.
            if (found >= 0 && std::sqrt(best) <= r * cell_) break;
        }
        return found;
    }

private:
    std::array<int, 3> cell_of(const Vec3& p) const {
        std::array<int, 3> c;
        for (int k = 0; k < 3; ++k) {
            c[k] = std::clamp(static_cast<int>(std::floor((p[k] - box_.min[k]) / cell_)), 0, dims_[k] - 1);
        }
        return c;
    }
    std::size_t bucket(const std::array<int, 3>& c) const {
        return (static_cast<std::size_t>(c[2]) * dims_[1] + c[1]) * dims_[0] + c[0];
    }

    const TexelCorrespondence& corr_;
    std::vector<int> texels_;
    Aabb box_;
    double cell_ = 1.0;
    std::array<int, 3> dims_{1, 1, 1};
    std::vector<std::vector<int>> buckets_;
};

template <typename F>
void for_each_neighbour(const TexelCorrespondence& corr, int texel, F&& f) {
    const int x = texel % corr.width;
    const int y = texel / corr.width;
    if (x > 0) f(texel - 1);
    if (x + 1 < corr.width) f(texel + 1);
    if (y > 0) f(texel - corr.width);
    if (y + 1 < corr.height) f(texel + corr.width);
}

}  // namespace

TexelMesh build_texel_mesh(const TexelCorrespondence& corr, const RegionParameterization& param,
                           const TextureAtlas& atlas) {
    if (atlas.width() != corr.width || atlas.height() != corr.height) {
        throw ParameterError("atlas and correspondence sizes differ");
    }
    const std::vector<int> added = corr.texels_with(TexelLabel::added);
    if (added.size() < 3) throw ParameterError("texel mesh needs at least three new-region texels");

    std::vector<std::vector<int>> groups(std::max(param.components, 0));
    std::vector<Vec2> where(corr.label.size(), Vec2::Zero());
    for (int t : added) {
        const TexelSample& s = corr.samples[t];
        if (s.face < 0 || static_cast<std::size_t>(s.face) >= param.face_component.size() ||
            param.face_component[s.face] < 0) {
            throw ParameterError("new-region texel lies on a face without parameterization");
        }
        const FaceUv& c = param.corners[s.face];
        where[t] = s.barycentric[0] * c[0] + s.barycentric[1] * c[1] + s.barycentric[2] * c[2];
        groups[param.face_component[s.face]].push_back(t);
    }

    TexelMesh mesh;
    auto add_vertex = [&](const Vec2& p, int texel, int comp, bool fixed) {
        mesh.positions.push_back(p);
        mesh.texel.push_back(texel);
        mesh.aliases.emplace_back();
        mesh.component.push_back(comp);
        mesh.boundary.push_back(fixed ? 1 : 0);
    };
    for (std::size_t comp = 0; comp < groups.size(); ++comp) {
        const std::vector<int>& texels = groups[comp];
        if (texels.empty()) continue;
        std::vector<Vec2> pts;
        pts.reserve(texels.size());
        for (int t : texels) pts.push_back(where[t]);
        Delaunay tri;
        try {
            tri = delaunay_triangulate(pts);
        } catch (const ParameterError&) {
            // Too few or collinear samples: keep them as fixed vertices.
            for (int t : texels) add_vertex(where[t], t, static_cast<int>(comp), true);
            continue;
        }
        const int offset = static_cast<int>(mesh.positions.size());
        for (std::size_t i = 0; i < tri.points.size(); ++i) {
            add_vertex(tri.points[i], -1, static_cast<int>(comp), tri.on_hull[i] != 0);
        }
        for (std::size_t i = 0; i < texels.size(); ++i) {
            const int v = offset + tri.point_of_input[i];
            if (mesh.texel[v] < 0) {
                mesh.texel[v] = texels[i];
            } else {
                mesh.aliases[v].push_back(texels[i]);
            }
        }
        for (const auto& t : tri.triangles) mesh.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
    }
    if (mesh.triangles.empty()) throw ParameterError("new-region texels are degenerate: no triangle could be formed");

    for (std::size_t v = 0; v < mesh.positions.size(); ++v) {
        bool touches = false;
        auto check = [&](int t) {
            for_each_neighbour(corr, t, [&](int u) { touches |= corr.label[u] == TexelLabel::preserved; });
        };
        check(mesh.texel[v]);
        for (int t : mesh.aliases[v]) check(t);
        if (touches) mesh.boundary[v] = 1;
    }

    mesh.colors.assign(atlas.channel_count(), std::vector<double>(mesh.positions.size()));
    for (int c = 0; c < atlas.channel_count(); ++c) {
        for (std::size_t v = 0; v < mesh.positions.size(); ++v) mesh.colors[c][v] = atlas.value(mesh.texel[v], c);
    }
    mesh.compute_geometry();
    mesh.validate();
    return mesh;
}

std::vector<std::vector<double>> boundary_colors(const TexelMesh& mesh, const TexelCorrespondence& corr,
                                                 const TextureAtlas& atlas) {
    std::vector<std::vector<double>> out = mesh.colors;
    const int channels = std::min(atlas.channel_count(), mesh.channel_count());
    std::optional<PreservedLookup> lookup;
    for (std::size_t v = 0; v < mesh.positions.size(); ++v) {
        if (!mesh.boundary[v]) continue;
        std::vector<int> sources;
        auto gather = [&](int t) {
            for_each_neighbour(corr, t, [&](int u) {
                if (corr.label[u] == TexelLabel::preserved) sources.push_back(u);
            });
        };
        gather(mesh.texel[v]);
        for (int t : mesh.aliases[v]) gather(t);
        std::sort(sources.begin(), sources.end());
        sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
        if (sources.empty()) {
            if (!lookup) lookup.emplace(corr);
            if (lookup->empty()) continue;
            sources.push_back(lookup->nearest(corr.samples[mesh.texel[v]].point));
        }
        for (int c = 0; c < channels; ++c) {
            double sum = 0.0;
            for (int u : sources) sum += atlas.value(u, c);
            out[c][v] = sum / static_cast<double>(sources.size());
        }
    }
    return out;
}

}  // namespace craftmesh
