#include "craftmesh/texture.hpp"

#include "craftmesh/errors.hpp"

#include <algorithm>
#include <cmath>

namespace craftmesh {

MeshPoissonOperators::MeshPoissonOperators(const TexelMesh& mesh) : mesh_(mesh) {
    const int n = static_cast<int>(mesh.vertex_count());
    std::vector<linalg::Triplet> entries;
    entries.reserve(9 * mesh.triangles.size() + n);
    for (int v = 0; v < n; ++v) entries.push_back({v, v, 0.0});
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const auto& g = mesh.basis_gradients[t];
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) entries.push_back({tri[a], tri[b], mesh.area[t] * g[a].dot(g[b])});
        }
    }
    laplacian_ = linalg::SparseMatrix::from_triplets(n, std::move(entries));
}

std::vector<Vec2> MeshPoissonOperators::gradient(const std::vector<double>& field) const {
    if (field.size() != mesh_.vertex_count()) throw ParameterError("gradient field size mismatch");
    std::vector<Vec2> out(mesh_.triangles.size(), Vec2::Zero());
    for (std::size_t t = 0; t < out.size(); ++t) {
        for (int c = 0; c < 3; ++c) out[t] += field[mesh_.triangles[t][c]] * mesh_.basis_gradients[t][c];
    }
    return out;
}

std::vector<double> MeshPoissonOperators::divergence(const std::vector<Vec2>& field) const {
    if (field.size() != mesh_.triangles.size()) throw ParameterError("divergence field size mismatch");
    std::vector<double> out(mesh_.vertex_count(), 0.0);
    for (std::size_t t = 0; t < field.size(); ++t) {
        for (int c = 0; c < 3; ++c) {
            out[mesh_.triangles[t][c]] += mesh_.basis_gradients[t][c].dot(field[t]) * mesh_.area[t];
        }
    }
    return out;
}

std::vector<std::vector<double>> harmonize(const TexelMesh& mesh,
                                           const std::vector<std::vector<double>>& guidance,
                                           const std::vector<std::vector<double>>& boundary_values,
                                           linalg::SolveReport* report) {
    const std::size_t n = mesh.vertex_count();
    if (guidance.size() != boundary_values.size()) throw ParameterError("guidance and boundary channel counts differ");
    for (std::size_t c = 0; c < guidance.size(); ++c) {
        if (guidance[c].size() != n || boundary_values[c].size() != n) {
            throw ParameterError("guidance or boundary values do not match the texel mesh");
        }
        for (std::size_t v = 0; v < n; ++v) {
            if (!std::isfinite(guidance[c][v])) throw ParameterError("guidance colors must be finite");
            if (mesh.boundary[v] && !std::isfinite(boundary_values[c][v])) {
                throw ParameterError("boundary colors must be finite");
            }
        }
    }
    if (std::none_of(mesh.boundary.begin(), mesh.boundary.end(), [](char b) { return b != 0; })) {
        throw ParameterError("texel mesh has no boundary vertices; the Poisson system is singular");
    }

    const MeshPoissonOperators ops(mesh);
    std::vector<std::vector<double>> rhs;
    rhs.reserve(guidance.size());
    for (const auto& channel : guidance) rhs.push_back(ops.divergence(ops.gradient(channel)));
    const linalg::SparseSystem system = linalg::apply_dirichlet(ops.laplacian(), rhs, mesh.boundary, boundary_values);
    linalg::CgOptions options;
    options.tolerance = 1e-12;
    options.jacobi = true;
    linalg::CgResult res = linalg::cg_solve(system, options);
    const linalg::SolveReport summary = res.summary();
    if (report) *report = summary;
    if (!summary.converged) throw NumericError("texture Poisson solve did not converge");
    for (auto& channel : res.solutions) {
        for (double& x : channel) x = std::clamp(x, 0.0, 1.0);
    }
    return std::move(res.solutions);
}

TextureAtlas bake_back(const TexelMesh& mesh, const std::vector<std::vector<double>>& colors,
                       const TextureAtlas& atlas) {
    TextureAtlas out = atlas;
    const int channels = std::min(static_cast<int>(colors.size()), atlas.channel_count());
    for (int c = 0; c < channels; ++c) {
        if (colors[c].size() != mesh.vertex_count()) throw ParameterError("baked colors do not match the texel mesh");
        for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
            if (!std::isfinite(colors[c][v])) throw ParameterError("baked colors must be finite");
            out.set_value(mesh.texel[v], c, colors[c][v]);
            for (int t : mesh.aliases[v]) out.set_value(t, c, colors[c][v]);
        }
    }
    return out;
}

TextureAtlas harmonize_texture(const TriMesh& mesh, const TextureAtlas& atlas, const RegionSelection& regions,
                               HarmonizeReport* report, TexelMesh* texel_mesh) {
    atlas.validate();
    const TexelCorrespondence corr = build_correspondence(mesh, atlas, regions);
    HarmonizeReport local;
    local.added_texels = corr.texels_with(TexelLabel::added).size();
    local.seam_before = cross_seam_difference(atlas, corr);
    local.seam_after = local.seam_before;
    if (local.added_texels < 3) {
        if (report) *report = local;
        return atlas;
    }
    const RegionParameterization param = parameterize_new_region(mesh, regions.new_faces);
    TexelMesh tm = build_texel_mesh(corr, param, atlas);
    const auto fixed = boundary_colors(tm, corr, atlas);
    const auto colors = harmonize(tm, tm.colors, fixed, &local.solve);
    TextureAtlas out = bake_back(tm, colors, atlas);
    local.boundary_vertices = static_cast<std::size_t>(std::count(tm.boundary.begin(), tm.boundary.end(), 1));
    local.triangles = tm.triangles.size();
    local.components = param.components;
    local.seam_after = cross_seam_difference(out, corr);
    if (report) *report = local;
    if (texel_mesh) *texel_mesh = std::move(tm);
    return out;
}

}  // namespace craftmesh
