#pragma once

#include "craftmesh/image.hpp"
#include "craftmesh/linalg.hpp"
#include "craftmesh/mesh.hpp"
#include "craftmesh/regions.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace craftmesh {

/// RGB texture plus optional scalar maps (roughness, metallic, ...) of the
/// same size. Channels 0-2 are color, channel 3 + k is extra[k].
struct TextureAtlas {
    Image color;
    std::vector<Image> extra;
    std::vector<std::string> extra_names;
    std::vector<char> valid;  ///< per texel; empty means every texel is valid

    TextureAtlas() = default;
    TextureAtlas(int width, int height, double fill = 0.0) : color(width, height, 3, fill) {}
    explicit TextureAtlas(Image rgb);

    int width() const { return color.width; }
    int height() const { return color.height; }
    std::size_t texel_count() const { return color.pixel_count(); }
    int channel_count() const { return 3 + static_cast<int>(extra.size()); }
    bool is_valid(std::size_t texel) const { return valid.empty() || valid[texel]; }
    double value(std::size_t texel, int channel) const;
    void set_value(std::size_t texel, int channel, double v);

    /// Throws ValidationError for a non-RGB color image, mismatched extra
    /// maps or validity size, or a non-finite value in a valid texel.
    void validate() const;
};

/// UV of the center of texel (x, y). Row 0 is the top of the image (v = 1).
Vec2 texel_center_uv(int x, int y, int width, int height);

enum class TexelLabel : std::uint8_t { invalid, preserved, added };

struct TexelSample {
    int face = -1;
    Vec3 barycentric = Vec3::Zero();
    Vec3 point = Vec3::Zero();
};

struct TexelCorrespondence {
    int width = 0;
    int height = 0;
    std::vector<TexelLabel> label;     ///< per texel
    std::vector<TexelSample> samples;  ///< per texel, face -1 when invalid

    std::vector<int> texels_with(TexelLabel l) const;
};

/// Maps every texel center to the face whose UV triangle contains it. Texels
/// on a UV edge shared by two faces go to exactly one of them. A texel is
/// `added` iff its face is in `new_faces`. Throws ParameterError without UVs
/// or for an empty atlas, and ValidationError listing the texels claimed by
/// more than one face.
TexelCorrespondence build_correspondence(const TriMesh& mesh, int width, int height,
                                         const std::vector<int>& new_faces);
TexelCorrespondence build_correspondence(const TriMesh& mesh, const TextureAtlas& atlas,
                                         const RegionSelection& regions);

/// Fresh disk embedding of each connected component of the new faces.
struct RegionParameterization {
    std::vector<FaceUv> corners;       ///< per mesh face, zero for faces outside the region
    std::vector<int> face_component;   ///< per mesh face, -1 outside the region
    int components = 0;
};

/// Each edge-connected component must be a disk. Its boundary loop goes to
/// the unit circle by arc length and the interior follows from the uniform
/// (Tutte) harmonic system. Throws TopologyError naming the component, its
/// genus and its boundary count, and NumericError if a triangle flips.
RegionParameterization parameterize_new_region(const TriMesh& mesh, const std::vector<int>& new_faces);

/// Dense texel mesh over the new region: one vertex per added texel.
struct TexelMesh {
    std::vector<Vec2> positions;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::vector<double>> colors;  ///< [channel][vertex]
    std::vector<char> boundary;
    std::vector<int> texel;                   ///< originating texel per vertex
    std::vector<std::vector<int>> aliases;    ///< further texels that fell on the same 2D point
    std::vector<int> component;               ///< parameterization component per vertex
    std::vector<double> area;                 ///< per triangle
    std::vector<std::array<Vec2, 3>> basis_gradients;  ///< per triangle corner

    std::size_t vertex_count() const { return positions.size(); }
    int channel_count() const { return static_cast<int>(colors.size()); }
    /// Recomputes area and basis_gradients from positions and triangles.
    void compute_geometry();
    /// Orientation, area floor, back-map sizes; throws ValidationError.
    void validate() const;
};

/// Triangulates each parameterization component separately. Components
/// too small or too thin to triangulate keep their texels as fixed
/// (boundary) vertices. Throws ParameterError if no triangle results.
TexelMesh build_texel_mesh(const TexelCorrespondence& corr, const RegionParameterization& param,
                           const TextureAtlas& atlas);

/// Gradient, divergence and the stiffness Laplacian on a texel mesh.
class MeshPoissonOperators {
public:
    explicit MeshPoissonOperators(const TexelMesh& mesh);

    /// Per-triangle gradient of a per-vertex scalar field.
    std::vector<Vec2> gradient(const std::vector<double>& field) const;
    /// Per-vertex divergence of a per-triangle vector field, area weighted.
    std::vector<double> divergence(const std::vector<Vec2>& field) const;
    /// Div of Grad as a matrix: symmetric, zero row sums, positive semidefinite.
    const linalg::SparseMatrix& laplacian() const { return laplacian_; }

private:
    const TexelMesh& mesh_;
    linalg::SparseMatrix laplacian_;
};

/// Colors for the fixed vertices: the mean of the preserved 4-neighbours in
/// the atlas, else the nearest preserved texel on the surface, else the
/// vertex's own color when nothing is preserved. Non-fixed vertices keep
/// their own color. Indexed [channel][vertex].
std::vector<std::vector<double>> boundary_colors(const TexelMesh& mesh, const TexelCorrespondence& corr,
                                                 const TextureAtlas& atlas);

/// Solves Lap x = Div Grad guidance per channel with x fixed to
/// `boundary_values` on boundary vertices; clamps to [0,1] afterwards.
/// Throws ParameterError without boundary vertices and NumericError if the
/// solver fails.
std::vector<std::vector<double>> harmonize(const TexelMesh& mesh,
                                           const std::vector<std::vector<double>>& guidance,
                                           const std::vector<std::vector<double>>& boundary_values,
                                           linalg::SolveReport* report = nullptr);

/// Writes per-vertex colors into their texels; all other texels are copied.
TextureAtlas bake_back(const TexelMesh& mesh, const std::vector<std::vector<double>>& colors,
                       const TextureAtlas& atlas);

struct HarmonizeReport {
    std::size_t added_texels = 0;
    std::size_t boundary_vertices = 0;
    std::size_t triangles = 0;
    int components = 0;
    double seam_before = 0.0;
    double seam_after = 0.0;
    linalg::SolveReport solve;
};

/// Correspondence, parameterization, texel mesh, solve and bake in one call.
/// Returns the atlas unchanged when the region has fewer than three added
/// texels.
TextureAtlas harmonize_texture(const TriMesh& mesh, const TextureAtlas& atlas, const RegionSelection& regions,
                               HarmonizeReport* report = nullptr, TexelMesh* texel_mesh = nullptr);

/// Mean absolute RGB difference over 4-adjacent (added, preserved) texel pairs.
double cross_seam_difference(const TextureAtlas& atlas, const TexelCorrespondence& corr);

}  // namespace craftmesh
