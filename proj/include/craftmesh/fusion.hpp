#pragma once

#include "craftmesh/mesh.hpp"
#include "craftmesh/raster.hpp"
#include "craftmesh/regions.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace craftmesh {

struct FusionConfig {
    int views = 24;
    int resolution = 512;
    int iterations = 1000;
    double learning_rate = 1e-3;  ///< peak step as a fraction of the bounding-box diagonal
    double momentum = 0.9;
    double lambda_smooth = 0.1;
    int remesh_interval = 100;  ///< 0 disables remeshing
    double min_edge = 0.004;
    double max_edge = 0.06;
    int reblend_interval = 50;
    bool align_reference = false;  ///< rigidly align mesh_e to mesh_t first (ICP)

    /// Throws ParameterError on out-of-range fields.
    void validate() const;
};

/// Blended target normals aggregated per face of the optimized mesh.
struct FaceTargets {
    std::vector<Vec3> direction_sum;  ///< sum of decoded blended normals over pixels
    std::vector<double> weight;       ///< number of contributing pixels
    std::vector<int> view_pixels;     ///< contributing pixels per camera

    explicit FaceTargets(std::size_t faces = 0) : direction_sum(faces, Vec3::Zero()), weight(faces, 0.0) {}
    std::size_t size() const { return weight.size(); }
    /// Unit target direction; zero when the face is unconstrained.
    Vec3 target(int face) const;
    std::size_t weighted_faces() const;
};

/// Per view: renders mesh_t (normals n_t, mask over faces touching t_opt) and
/// mesh_e (normals n_e where a face touching e_in is visible, n_t elsewhere),
/// Poisson-blends the encoded maps under the mask and accumulates the
/// decoded unit normals into the visible face of mesh_t. Both meshes are
/// rendered whole so occlusion is respected. Returns all-zero targets when
/// t_opt is empty; throws ParameterError when t_opt is non-empty but no
/// camera sees it.
FaceTargets compute_blended_targets(const TriMesh& mesh_t, const TriMesh& mesh_e,
                                    const RegionSelection& regions, const std::vector<Camera>& cameras);

struct LossGradient {
    double value = 0.0;
    std::vector<Vec3> gradient;  ///< one per free vertex, in the order given
    int skipped = 0;             ///< degenerate faces or isolated vertices left out
};

/// L = sum_f w_f |n_f - t_f|^2 over weighted faces, with the analytic
/// gradient of the unit face normal. `free_vertices` must be sorted.
LossGradient normal_loss_and_grad(const TriMesh& mesh, const FaceTargets& targets,
                                  const std::vector<int>& free_vertices);

/// L = sum_{v free} |v - mean(neighbours(v))|^2 (uniform Laplacian), with the
/// gradient including the coupling through free neighbours.
LossGradient smoothness_loss_and_grad(const TriMesh& mesh, const std::vector<int>& free_vertices);

struct RemeshResult {
    TriMesh mesh;
    std::vector<int> region;         ///< remapped, sorted; new vertices included
    std::vector<int> vertex_origin;  ///< input index per output vertex, -1 if created
    int splits = 0;
    int collapses = 0;
};

/// Splits region edges longer than max_edge at their midpoint and collapses
/// region edges shorter than min_edge when the link condition holds, the
/// edge is not on the mesh boundary and no incident face normal turns by
/// more than 90 degrees. Only edges with both ends in the region are
/// touched. Per-corner UVs are dropped; vertex colours are interpolated.
RemeshResult remesh_region(const TriMesh& mesh, const std::vector<int>& region, double min_edge,
                           double max_edge);

struct LossSample {
    int iteration = 0;
    double total = 0.0;
    double poisson = 0.0;
    double smooth = 0.0;
};

struct FusionResult {
    TriMesh mesh;
    std::vector<LossSample> trace;
    std::vector<int> vertex_origin;  ///< input vertex per output vertex, -1 if created or merged
    std::vector<int> t_opt;          ///< optimized vertices in the output mesh
    std::vector<int> t_in;
    int remesh_passes = 0;
};

/// Momentum gradient descent on the t_opt vertices of mesh_t, minimising the
/// blended-normal loss plus lambda_smooth times the smoothness loss. Targets
/// are re-blended from freshly sampled views every reblend_interval
/// iterations and after every remesh. Vertices outside t_opt keep their
/// exact coordinates. Throws NumericError (with the iteration state) if the
/// loss becomes non-finite.
FusionResult fuse_geometry(const TriMesh& mesh_t, const TriMesh& mesh_e, const RegionSelection& regions,
                           const FusionConfig& config, std::uint64_t seed);

/// Largest angle (radians) between normals of two faces sharing an edge,
/// over edges whose both faces touch `region`.
double seam_dihedral(const TriMesh& mesh, const std::vector<int>& region);

/// Rigid ICP (point to closest surface point, Kabsch update) moving
/// `source` onto `target`.
TriMesh align_rigid(const TriMesh& source, const TriMesh& target, int iterations = 30);

/// Writes "iteration,total,poisson,smooth" rows.
void write_loss_trace(const std::vector<LossSample>& trace, const std::filesystem::path& path);

}  // namespace craftmesh
