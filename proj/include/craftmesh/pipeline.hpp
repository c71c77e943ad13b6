#pragma once

#include "craftmesh/errors.hpp"
#include "craftmesh/fusion.hpp"
#include "craftmesh/image.hpp"
#include "craftmesh/mesh.hpp"
#include "craftmesh/raster.hpp"
#include "craftmesh/regions.hpp"
#include "craftmesh/texture.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace craftmesh {

enum class EditTask { Insert, Delete, Replace, Drag };

std::string task_name(EditTask task);
/// Case-insensitive; throws ParameterError for an unknown name.
EditTask parse_task(std::string_view name);

/// Run settings read from a `key = value` file. Relative paths are resolved
/// against the config file's directory. CRAFTMESH_BACKEND_ROOT, when set,
/// replaces backend_root.
struct PipelineConfig {
    EditTask task = EditTask::Insert;
    std::filesystem::path mesh;
    std::filesystem::path texture;       ///< optional; no texture stages without it
    std::filesystem::path backend_root;
    std::filesystem::path output = "craftmesh_out";
    std::string instruction;
    std::filesystem::path drag_file;     ///< drag annotation, required for Drag
    std::string prompt;                  ///< texture prompt; defaults to the instruction
    double eps0 = 0.08;
    double eps1 = 0.05;
    int grid_resolution = 64;
    int atlas_resolution = 1024;
    int view_resolution = 256;           ///< reference render handed to the image editor
    double seam_tolerance = 0.0;         ///< 0 selects one grid spacing
    double preserve_tolerance = 0.0;     ///< 0 selects half a grid spacing
    FusionConfig fusion;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;   ///< unknown keys and similar

    /// Every problem at once in one ValidationError.
    void validate() const;
};

PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
/// Throws IoError if unreadable and ValidationError listing every missing or
/// invalid key.
PipelineConfig load_config(const std::filesystem::path& path);
/// `key = value` lines in a fixed order, paths as given.
std::string config_echo(const PipelineConfig& config);

/// 64-bit FNV-1a, the manifest key hash.
std::uint64_t fnv1a(std::string_view data, std::uint64_t hash = 14695981039346656037ull);
std::string hex64(std::uint64_t value);
std::uint64_t file_hash(const std::filesystem::path& path);

/// Request keys: 16 hex digits over the quantized inputs. Images hash as
/// `WxHxC` plus their 8-bit samples, meshes as their text serialization.
std::string image_edit_key(const Image& reference, std::string_view instruction);
std::string mesh_gen_key(const Image& image);
std::string texture_gen_key(const TriMesh& mesh, std::string_view prompt);

struct EditedImages {
    Image edited;
    Image region;                       ///< the part to add
    std::optional<Image> removed;       ///< the part to take away (Replace, Drag)
};

struct TexturedMesh {
    TriMesh mesh;  ///< with UVs
    TextureAtlas atlas;
};

/// Stand-ins for the image editor, the image-to-mesh generator and the
/// texture generator. Implementations must be deterministic.
class Backend {
public:
    virtual ~Backend() = default;
    virtual EditedImages edit(const Image& reference, std::string_view instruction) = 0;
    virtual TriMesh generate(const Image& image) = 0;
    virtual TexturedMesh texture(const TriMesh& mesh, std::string_view prompt) = 0;
    /// One line per call: `<kind> <key> <outcome>`.
    const std::vector<std::string>& audit() const { return audit_; }

protected:
    std::vector<std::string> audit_;
};

class BackendMissError : public Error {
public:
    using Error::Error;
};

/// Serves pre-staged files listed in `<root>/manifest.txt`, one request per
/// line: `<kind> <key> <file>...` with kind image-edit (edited, region and
/// optionally removed PNG), mesh-gen (mesh file) or texture-gen (mesh file
/// with UVs, then a color PNG). Never computes anything itself.
class FilesystemBackend : public Backend {
public:
    /// Throws IoError when the manifest is missing and FormatError on a bad line.
    explicit FilesystemBackend(std::filesystem::path root);

    EditedImages edit(const Image& reference, std::string_view instruction) override;
    TriMesh generate(const Image& image) override;
    TexturedMesh texture(const TriMesh& mesh, std::string_view prompt) override;

    const std::filesystem::path& root() const { return root_; }

    /// Appends a manifest line, copying nothing; files are relative to root.
    static void stage(const std::filesystem::path& root, std::string_view kind, std::string_view key,
                      const std::vector<std::string>& files);

private:
    const std::vector<std::string>& lookup(std::string_view kind, const std::string& key);

    std::filesystem::path root_;
    std::vector<std::pair<std::string, std::vector<std::string>>> entries_;  ///< "kind key" -> files
};

/// Uniform scaling into the unit cube centered at the origin.
struct Frame {
    Vec3 center = Vec3::Zero();
    double scale = 1.0;

    static Frame of(const TriMesh& mesh);
    TriMesh to_unit(const TriMesh& mesh) const;
    TriMesh from_unit(const TriMesh& mesh) const;
};

/// Fixed front view of the whole mesh used as the editing reference.
Camera reference_camera(const TriMesh& mesh, int resolution);
/// Normal image of the mesh from reference_camera, quantized to 8 bits.
Image render_reference(const TriMesh& mesh, int resolution);

/// Copy with a fresh non-overlapping UV layout: faces are paired into the
/// two halves of square cells on a regular grid.
TriMesh with_packed_uvs(const TriMesh& mesh);

/// Bilinear lookup with clamped edges; uv (0,0) is the bottom-left corner.
std::vector<double> sample_atlas(const TextureAtlas& atlas, const Vec2& uv);

/// Colors every texel of a `resolution` square atlas for `mesh` (which must
/// carry UVs) from the closest surface point on `source`, new-region texels
/// from `added` and the rest from `preserved`.
TextureAtlas transfer_texture(const TriMesh& mesh, int resolution, const TexelCorrespondence& corr,
                              const TexturedMesh& preserved, const TexturedMesh& added);

/// Plain-text region file: eps values, seam points and index lists.
void save_regions(const RegionSelection& regions, const std::filesystem::path& path);
RegionSelection load_regions(const std::filesystem::path& path);

class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct WorkflowResult {
    TriMesh mesh;                         ///< output frame
    std::optional<TextureAtlas> atlas;
    std::vector<LossSample> trace;
    std::vector<std::pair<std::string, std::string>> report;
    bool identity = false;                ///< the edit left the surface unchanged
};

/// Runs the edit and writes merged.obj, texture.png (when a texture is
/// configured), loss_trace.csv, report.txt and intermediates under stages/
/// into the output directory. A failing stage throws StageError after the
/// report so far has been written.
WorkflowResult run_workflow(const PipelineConfig& config, Backend& backend);

/// Writes a complete plane-with-bump insert example (meshes, texture,
/// staged backend assets, config.txt) under `dir` and returns the config
/// path. `light` shrinks every resolution for quick runs.
std::filesystem::path write_bump_fixture(const std::filesystem::path& dir, bool light = false);

}  // namespace craftmesh
