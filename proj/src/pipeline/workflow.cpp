#include "craftmesh/pipeline.hpp"

#include "craftmesh/distance.hpp"
#include "craftmesh/mesh_io.hpp"
#include "craftmesh/sdf.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

namespace craftmesh {

namespace {

namespace fs = std::filesystem;

// Records per-stage timings and metrics; a failing stage leaves a report
// naming it before the error propagates.
class Run {
public:
    explicit Run(fs::path out) : out_(std::move(out)) {}

    void note(const std::string& key, const std::string& value) { report_.emplace_back(key, value); }
    void note(const std::string& key, double value) { note(key, format_double(value)); }

    template <typename F>
    auto stage(const std::string& name, F&& fn) {
        const auto start = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                timed(name, start);
            } else {
                auto result = fn();
                timed(name, start);
                return result;
            }
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            timed(name, start);
            note("status", "failed");
            note("failed_stage", name);
            note("error", one_line(e.what()));
            write();
            throw StageError(name, e.what());
        }
    }

    void write() const {
        std::ofstream out(out_ / "report.txt");
        for (const auto& [k, v] : report_) out << k << " = " << v << '\n';
    }

    std::vector<std::pair<std::string, std::string>>& report() { return report_; }

private:
    void timed(const std::string& name, std::chrono::steady_clock::time_point start) {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ostringstream v;
        v.precision(3);
        v << std::fixed << s;
        note("time." + name, v.str());
    }
    static std::string one_line(std::string s) {
        for (char& c : s) {
            if (c == '\n') c = ' ';
        }
        return s;
    }

    fs::path out_;
    std::vector<std::pair<std::string, std::string>> report_;
};

bool is_inside(double v) { return v < 0.0; }

// The Boolean leaves the extracted surface alone when no node changes side
// and every node next to a sign change keeps its exact value.
bool boolean_is_identity(const SdfGrid& a, const SdfGrid& combined) {
    const auto& d = a.dims;
    for (int k = 0; k < d[2]; ++k) {
        for (int j = 0; j < d[1]; ++j) {
            for (int i = 0; i < d[0]; ++i) {
                const double va = a.value(i, j, k);
                const double vc = combined.value(i, j, k);
                if (is_inside(va) != is_inside(vc)) return false;
                if (va == vc) continue;
                for (int dk = -1; dk <= 1; ++dk) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        for (int di = -1; di <= 1; ++di) {
                            const int x = i + di, y = j + dj, z = k + dk;
                            if (x < 0 || y < 0 || z < 0 || x >= d[0] || y >= d[1] || z >= d[2]) continue;
                            if (is_inside(a.value(x, y, z)) != is_inside(va)) return false;
                        }
                    }
                }
            }
        }
    }
    return true;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

TextureAtlas load_atlas(const fs::path& path) {
    Image img = read_png(path);
    if (img.channels < 3) throw ValidationError("texture " + path.string() + " must be RGB");
    if (img.channels == 3) return TextureAtlas(std::move(img));
    Image rgb(img.width, img.height, 3);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        for (int c = 0; c < 3; ++c) rgb.values[p * 3 + c] = img.values[p * img.channels + c];
    }
    return TextureAtlas(std::move(rgb));
}

struct BooleanStep {
    BooleanOp op;
    const TriMesh* operand;
    std::string name;
};

}  // namespace

WorkflowResult run_workflow(const PipelineConfig& config, Backend& backend) {
    config.validate();
    std::vector<std::string> missing;
    if (!fs::is_regular_file(config.mesh)) missing.push_back("mesh " + config.mesh.string());
    if (!config.texture.empty() && !fs::is_regular_file(config.texture)) {
        missing.push_back("texture " + config.texture.string());
    }
    if (config.task == EditTask::Drag && !fs::is_regular_file(config.drag_file)) {
        missing.push_back("drag_file " + config.drag_file.string());
    }
    if (!missing.empty()) {
        std::string msg = "missing input assets:";
        for (const auto& m : missing) msg += " " + m + ";";
        throw IoError(msg);
    }

    const fs::path out = config.output;
    const fs::path stages = out / "stages";
    fs::create_directories(stages);
    Run run(out);
    WorkflowResult result;
    std::istringstream echo(config_echo(config));
    for (std::string line; std::getline(echo, line);) {
        const auto eq = line.find(" = ");
        run.note("config." + line.substr(0, eq), line.substr(eq + 3));
    }

    const TriMesh original = run.stage("load", [&] {
        TriMesh m = load_mesh(config.mesh);
        m.validate();
        run.note("asset.mesh", hex64(file_hash(config.mesh)));
        return m;
    });
    std::optional<TextureAtlas> texture;
    if (!config.texture.empty()) {
        texture = run.stage("load_texture", [&] {
            if (!original.uvs) throw ValidationError("a texture is configured but the mesh has no UVs");
            run.note("asset.texture", hex64(file_hash(config.texture)));
            return load_atlas(config.texture);
        });
    }

    const Image reference = run.stage("reference", [&] { return render_reference(original, config.view_resolution); });
    write_png(reference, stages / "reference.png");

    std::string instruction = config.instruction;
    if (config.task == EditTask::Drag) {
        instruction = read_text(config.drag_file);
        run.note("asset.drag_file", hex64(fnv1a(instruction)));
    }
    const EditedImages edited = run.stage("image_edit", [&] {
        EditedImages e = backend.edit(reference, instruction);
        const bool needs_removed = config.task == EditTask::Replace || config.task == EditTask::Drag;
        if (needs_removed && !e.removed) {
            throw ValidationError("task " + task_name(config.task) + " needs a removed-region image from the editor");
        }
        return e;
    });
    write_png(edited.edited, stages / "edited.png");
    write_png(edited.region, stages / "region.png");
    if (edited.removed) write_png(*edited.removed, stages / "removed.png");

    struct Generated {
        TriMesh reference, region, removed;
    };
    const Generated gen = run.stage("mesh_gen", [&] {
        Generated g;
        g.reference = backend.generate(edited.edited);
        g.region = backend.generate(edited.region);
        if (edited.removed && (config.task == EditTask::Replace || config.task == EditTask::Drag)) {
            g.removed = backend.generate(*edited.removed);
        }
        return g;
    });

    const Frame frame = Frame::of(original);
    const TriMesh unit_original = frame.to_unit(original);
    const TriMesh unit_reference = frame.to_unit(gen.reference);
    const TriMesh unit_region = frame.to_unit(gen.region);
    const TriMesh unit_removed = frame.to_unit(gen.removed);
    save_mesh(unit_reference, stages / "reference.obj");

    std::vector<BooleanStep> steps;
    switch (config.task) {
        case EditTask::Insert: steps.push_back({BooleanOp::Union, &unit_region, "insert"}); break;
        case EditTask::Delete: steps.push_back({BooleanOp::Difference, &unit_region, "delete"}); break;
        case EditTask::Replace:
        case EditTask::Drag:
            steps.push_back({BooleanOp::Difference, &unit_removed, "delete"});
            steps.push_back({BooleanOp::Union, &unit_region, "insert"});
            break;
    }

    TriMesh current = unit_original;
    RegionSelection regions;
    double spacing = 0.0;
    bool changed = false;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const BooleanStep& step = steps[k];
        const std::string tag = std::to_string(k) + "_" + step.name;
        struct BooleanOut {
            bool identity = true;
            TriMesh merged;
            RegionSelection regions;
            double spacing = 0.0;
        };
        const BooleanOut b = run.stage("boolean_" + tag, [&] {
            BooleanOut o;
            if (step.operand->faces.empty()) return o;
            Aabb box = bounding_box(current);
            box.extend(bounding_box(*step.operand));
            const Aabb bounds = padded_bounds(box, config.grid_resolution);
            const SdfGrid a = sample_sdf(current, DistanceIndex(current), bounds, config.grid_resolution);
            const SdfGrid s = sample_sdf(*step.operand, DistanceIndex(*step.operand), bounds, config.grid_resolution);
            const SdfGrid combined = combine(a, s, step.op);
            o.spacing = a.spacing;
            if (boolean_is_identity(a, combined)) return o;
            o.identity = false;
            SurfaceExtraction surface = marching_cubes(combined);
            if (surface.touches_boundary) throw NumericError("Boolean surface reaches the grid border");
            if (surface.mesh.faces.empty()) throw TopologyError("Boolean result is empty");
            o.merged = std::move(surface.mesh);
            const double tau = config.seam_tolerance > 0.0 ? config.seam_tolerance : a.spacing;
            const SeamPoints seam = extract_seam(a, s, o.merged, tau);
            o.regions = extract_regions(o.merged, unit_reference, seam.positions, config.eps0, config.eps1);
            return o;
        });
        run.note("boolean_" + tag + ".identity", b.identity ? "true" : "false");
        if (b.identity) continue;
        changed = true;
        spacing = b.spacing;
        save_mesh(b.merged, stages / ("boolean_" + tag + ".obj"));
        save_regions(b.regions, stages / ("regions_" + tag + ".txt"));
        run.note("boolean_" + tag + ".faces", std::to_string(b.merged.faces.size()));
        run.note("boolean_" + tag + ".seam_points", std::to_string(b.regions.seam_vertices.size()));
        run.note("boolean_" + tag + ".t_opt", std::to_string(b.regions.t_opt.size()));

        const FusionResult fused = run.stage("fusion_" + tag, [&] {
            return fuse_geometry(b.merged, unit_reference, b.regions, config.fusion, config.seed * 31 + k);
        });
        save_mesh(fused.mesh, stages / ("fused_" + tag + ".obj"));
        const int offset = result.trace.empty() ? 0 : result.trace.back().iteration + 1;
        for (LossSample s : fused.trace) {
            s.iteration += offset;
            result.trace.push_back(s);
        }
        run.note("fusion_" + tag + ".dihedral_before", seam_dihedral(b.merged, b.regions.t_opt));
        run.note("fusion_" + tag + ".dihedral_after", seam_dihedral(fused.mesh, fused.t_opt));
        if (!fused.trace.empty()) {
            run.note("fusion_" + tag + ".loss_first", fused.trace.front().total);
            run.note("fusion_" + tag + ".loss_last", fused.trace.back().total);
        }
        current = fused.mesh;
        regions = b.regions;
        regions.t_opt = fused.t_opt;
        regions.t_in = fused.t_in;
    }

    if (!changed) {
        result.identity = true;
        result.mesh = original;
        save_mesh(original, out / "merged.obj");
        if (texture) {
            fs::copy_file(config.texture, out / "texture.png", fs::copy_options::overwrite_existing);
            result.atlas = texture;
        }
    } else {
        const double delta = config.preserve_tolerance > 0.0 ? config.preserve_tolerance : 0.5 * spacing;
        run.stage("classify", [&] {
            const FaceClassification cls = classify_new_vs_preserved(current, unit_original, delta);
            regions.new_faces = cls.new_faces;
            regions.preserved_faces = cls.preserved_faces;
        });
        run.note("classify.new_faces", std::to_string(regions.new_faces.size()));
        run.note("classify.preserved_faces", std::to_string(regions.preserved_faces.size()));
        save_regions(regions, stages / "regions.txt");

        TriMesh final_mesh = current;
        if (texture) {
            const TexturedMesh generated = run.stage("texture_gen", [&] {
                TexturedMesh g = backend.texture(gen.region, config.prompt);
                g.mesh = frame.to_unit(g.mesh);
                return g;
            });
            final_mesh = with_packed_uvs(current);
            const int res = config.atlas_resolution;
            const TextureAtlas raw = run.stage("transfer", [&] {
                const TexelCorrespondence corr = build_correspondence(final_mesh, res, res, regions.new_faces);
                TexturedMesh kept{unit_original, *texture};
                TextureAtlas atlas = transfer_texture(final_mesh, res, corr, kept, generated);
                atlas.color = from_bytes(res, res, 3, to_bytes(atlas.color));
                return atlas;
            });
            save_mesh(final_mesh, stages / "textured.obj");
            write_png(raw.color, stages / "atlas_raw.png");
            HarmonizeReport rep;
            TextureAtlas harmonized =
                run.stage("harmonize", [&] { return harmonize_texture(final_mesh, raw, regions, &rep); });
            run.note("harmonize.added_texels", std::to_string(rep.added_texels));
            run.note("harmonize.boundary_vertices", std::to_string(rep.boundary_vertices));
            run.note("harmonize.seam_before", rep.seam_before);
            run.note("harmonize.seam_after", rep.seam_after);
            write_png(harmonized.color, out / "texture.png");
            result.atlas = std::move(harmonized);
        }
        result.mesh = frame.from_unit(final_mesh);
        save_mesh(result.mesh, out / "merged.obj");
    }

    write_loss_trace(result.trace, out / "loss_trace.csv");
    {
        std::ofstream audit(stages / "backend_audit.log");
        for (const std::string& line : backend.audit()) audit << line << '\n';
    }
    run.note("backend.calls", std::to_string(backend.audit().size()));
    run.note("identity", result.identity ? "true" : "false");
    run.note("output.mesh", hex64(file_hash(out / "merged.obj")));
    if (result.atlas) run.note("output.texture", hex64(file_hash(out / "texture.png")));
    run.note("status", "ok");
    run.write();
    result.report = run.report();
    return result;
}

}  // namespace craftmesh
