#include "craftmesh/distance.hpp"
#include "craftmesh/mesh_io.hpp"
#include "craftmesh/pipeline.hpp"
#include "craftmesh/poisson.hpp"
#include "craftmesh/sdf.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace craftmesh;
namespace fs = std::filesystem;

namespace {

struct ExitCode {
    static constexpr int ok = 0;
    static constexpr int failure = 1;
    static constexpr int invalid_input = 2;
};

int cmd_run(const fs::path& config_path, const std::string& output) {
    PipelineConfig config = load_config(config_path);
    for (const std::string& w : config.warnings) std::cerr << "warning: " << w << '\n';
    if (!output.empty()) config.output = output;
    FilesystemBackend backend(config.backend_root);
    const WorkflowResult result = run_workflow(config, backend);
    std::cout << "wrote " << (config.output / "merged.obj").string() << " (" << result.mesh.faces.size() << " faces"
              << (result.identity ? ", identity edit" : "") << ")\n";
    if (result.atlas) std::cout << "wrote " << (config.output / "texture.png").string() << '\n';
    return ExitCode::ok;
}

struct BooleanArgs {
    fs::path a, b, out, reference, regions_out;
    std::string op = "union";
    int resolution = 64;
    double eps0 = 0.08, eps1 = 0.05, seam_tolerance = 0.0;
};

int cmd_boolean(const BooleanArgs& args) {
    const TriMesh a = load_mesh(args.a);
    const TriMesh b = load_mesh(args.b);
    const BooleanOp op = args.op == "union" ? BooleanOp::Union : BooleanOp::Difference;
    Aabb box = bounding_box(a);
    box.extend(bounding_box(b));
    const Aabb bounds = padded_bounds(box, args.resolution);
    const SdfGrid sa = sample_sdf(a, DistanceIndex(a), bounds, args.resolution);
    const SdfGrid sb = sample_sdf(b, DistanceIndex(b), bounds, args.resolution);
    const SurfaceExtraction surface = marching_cubes(combine(sa, sb, op));
    if (surface.touches_boundary) throw NumericError("Boolean surface reaches the grid border");
    save_mesh(surface.mesh, args.out);
    std::cout << "wrote " << args.out.string() << " (" << surface.mesh.faces.size() << " faces)\n";
    if (!args.regions_out.empty()) {
        const TriMesh reference = load_mesh(args.reference);
        const double tau = args.seam_tolerance > 0.0 ? args.seam_tolerance : sa.spacing;
        const SeamPoints seam = extract_seam(sa, sb, surface.mesh, tau);
        const RegionSelection regions = extract_regions(surface.mesh, reference, seam.positions, args.eps0, args.eps1);
        save_regions(regions, args.regions_out);
        std::cout << "wrote " << args.regions_out.string() << " (" << regions.t_opt.size() << " optimized vertices)\n";
    }
    return ExitCode::ok;
}

struct FuseArgs {
    fs::path mesh, reference, regions, out, trace = "loss_trace.csv", render_dir;
    FusionConfig config;
    std::uint64_t seed = 0;
};

int cmd_fuse(const FuseArgs& args) {
    const TriMesh mesh = load_mesh(args.mesh);
    const TriMesh reference = load_mesh(args.reference);
    const RegionSelection regions = load_regions(args.regions);
    args.config.validate();
    const FusionResult result = fuse_geometry(mesh, reference, regions, args.config, args.seed);
    save_mesh(result.mesh, args.out);
    write_loss_trace(result.trace, args.trace);
    if (!args.render_dir.empty()) {
        fs::create_directories(args.render_dir);
        write_png(render_reference(mesh, 256), args.render_dir / "before.png");
        write_png(render_reference(result.mesh, 256), args.render_dir / "after.png");
    }
    std::cout << "seam dihedral " << seam_dihedral(mesh, regions.t_opt) << " -> "
              << seam_dihedral(result.mesh, result.t_opt) << " rad\n";
    if (!result.trace.empty()) {
        std::cout << "loss " << result.trace.front().total << " -> " << result.trace.back().total << '\n';
    }
    return ExitCode::ok;
}

int cmd_harmonize(const fs::path& mesh_path, const fs::path& atlas_path, const fs::path& regions_path,
                  const fs::path& out, const fs::path& triangulation_out) {
    const TriMesh mesh = load_mesh(mesh_path);
    const TextureAtlas atlas(read_png(atlas_path));
    const RegionSelection regions = load_regions(regions_path);
    HarmonizeReport report;
    TexelMesh texels;
    const TextureAtlas result = harmonize_texture(mesh, atlas, regions, &report, &texels);
    write_png(result.color, out);
    if (!triangulation_out.empty()) {
        TriMesh flat;
        for (const Vec2& p : texels.positions) flat.vertices.emplace_back(p.x(), p.y(), 0.0);
        for (const auto& t : texels.triangles) flat.faces.push_back({t[0], t[1], t[2]});
        save_mesh(flat, triangulation_out);
    }
    std::cout << report.added_texels << " added texels, seam difference " << report.seam_before << " -> "
              << report.seam_after << '\n';
    return ExitCode::ok;
}

int cmd_pie(const fs::path& target, const fs::path& source, const fs::path& mask, const fs::path& out,
            const BlendOptions& options) {
    const Image result = poisson_blend(read_png(target), read_png(source), mask_from_image(read_png(mask)), options);
    write_png(result, out);
    return ExitCode::ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"craftmesh: prompt-driven mesh editing with Poisson geometry and texture fusion"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a full edit from a config file");
    fs::path config_path;
    std::string output;
    run->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
    run->add_option("--output", output, "override the output directory");

    auto* boolean = app.add_subcommand("boolean", "SDF Boolean of two closed meshes");
    BooleanArgs bool_args;
    boolean->add_option("--a", bool_args.a, "first mesh")->required()->check(CLI::ExistingFile);
    boolean->add_option("--b", bool_args.b, "second mesh")->required()->check(CLI::ExistingFile);
    boolean->add_option("--op", bool_args.op, "union or difference")->check(CLI::IsMember({"union", "difference"}));
    boolean->add_option("--resolution", bool_args.resolution, "grid cells along the longest axis");
    boolean->add_option("--out", bool_args.out, "merged mesh")->required();
    boolean->add_option("--reference", bool_args.reference, "edited reference mesh for region extraction");
    boolean->add_option("--regions-out", bool_args.regions_out, "region file to write (needs --reference)");
    boolean->add_option("--eps0", bool_args.eps0, "influence radius");
    boolean->add_option("--eps1", bool_args.eps1, "optimization radius");
    boolean->add_option("--seam-tolerance", bool_args.seam_tolerance, "0 selects one grid spacing");

    auto* fuse = app.add_subcommand("fuse-geom", "Poisson geometric fusion of a merged mesh");
    FuseArgs fuse_args;
    FusionConfig& fc = fuse_args.config;
    fuse->add_option("--mesh", fuse_args.mesh, "merged mesh")->required()->check(CLI::ExistingFile);
    fuse->add_option("--reference", fuse_args.reference, "edited reference mesh")->required()->check(CLI::ExistingFile);
    fuse->add_option("--regions", fuse_args.regions, "region file")->required()->check(CLI::ExistingFile);
    fuse->add_option("--out", fuse_args.out, "fused mesh")->required();
    fuse->add_option("--trace", fuse_args.trace, "loss trace CSV");
    fuse->add_option("--render-dir", fuse_args.render_dir, "write before/after normal renders here");
    fuse->add_option("--seed", fuse_args.seed);
    fuse->add_option("--views", fc.views)->capture_default_str();
    fuse->add_option("--resolution", fc.resolution)->capture_default_str();
    fuse->add_option("--iterations", fc.iterations)->capture_default_str();
    fuse->add_option("--learning-rate", fc.learning_rate)->capture_default_str();
    fuse->add_option("--momentum", fc.momentum)->capture_default_str();
    fuse->add_option("--lambda-smooth", fc.lambda_smooth)->capture_default_str();
    fuse->add_option("--remesh-interval", fc.remesh_interval)->capture_default_str();
    fuse->add_option("--min-edge", fc.min_edge)->capture_default_str();
    fuse->add_option("--max-edge", fc.max_edge)->capture_default_str();
    fuse->add_option("--reblend-interval", fc.reblend_interval)->capture_default_str();
    fuse->add_flag("--align-reference", fc.align_reference);

    auto* harm = app.add_subcommand("harmonize-tex", "harmonize the new-region texels of an atlas");
    fs::path harm_mesh, harm_atlas, harm_regions, harm_out, harm_tri;
    harm->add_option("--mesh", harm_mesh, "mesh with UVs")->required()->check(CLI::ExistingFile);
    harm->add_option("--atlas", harm_atlas, "RGB atlas image")->required()->check(CLI::ExistingFile);
    harm->add_option("--regions", harm_regions, "region file with new_faces")->required()->check(CLI::ExistingFile);
    harm->add_option("--out", harm_out, "harmonized atlas")->required();
    harm->add_option("--triangulation-out", harm_tri, "dump the texel triangulation as a flat mesh");

    auto* pie = app.add_subcommand("pie", "Poisson image blend");
    fs::path pie_target, pie_source, pie_mask, pie_out;
    BlendOptions blend;
    pie->add_option("--target", pie_target)->required()->check(CLI::ExistingFile);
    pie->add_option("--source", pie_source)->required()->check(CLI::ExistingFile);
    pie->add_option("--mask", pie_mask, "selected where >= 0.5")->required()->check(CLI::ExistingFile);
    pie->add_option("--out", pie_out)->required();
    pie->add_flag("--mixed-gradients", blend.mixed_gradients);
    pie->add_flag("--erode-border", blend.erode_border);

    auto* fixture = app.add_subcommand("fixture", "write the plane-with-bump example scene");
    fs::path fixture_dir;
    bool light = false;
    fixture->add_option("--dir", fixture_dir)->required();
    fixture->add_flag("--light", light, "small resolutions for a quick run");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config_path, output);
        if (*boolean) {
            if (!bool_args.regions_out.empty() && bool_args.reference.empty()) {
                throw ParameterError("--regions-out needs --reference");
            }
            return cmd_boolean(bool_args);
        }
        if (*fuse) return cmd_fuse(fuse_args);
        if (*harm) return cmd_harmonize(harm_mesh, harm_atlas, harm_regions, harm_out, harm_tri);
        if (*pie) return cmd_pie(pie_target, pie_source, pie_mask, pie_out, blend);
        if (*fixture) {
            std::cout << "wrote " << write_bump_fixture(fixture_dir, light).string() << '\n';
            return ExitCode::ok;
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExitCode::invalid_input;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExitCode::invalid_input;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExitCode::failure;
    }
    return ExitCode::failure;
}
