#include "craftmesh/fusion.hpp"

#include "craftmesh/distance.hpp"
#include "craftmesh/errors.hpp"
#include "craftmesh/mesh_io.hpp"
#include "craftmesh/topology.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace craftmesh {

void FusionConfig::validate() const {
    if (views < 1) throw ParameterError("fusion needs at least one view");
    if (resolution < 8) throw ParameterError("fusion resolution must be at least 8");
    if (iterations < 0) throw ParameterError("iterations must be non-negative");
    if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterError("momentum must lie in [0, 1)");
    if (!(lambda_smooth >= 0.0)) throw ParameterError("lambda_smooth must be non-negative");
    if (remesh_interval < 0) throw ParameterError("remesh interval must be non-negative");
    if (!(min_edge > 0.0 && min_edge < max_edge)) throw ParameterError("edge bounds need 0 < min_edge < max_edge");
    if (reblend_interval < 1) throw ParameterError("re-blend interval must be at least 1");
}

namespace {

std::vector<Camera> region_views(const TriMesh& mesh, const std::vector<int>& t_in, const FusionConfig& config,
                                 std::uint64_t seed) {
    Aabb box;
    for (int v : t_in) box.extend(mesh.vertices[v]);
    double radius = 0.5 * box.diagonal();
    if (radius <= 0.0) radius = 0.05 * bounding_box(mesh).diagonal();
    return sample_viewpoints(config.views, box.center(), 2.5 * radius, seed, config.resolution,
                             config.resolution);
}

// Pixel counts rescaled to mean 1 over weighted faces so the balance with
// the smoothness term does not depend on view count or resolution.
void normalize_weights(FaceTargets& targets) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double w : targets.weight) {
        if (w > 0.0) {
            sum += w;
            ++n;
        }
    }
    if (n == 0) return;
    const double scale = static_cast<double>(n) / sum;
    for (double& w : targets.weight) w *= scale;
}

double region_edge_length(const TriMesh& mesh, const std::vector<int>& region) {
    double sum = 0.0;
    int count = 0;
    for (int f : faces_touching(mesh, region)) {
        const Face& t = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            sum += (mesh.vertices[t[k]] - mesh.vertices[t[(k + 1) % 3]]).norm();
            ++count;
        }
    }
    return count ? sum / count : 0.0;
}

// A vertex may move at most this fraction of its smallest altitude per step,
// so sliver faces (common in marching-cubes output) cannot fold over.
constexpr double kTrustFraction = 0.25;

// Per vertex, the smallest distance to the opposite edge over incident faces.
std::vector<double> vertex_altitudes(const TriMesh& mesh) {
    std::vector<double> out(mesh.vertices.size(), std::numeric_limits<double>::infinity());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& t = mesh.faces[f];
        const double twice_area = face_cross(mesh, static_cast<int>(f)).norm();
        for (int k = 0; k < 3; ++k) {
            const double base = (mesh.vertices[t[(k + 1) % 3]] - mesh.vertices[t[(k + 2) % 3]]).norm();
            const double h = base > 0.0 ? twice_area / base : 0.0;
            out[t[k]] = std::min(out[t[k]], h);
        }
    }
    return out;
}

std::vector<int> remap_sorted(const std::vector<int>& old_indices, const std::vector<int>& new_of_old,
                              const std::vector<int>& extra) {
    std::vector<int> out;
    for (int v : old_indices) {
        if (new_of_old[v] >= 0) out.push_back(new_of_old[v]);
    }
    out.insert(out.end(), extra.begin(), extra.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

FusionResult fuse_geometry(const TriMesh& mesh_t, const TriMesh& mesh_e, const RegionSelection& regions,
                           const FusionConfig& config, std::uint64_t seed) {
    config.validate();
    mesh_t.validate();
    mesh_e.validate();
    FusionResult res;
    res.mesh = mesh_t;
    res.t_opt = regions.t_opt;
    res.t_in = regions.t_in;
    res.vertex_origin.resize(mesh_t.vertices.size());
    for (std::size_t v = 0; v < mesh_t.vertices.size(); ++v) res.vertex_origin[v] = static_cast<int>(v);
    if (config.iterations == 0 || regions.t_opt.empty()) return res;

    const TriMesh reference = config.align_reference ? align_rigid(mesh_e, mesh_t) : mesh_e;
    RegionSelection sel = regions;
    const double diagonal = bounding_box(mesh_t).diagonal();
    std::vector<Vec3> velocity(sel.t_opt.size(), Vec3::Zero());
    FaceTargets targets;
    double step_scale = -1.0;
    std::uint64_t round = 0;

    for (int it = 0; it < config.iterations; ++it) {
        bool remeshed = false;
        if (config.remesh_interval > 0 && it % config.remesh_interval == 0) {
            RemeshResult rr = remesh_region(res.mesh, sel.t_opt, config.min_edge, config.max_edge);
            ++res.remesh_passes;
            if (rr.splits + rr.collapses > 0) {
                std::vector<int> new_of_old(res.mesh.vertices.size(), -1);
                std::vector<int> created;
                std::vector<int> origin(rr.vertex_origin.size(), -1);
                for (std::size_t v = 0; v < rr.vertex_origin.size(); ++v) {
                    const int o = rr.vertex_origin[v];
                    if (o < 0) {
                        created.push_back(static_cast<int>(v));
                        continue;
                    }
                    new_of_old[o] = static_cast<int>(v);
                    origin[v] = res.vertex_origin[o];
                }
                res.mesh = std::move(rr.mesh);
                res.vertex_origin = std::move(origin);
                sel.t_opt = rr.region;
                sel.t_in = remap_sorted(sel.t_in, new_of_old, created);
                velocity.assign(sel.t_opt.size(), Vec3::Zero());
                remeshed = true;
            }
        }
        if (it % config.reblend_interval == 0 || remeshed) {
            const auto cams = region_views(res.mesh, sel.t_in, config, seed * 1000003ull + round++);
            targets = compute_blended_targets(res.mesh, reference, sel, cams);
            normalize_weights(targets);
            step_scale = -1.0;
        }

        const LossGradient lp = normal_loss_and_grad(res.mesh, targets, sel.t_opt);
        const LossGradient ls = smoothness_loss_and_grad(res.mesh, sel.t_opt);
        const double total = lp.value + config.lambda_smooth * ls.value;
        double gmax = 0.0;
        std::vector<Vec3> grad(sel.t_opt.size());
        for (std::size_t i = 0; i < grad.size(); ++i) {
            grad[i] = lp.gradient[i] + config.lambda_smooth * ls.gradient[i];
            gmax = std::max(gmax, grad[i].norm());
        }
        if (!std::isfinite(total) || !std::isfinite(gmax)) {
            std::ostringstream msg;
            msg << "fusion loss became non-finite at iteration " << it << ": poisson=" << lp.value
                << " smooth=" << ls.value << " max|grad|=" << gmax << " step_scale=" << step_scale
                << " free_vertices=" << sel.t_opt.size() << " skipped_faces=" << lp.skipped;
            throw NumericError(msg.str());
        }
        res.trace.push_back({it, total, lp.value, ls.value});

        // The step is fixed per blend round: the largest displacement of the
        // first step is learning_rate * diagonal. Gradients below that of a
        // unit-weight face one radian off target are not amplified.
        if (step_scale < 0.0) {
            const double h = region_edge_length(res.mesh, sel.t_opt);
            const double floor = h > 0.0 ? 1.0 / h : 0.0;
            const double ref = std::max(gmax, floor);
            step_scale = ref > 0.0 ? config.learning_rate * diagonal / ref : 0.0;
        }
        const double eta = step_scale * 0.5 * (1.0 + std::cos(M_PI * it / config.iterations));
        const std::vector<double> reach = vertex_altitudes(res.mesh);
        for (std::size_t i = 0; i < sel.t_opt.size(); ++i) {
            velocity[i] = config.momentum * velocity[i] - eta * grad[i];
            const double cap = kTrustFraction * reach[sel.t_opt[i]];
            const double len = velocity[i].norm();
            if (len > cap) velocity[i] *= cap / len;
            res.mesh.vertices[sel.t_opt[i]] += velocity[i];
        }
    }
    res.t_opt = sel.t_opt;
    res.t_in = sel.t_in;
    return res;
}

double seam_dihedral(const TriMesh& mesh, const std::vector<int>& region) {
    std::vector<char> touch(mesh.faces.size(), 0);
    for (int f : faces_touching(mesh, region)) touch[f] = 1;
    const Topology topo(mesh);
    double worst = 0.0;
    for (const Edge& e : topo.edges()) {
        if (e.faces.size() != 2 || !touch[e.faces[0]] || !touch[e.faces[1]]) continue;
        if (is_degenerate(mesh, e.faces[0]) || is_degenerate(mesh, e.faces[1])) continue;
        const double c = std::clamp(face_normal(mesh, e.faces[0]).dot(face_normal(mesh, e.faces[1])), -1.0, 1.0);
        worst = std::max(worst, std::acos(c));
    }
    return worst;
}

TriMesh align_rigid(const TriMesh& source, const TriMesh& target, int iterations) {
    TriMesh out = source;
    if (source.vertices.empty() || target.faces.empty()) return out;
    const DistanceIndex index(target);
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 0; it < iterations; ++it) {
        const std::size_t n = out.vertices.size();
        Vec3 cs = Vec3::Zero();
        Vec3 ct = Vec3::Zero();
        std::vector<Vec3> matched(n);
        double err = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            const ClosestHit hit = index.closest(out.vertices[v]);
            matched[v] = hit.point;
            err += hit.squared_distance;
            cs += out.vertices[v];
            ct += hit.point;
        }
        cs /= double(n);
        ct /= double(n);
        Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
        for (std::size_t v = 0; v < n; ++v) h += (out.vertices[v] - cs) * (matched[v] - ct).transpose();
        const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
        d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
        const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
        for (Vec3& p : out.vertices) p = r * (p - cs) + ct;
        if (std::isfinite(previous) && previous - err <= 1e-12 * previous) break;
        previous = err;
    }
    return out;
}

void write_loss_trace(const std::vector<LossSample>& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "iteration,total,poisson,smooth\n";
    for (const LossSample& s : trace) {
        out << s.iteration << ',' << format_double(s.total) << ',' << format_double(s.poisson) << ','
            << format_double(s.smooth) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace craftmesh
