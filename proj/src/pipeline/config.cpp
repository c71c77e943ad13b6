#include "craftmesh/pipeline.hpp"

#include "craftmesh/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace craftmesh {

std::string task_name(EditTask task) {
    switch (task) {
        case EditTask::Insert: return "insert";
        case EditTask::Delete: return "delete";
        case EditTask::Replace: return "replace";
        case EditTask::Drag: return "drag";
    }
    return "insert";
}

EditTask parse_task(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "insert") return EditTask::Insert;
    if (lower == "delete") return EditTask::Delete;
    if (lower == "replace") return EditTask::Replace;
    if (lower == "drag") return EditTask::Drag;
    throw ParameterError("unknown task '" + std::string(name) + "' (expected insert, delete, replace or drag)");
}

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

template <typename T>
T parse_number(const std::string& text) {
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ParameterError("'" + text + "' is not a valid number");
    return value;
}

bool parse_bool(const std::string& text) {
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "true" || lower == "yes" || lower == "1" || lower == "on") return true;
    if (lower == "false" || lower == "no" || lower == "0" || lower == "off") return false;
    throw ParameterError("'" + text + "' is not a boolean");
}

std::vector<std::string> problems(const PipelineConfig& c) {
    std::vector<std::string> out;
    if (c.mesh.empty()) out.push_back("mesh path is empty");
    if (c.backend_root.empty()) out.push_back("backend_root is empty");
    if (c.output.empty()) out.push_back("output path is empty");
    if (!(c.eps0 > 0.0)) out.push_back("eps0 must be positive");
    if (!(c.eps1 > 0.0)) out.push_back("eps1 must be positive");
    if (!(c.eps1 < c.eps0)) out.push_back("eps1 must be smaller than eps0");
    if (c.grid_resolution < 8) out.push_back("grid_resolution must be at least 8");
    if (c.atlas_resolution < 16) out.push_back("atlas_resolution must be at least 16");
    if (c.view_resolution < 16) out.push_back("view_resolution must be at least 16");
    if (!(c.seam_tolerance >= 0.0)) out.push_back("seam_tolerance must be non-negative");
    if (!(c.preserve_tolerance >= 0.0)) out.push_back("preserve_tolerance must be non-negative");
    if (c.task == EditTask::Drag && c.drag_file.empty()) out.push_back("task drag requires drag_file");
    try {
        c.fusion.validate();
    } catch (const Error& e) {
        out.push_back(e.what());
    }
    return out;
}

[[noreturn]] void report_problems(const std::vector<std::string>& list) {
    std::ostringstream msg;
    msg << "invalid pipeline config (" << list.size() << " problem" << (list.size() == 1 ? "" : "s") << "):";
    for (const std::string& p : list) msg << "\n  - " << p;
    throw ValidationError(msg.str());
}

}  // namespace

void PipelineConfig::validate() const {
    const auto list = problems(*this);
    if (!list.empty()) report_problems(list);
}

PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    PipelineConfig c;
    std::vector<std::string> errors;
    auto path_of = [&](const std::string& v) {
        const std::filesystem::path p(v);
        return p.is_absolute() ? p : base_dir / p;
    };
    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> setters{
        {"task", [&](const std::string& v) { c.task = parse_task(v); }},
        {"mesh", [&](const std::string& v) { c.mesh = path_of(v); }},
        {"texture", [&](const std::string& v) { c.texture = path_of(v); }},
        {"backend_root", [&](const std::string& v) { c.backend_root = path_of(v); }},
        {"output", [&](const std::string& v) { c.output = path_of(v); }},
        {"instruction", [&](const std::string& v) { c.instruction = v; }},
        {"drag_file", [&](const std::string& v) { c.drag_file = path_of(v); }},
        {"prompt", [&](const std::string& v) { c.prompt = v; }},
        {"eps0", [&](const std::string& v) { c.eps0 = parse_number<double>(v); }},
        {"eps1", [&](const std::string& v) { c.eps1 = parse_number<double>(v); }},
        {"grid_resolution", [&](const std::string& v) { c.grid_resolution = parse_number<int>(v); }},
        {"atlas_resolution", [&](const std::string& v) { c.atlas_resolution = parse_number<int>(v); }},
        {"view_resolution", [&](const std::string& v) { c.view_resolution = parse_number<int>(v); }},
        {"seam_tolerance", [&](const std::string& v) { c.seam_tolerance = parse_number<double>(v); }},
        {"preserve_tolerance", [&](const std::string& v) { c.preserve_tolerance = parse_number<double>(v); }},
        {"seed", [&](const std::string& v) { c.seed = parse_number<std::uint64_t>(v); }},
        {"views", [&](const std::string& v) { c.fusion.views = parse_number<int>(v); }},
        {"render_resolution", [&](const std::string& v) { c.fusion.resolution = parse_number<int>(v); }},
        {"iterations", [&](const std::string& v) { c.fusion.iterations = parse_number<int>(v); }},
        {"learning_rate", [&](const std::string& v) { c.fusion.learning_rate = parse_number<double>(v); }},
        {"momentum", [&](const std::string& v) { c.fusion.momentum = parse_number<double>(v); }},
        {"lambda_smooth", [&](const std::string& v) { c.fusion.lambda_smooth = parse_number<double>(v); }},
        {"remesh_interval", [&](const std::string& v) { c.fusion.remesh_interval = parse_number<int>(v); }},
        {"min_edge", [&](const std::string& v) { c.fusion.min_edge = parse_number<double>(v); }},
        {"max_edge", [&](const std::string& v) { c.fusion.max_edge = parse_number<double>(v); }},
        {"reblend_interval", [&](const std::string& v) { c.fusion.reblend_interval = parse_number<int>(v); }},
        {"align_reference", [&](const std::string& v) { c.fusion.align_reference = parse_bool(v); }},
    };

    std::map<std::string, int> seen;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(number) + ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(std::string_view(text).substr(0, eq));
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            c.warnings.push_back("line " + std::to_string(number) + ": unknown key '" + key + "' ignored");
            continue;
        }
        if (seen[key]++) c.warnings.push_back("line " + std::to_string(number) + ": key '" + key + "' repeated");
        try {
            it->second(value);
        } catch (const Error& e) {
            errors.push_back("line " + std::to_string(number) + ": " + key + ": " + e.what());
        }
    }
    if (const char* root = std::getenv("CRAFTMESH_BACKEND_ROOT"); root && *root) {
        c.backend_root = root;
        seen["backend_root"] = 1;
    }
    for (const char* required : {"task", "mesh", "backend_root"}) {
        if (!seen.count(required)) errors.push_back(std::string("missing required key: ") + required);
    }
    if (c.prompt.empty()) c.prompt = c.instruction;
    if (errors.empty()) {
        const auto more = problems(c);
        errors.insert(errors.end(), more.begin(), more.end());
    }
    if (!errors.empty()) report_problems(errors);
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    return parse_config(in, path.parent_path());
}

std::string config_echo(const PipelineConfig& c) {
    std::ostringstream out;
    out << "task = " << task_name(c.task) << '\n'
        << "mesh = " << c.mesh.string() << '\n'
        << "texture = " << c.texture.string() << '\n'
        << "backend_root = " << c.backend_root.string() << '\n'
        << "output = " << c.output.string() << '\n'
        << "instruction = " << c.instruction << '\n'
        << "drag_file = " << c.drag_file.string() << '\n'
        << "prompt = " << c.prompt << '\n'
        << "eps0 = " << format_double(c.eps0) << '\n'
        << "eps1 = " << format_double(c.eps1) << '\n'
        << "grid_resolution = " << c.grid_resolution << '\n'
        << "atlas_resolution = " << c.atlas_resolution << '\n'
        << "view_resolution = " << c.view_resolution << '\n'
        << "seam_tolerance = " << format_double(c.seam_tolerance) << '\n'
        << "preserve_tolerance = " << format_double(c.preserve_tolerance) << '\n'
        << "seed = " << c.seed << '\n'
        << "views = " << c.fusion.views << '\n'
        << "render_resolution = " << c.fusion.resolution << '\n'
        << "iterations = " << c.fusion.iterations << '\n'
        << "learning_rate = " << format_double(c.fusion.learning_rate) << '\n'
        << "momentum = " << format_double(c.fusion.momentum) << '\n'
        << "lambda_smooth = " << format_double(c.fusion.lambda_smooth) << '\n'
        << "remesh_interval = " << c.fusion.remesh_interval << '\n'
        << "min_edge = " << format_double(c.fusion.min_edge) << '\n'
        << "max_edge = " << format_double(c.fusion.max_edge) << '\n'
        << "reblend_interval = " << c.fusion.reblend_interval << '\n'
        << "align_reference = " << (c.fusion.align_reference ? "true" : "false") << '\n';
    return out.str();
}

}  // namespace craftmesh
