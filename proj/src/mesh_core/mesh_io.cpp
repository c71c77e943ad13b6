#include "craftmesh/mesh_io.hpp"

#include "craftmesh/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace craftmesh {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

double parse_number(std::string_view token, std::size_t line) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw FormatError("invalid number '" + std::string(token) + "'", line);
    }
    return value;
}

long parse_index(std::string_view token, std::size_t line) {
    long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || value == 0) {
        throw FormatError("invalid index '" + std::string(token) + "'", line);
    }
    return value;
}

// Resolves a 1-based (or negative relative) OBJ index against `count` items.
long resolve(long index, std::size_t count) {
    return index > 0 ? index - 1 : static_cast<long>(count) + index;
}

}  // namespace

TriMesh parse_mesh(std::istream& in) {
    TriMesh mesh;
    std::vector<Vec3> colors;
    std::vector<Vec2> texcoords;
    std::vector<std::array<long, 3>> face_uv_indices;
    bool any_uv = false;
    bool all_uv = true;
    bool any_color = false;
    std::string raw;
    std::size_t line_no = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const auto tok = split_ws(line);
        if (tok.empty()) continue;

        if (tok[0] == "v") {
            if (tok.size() != 4 && tok.size() != 7) {
                throw FormatError("vertex record needs 3 or 6 numbers", line_no);
            }
            mesh.vertices.emplace_back(parse_number(tok[1], line_no), parse_number(tok[2], line_no),
                                       parse_number(tok[3], line_no));
            if (tok.size() == 7) {
                any_color = true;
                colors.emplace_back(parse_number(tok[4], line_no), parse_number(tok[5], line_no),
                                    parse_number(tok[6], line_no));
            } else {
                colors.emplace_back(0.0, 0.0, 0.0);
            }
        } else if (tok[0] == "vt") {
            if (tok.size() < 3) throw FormatError("texture record needs 2 numbers", line_no);
            texcoords.emplace_back(parse_number(tok[1], line_no), parse_number(tok[2], line_no));
        } else if (tok[0] == "f") {
            if (tok.size() != 4) {
                throw FormatError("only triangles are supported (got " +
                                      std::to_string(tok.size() - 1) + " corners)",
                                  line_no);
            }
            Face face{};
            std::array<long, 3> uv{-1, -1, -1};
            bool has_uv = true;
            for (int c = 0; c < 3; ++c) {
                const std::string_view corner = tok[c + 1];
                const auto slash = corner.find('/');
                const long vi = resolve(parse_index(corner.substr(0, slash), line_no),
                                        mesh.vertices.size());
                if (vi < 0 || vi >= static_cast<long>(mesh.vertices.size())) {
                    throw ValidationError("line " + std::to_string(line_no) + ": vertex index " +
                                          std::string(corner.substr(0, slash)) +
                                          " out of range (" +
                                          std::to_string(mesh.vertices.size()) + " vertices)");
                }
                face[c] = static_cast<int>(vi);
                if (slash == std::string_view::npos) {
                    has_uv = false;
                    continue;
                }
                const std::string_view rest = corner.substr(slash + 1);
                const std::string_view uv_tok = rest.substr(0, rest.find('/'));
                if (uv_tok.empty()) {
                    has_uv = false;
                    continue;
                }
                const long ti = resolve(parse_index(uv_tok, line_no), texcoords.size());
                if (ti < 0 || ti >= static_cast<long>(texcoords.size())) {
                    throw ValidationError("line " + std::to_string(line_no) + ": uv index " +
                                          std::string(uv_tok) + " out of range");
                }
                uv[c] = ti;
            }
            any_uv = any_uv || has_uv;
            all_uv = all_uv && has_uv;
            mesh.faces.push_back(face);
            face_uv_indices.push_back(uv);
        }
        // Other records (vn, g, o, s, mtllib, usemtl) carry nothing we keep.
    }
    if (in.bad()) throw IoError("read failure");

    if (any_uv) {
        if (!all_uv) throw ValidationError("uvs present on some faces but not all");
        mesh.uvs.emplace();
        mesh.uvs->reserve(mesh.faces.size());
        for (const auto& idx : face_uv_indices) {
            mesh.uvs->push_back({texcoords[idx[0]], texcoords[idx[1]], texcoords[idx[2]]});
        }
    }
    if (any_color) mesh.vertex_colors = std::move(colors);
    mesh.validate();
    return mesh;
}

TriMesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file " + path.string());
    return parse_mesh(in);
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw NumericError("cannot format value");
    return std::string(buf, ptr);
}

void write_mesh(const TriMesh& mesh, std::ostream& out) {
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const Vec3& p = mesh.vertices[v];
        out << "v " << format_double(p.x()) << ' ' << format_double(p.y()) << ' '
            << format_double(p.z());
        if (mesh.vertex_colors) {
            const Vec3& c = (*mesh.vertex_colors)[v];
            out << ' ' << format_double(c.x()) << ' ' << format_double(c.y()) << ' '
                << format_double(c.z());
        }
        out << '\n';
    }
    if (mesh.uvs) {
        for (const FaceUv& corners : *mesh.uvs) {
            for (const Vec2& uv : corners) {
                out << "vt " << format_double(uv.x()) << ' ' << format_double(uv.y()) << '\n';
            }
        }
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& t = mesh.faces[f];
        out << 'f';
        for (int c = 0; c < 3; ++c) {
            out << ' ' << t[c] + 1;
            if (mesh.uvs) out << '/' << 3 * f + c + 1;
        }
        out << '\n';
    }
}

std::string mesh_to_string(const TriMesh& mesh) {
    std::ostringstream out;
    write_mesh(mesh, out);
    return out.str();
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
    mesh.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write mesh file " + path.string());
    write_mesh(mesh, out);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace craftmesh
