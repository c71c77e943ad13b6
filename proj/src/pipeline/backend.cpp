#include "craftmesh/pipeline.hpp"

#include "craftmesh/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

namespace craftmesh {

std::uint64_t fnv1a(std::string_view data, std::uint64_t hash) {
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a(bytes);
}

namespace {

std::uint64_t hash_image(const Image& image, std::uint64_t h) {
    const std::string shape =
        std::to_string(image.width) + "x" + std::to_string(image.height) + "x" + std::to_string(image.channels);
    h = fnv1a(shape, h);
    const std::vector<std::uint8_t> bytes = to_bytes(image);
    return fnv1a(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), h);
}

std::uint64_t tagged(std::string_view kind) {
    std::uint64_t h = fnv1a(kind);
    return fnv1a(std::string_view("\0", 1), h);
}

Image load_image(const std::filesystem::path& path, std::string_view context) {
    try {
        return read_png(path);
    } catch (const Error& e) {
        throw ValidationError(std::string(context) + ": " + e.what());
    }
}

TriMesh load_valid_mesh(const std::filesystem::path& path, std::string_view context) {
    try {
        TriMesh mesh = load_mesh(path);
        mesh.validate();
        return mesh;
    } catch (const Error& e) {
        throw ValidationError(std::string(context) + " (" + path.string() + "): " + e.what());
    }
}

}  // namespace

std::string image_edit_key(const Image& reference, std::string_view instruction) {
    std::uint64_t h = hash_image(reference, tagged("image-edit"));
    h = fnv1a(std::string_view("\0", 1), h);
    return hex64(fnv1a(instruction, h));
}

std::string mesh_gen_key(const Image& image) { return hex64(hash_image(image, tagged("mesh-gen"))); }

std::string texture_gen_key(const TriMesh& mesh, std::string_view prompt) {
    std::uint64_t h = fnv1a(mesh_to_string(mesh), tagged("texture-gen"));
    h = fnv1a(std::string_view("\0", 1), h);
    return hex64(fnv1a(prompt, h));
}

FilesystemBackend::FilesystemBackend(std::filesystem::path root) : root_(std::move(root)) {
    const auto manifest = root_ / "manifest.txt";
    std::ifstream in(manifest);
    if (!in) throw IoError("backend manifest not found: " + manifest.string());
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        std::istringstream fields(line);
        std::string kind, key;
        if (!(fields >> kind) || kind[0] == '#') continue;
        if (!(fields >> key)) throw FormatError("manifest line without a key", number);
        std::vector<std::string> files{std::istream_iterator<std::string>(fields), std::istream_iterator<std::string>()};
        if (files.empty()) throw FormatError("manifest entry '" + kind + " " + key + "' lists no files", number);
        entries_.emplace_back(kind + " " + key, std::move(files));
    }
}

const std::vector<std::string>& FilesystemBackend::lookup(std::string_view kind, const std::string& key) {
    const std::string wanted = std::string(kind) + " " + key;
    for (const auto& [entry, files] : entries_) {
        if (entry == wanted) {
            audit_.push_back(wanted + " hit");
            return files;
        }
    }
    audit_.push_back(wanted + " miss");
    throw BackendMissError("backend miss: no manifest entry '" + wanted + "' in " + (root_ / "manifest.txt").string());
}

EditedImages FilesystemBackend::edit(const Image& reference, std::string_view instruction) {
    const std::string key = image_edit_key(reference, instruction);
    const auto& files = lookup("image-edit", key);
    if (files.size() < 2) throw ValidationError("image-edit " + key + " needs an edited and a region image");
    EditedImages out;
    out.edited = load_image(root_ / files[0], "image-edit " + key + " edited image");
    out.region = load_image(root_ / files[1], "image-edit " + key + " region image");
    if (files.size() > 2) out.removed = load_image(root_ / files[2], "image-edit " + key + " removed-region image");
    return out;
}

TriMesh FilesystemBackend::generate(const Image& image) {
    const std::string key = mesh_gen_key(image);
    const auto& files = lookup("mesh-gen", key);
    return load_valid_mesh(root_ / files[0], "mesh-gen " + key);
}

TexturedMesh FilesystemBackend::texture(const TriMesh& mesh, std::string_view prompt) {
    const std::string key = texture_gen_key(mesh, prompt);
    const auto& files = lookup("texture-gen", key);
    if (files.size() < 2) throw ValidationError("texture-gen " + key + " needs a mesh and a color image");
    TexturedMesh out;
    out.mesh = load_valid_mesh(root_ / files[0], "texture-gen " + key);
    if (!out.mesh.uvs) throw ValidationError("texture-gen " + key + ": staged mesh has no UVs");
    Image color = load_image(root_ / files[1], "texture-gen " + key + " texture");
    if (color.channels < 3) throw ValidationError("texture-gen " + key + ": texture must be RGB");
    if (color.channels > 3) {
        Image rgb(color.width, color.height, 3);
        for (std::size_t p = 0; p < color.pixel_count(); ++p) {
            for (int c = 0; c < 3; ++c) rgb.values[p * 3 + c] = color.values[p * color.channels + c];
        }
        color = std::move(rgb);
    }
    out.atlas = TextureAtlas(std::move(color));
    return out;
}

void FilesystemBackend::stage(const std::filesystem::path& root, std::string_view kind, std::string_view key,
                              const std::vector<std::string>& files) {
    std::filesystem::create_directories(root);
    std::ofstream out(root / "manifest.txt", std::ios::app);
    if (!out) throw IoError("cannot write manifest in " + root.string());
    out << kind << ' ' << key;
    for (const std::string& f : files) out << ' ' << f;
    out << '\n';
}

}  // namespace craftmesh
