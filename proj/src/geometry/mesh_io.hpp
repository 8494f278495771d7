#pragma once

#include "geometry/mesh.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace drape {

// Vertex and face records as read from a text file, before any
// classification into mesh / soup / cloud.
struct RawGeometry {
  Points vertices;
  std::vector<Face> faces;
};

// Reads `v x y z` / `f i j k [l]` records (1-based, negative indices are
// relative, `i/t/n` tokens use the position index) and bare `x y z` lines.
// Other OBJ records are ignored.
RawGeometry parse_geometry(std::string_view text, std::string_view origin = "<memory>");
RawGeometry read_geometry(const std::filesystem::path& path);

SurfaceMesh parse_mesh(std::string_view text, std::string_view origin = "<memory>");
SurfaceMesh load_mesh(const std::filesystem::path& path);

// Shortest round-trip decimal representation, so save/load is lossless and
// the output bytes depend only on the values.
std::string format_mesh(const SurfaceMesh& mesh);
void save_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace drape
