#include "geometry/mesh_io.hpp"

#include "core/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace drape {

namespace {

std::string where(std::string_view origin, std::size_t line) {
  return std::string(origin) + ":" + std::to_string(line) + ": ";
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc{} && res.ptr == tok.data() + tok.size();
}

bool parse_int(std::string_view tok, long& out) {
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc{} && res.ptr == tok.data() + tok.size();
}

}  // namespace

RawGeometry parse_geometry(std::string_view text, std::string_view origin) {
  std::vector<double> coords;
  struct PendingFace {
    std::array<long, 4> idx;
    int size;
    std::size_t line;
    long vertices_seen;
  };
  std::vector<PendingFace> pending;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_tokens(line);
    if (tok.empty()) {
      if (end == text.size()) break;
      continue;
    }

    double x = 0, y = 0, z = 0;
    if (tok[0] == "v") {
      if (tok.size() < 4 || !parse_double(tok[1], x) || !parse_double(tok[2], y) || !parse_double(tok[3], z))
        fail(ErrorCode::Parse, where(origin, line_no) + "malformed vertex record");
      coords.insert(coords.end(), {x, y, z});
    } else if (tok[0] == "f") {
      const int arity = static_cast<int>(tok.size()) - 1;
      if (arity < 3) fail(ErrorCode::Parse, where(origin, line_no) + "face with fewer than 3 vertices");
      if (arity > 4)
        fail(ErrorCode::Parse, where(origin, line_no) + "face arity " + std::to_string(arity) + " exceeds 4");
      PendingFace face{{0, 0, 0, 0}, arity, line_no, static_cast<long>(coords.size() / 3)};
      for (int k = 0; k < arity; ++k) {
        std::string_view t = tok[static_cast<std::size_t>(k) + 1];
        t = t.substr(0, t.find('/'));
        long idx = 0;
        if (!parse_int(t, idx) || idx == 0)
          fail(ErrorCode::Parse, where(origin, line_no) + "bad face index '" + std::string(t) + "'");
        face.idx[static_cast<std::size_t>(k)] = idx;
      }
      pending.push_back(face);
    } else if (tok.size() == 3 && parse_double(tok[0], x) && parse_double(tok[1], y) && parse_double(tok[2], z)) {
      coords.insert(coords.end(), {x, y, z});
    } else if (tok[0] == "vn" || tok[0] == "vt" || tok[0] == "vp" || tok[0] == "o" || tok[0] == "g" ||
               tok[0] == "s" || tok[0] == "usemtl" || tok[0] == "mtllib" || tok[0] == "l") {
      // not geometry we use
    } else {
      fail(ErrorCode::Parse, where(origin, line_no) + "unrecognized record '" + std::string(tok[0]) + "'");
    }
    if (end == text.size()) break;
  }

  RawGeometry raw;
  const long n = static_cast<long>(coords.size() / 3);
  raw.vertices.resize(n, 3);
  for (long i = 0; i < n; ++i)
    raw.vertices.row(i) << coords[3 * static_cast<std::size_t>(i)], coords[3 * static_cast<std::size_t>(i) + 1],
        coords[3 * static_cast<std::size_t>(i) + 2];
  if (!raw.vertices.allFinite()) fail(ErrorCode::NonFinite, std::string(origin) + ": non-finite coordinate");

  raw.faces.reserve(pending.size());
  for (const PendingFace& pf : pending) {
    Face face;
    face.size = pf.size;
    for (int k = 0; k < pf.size; ++k) {
      long idx = pf.idx[static_cast<std::size_t>(k)];
      idx = idx > 0 ? idx - 1 : pf.vertices_seen + idx;
      if (idx < 0 || idx >= n)
        fail(ErrorCode::OutOfRange, where(origin, pf.line) + "face index " +
                                        std::to_string(pf.idx[static_cast<std::size_t>(k)]) + " out of range for " +
                                        std::to_string(n) + " vertices");
      face.v[static_cast<std::size_t>(k)] = static_cast<int>(idx);
    }
    raw.faces.push_back(face);
  }
  return raw;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

RawGeometry read_geometry(const std::filesystem::path& path) {
  return parse_geometry(read_text_file(path), path.string());
}

SurfaceMesh parse_mesh(std::string_view text, std::string_view origin) {
  RawGeometry raw = parse_geometry(text, origin);
  if (raw.faces.empty()) fail(ErrorCode::InvalidArgument, std::string(origin) + ": mesh has no faces");
  return SurfaceMesh(std::move(raw.vertices), std::move(raw.faces));
}

SurfaceMesh load_mesh(const std::filesystem::path& path) { return parse_mesh(read_text_file(path), path.string()); }

namespace {
void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}
}  // namespace

std::string format_mesh(const SurfaceMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertex_count() * 64 + mesh.face_count() * 24);
  const Points& v = mesh.vertices();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    out += "v ";
    append_double(out, v(i, 0));
    out += ' ';
    append_double(out, v(i, 1));
    out += ' ';
    append_double(out, v(i, 2));
    out += '\n';
  }
  for (const Face& f : mesh.faces()) {
    out += 'f';
    for (int k = 0; k < f.size; ++k) {
      out += ' ';
      out += std::to_string(f.v[static_cast<std::size_t>(k)] + 1);
    }
    out += '\n';
  }
  return out;
}

void save_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path) { write_text_file(path, format_mesh(mesh)); }

}  // namespace drape
