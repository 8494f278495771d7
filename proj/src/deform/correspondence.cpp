#include "deform/correspondence.hpp"

#include "core/error.hpp"
#include "geometry/mesh_io.hpp"

#include <json.hpp>

#include <charconv>
#include <set>
#include <sstream>

namespace drape {

using nlohmann::json;

CorrespondenceSet::CorrespondenceSet(std::vector<Correspondence> pairs) : pairs_(std::move(pairs)) {
  std::set<int> seen;
  for (const Correspondence& c : pairs_) {
    if (!c.target_point.allFinite()) fail(ErrorCode::NonFinite, "correspondence target is not finite");
    if (!seen.insert(c.source_vertex).second)
      fail(ErrorCode::InvalidArgument, "source vertex " + std::to_string(c.source_vertex) + " used by two pairs");
  }
}

std::size_t CorrespondenceSet::rigid_count() const {
  std::size_t n = 0;
  for (const auto& c : pairs_) n += c.kind == CorrespondenceKind::Rigid;
  return n;
}

CorrespondenceSet CorrespondenceSet::rigid_only() const {
  std::vector<Correspondence> out;
  for (const auto& c : pairs_)
    if (c.kind == CorrespondenceKind::Rigid) out.push_back(c);
  return CorrespondenceSet(std::move(out));
}

void CorrespondenceSet::validate(std::size_t vertex_count) const {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const int v = pairs_[i].source_vertex;
    if (v < 0 || static_cast<std::size_t>(v) >= vertex_count)
      fail(ErrorCode::OutOfRange, "correspondence " + std::to_string(i) + " references vertex " + std::to_string(v) +
                                      " of " + std::to_string(vertex_count));
  }
}

CorrespondenceSet CorrespondenceSet::snapped(const TargetShape& target) const {
  CorrespondenceSet out = *this;
  for (auto& c : out.pairs_) c.target_point = target.nearest_point(c.target_point).point;
  return out;
}

CorrespondenceSet CorrespondenceSet::transformed(const NormalizationTransform& t) const {
  CorrespondenceSet out = *this;
  for (auto& c : out.pairs_) c.target_point = t.apply(c.target_point);
  return out;
}

namespace {

CorrespondenceKind parse_kind(const std::string& s) {
  if (s == "rigid") return CorrespondenceKind::Rigid;
  if (s == "soft") return CorrespondenceKind::Soft;
  fail(ErrorCode::Parse, "unknown correspondence kind '" + s + "'");
}

Correspondence from_json(const json& j) {
  try {
    Correspondence c;
    c.source_vertex = j.at("source_vertex").get<int>();
    const auto& p = j.at("target_point");
    if (!p.is_array() || p.size() != 3) fail(ErrorCode::Parse, "target_point must have 3 coordinates");
    c.target_point = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    if (j.contains("kind")) c.kind = parse_kind(j.at("kind").get<std::string>());
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("bad correspondence record: ") + e.what());
  }
}

CorrespondenceSet parse_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("correspondence document: ") + e.what());
  }
  const json& arr = doc.is_object() && doc.contains("pairs") ? doc["pairs"] : doc;
  if (!arr.is_array()) fail(ErrorCode::Parse, "correspondence document must be an array of pairs");
  std::vector<Correspondence> pairs;
  for (const auto& j : arr) pairs.push_back(from_json(j));
  return CorrespondenceSet(std::move(pairs));
}

CorrespondenceSet parse_lines(std::string_view text) {
  std::vector<Correspondence> pairs;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 4 && tok.size() != 5)
      fail(ErrorCode::Parse, "correspondence line " + std::to_string(line_no) + ": expected 4 or 5 fields");
    Correspondence c;
    auto num = [&](const std::string& s, auto& out) {
      const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
      if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        fail(ErrorCode::Parse, "correspondence line " + std::to_string(line_no) + ": bad number '" + s + "'");
    };
    num(tok[0], c.source_vertex);
    num(tok[1], c.target_point.x());
    num(tok[2], c.target_point.y());
    num(tok[3], c.target_point.z());
    if (tok.size() == 5) c.kind = parse_kind(tok[4]);
    pairs.push_back(c);
  }
  return CorrespondenceSet(std::move(pairs));
}

}  // namespace

CorrespondenceSet parse_correspondences(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && (text[first] == '{' || text[first] == '[')) return parse_json(text);
  return parse_lines(text);
}

CorrespondenceSet load_correspondences(const std::filesystem::path& path) {
  return parse_correspondences(read_text_file(path));
}

std::string format_correspondences_json(const CorrespondenceSet& set) {
  json arr = json::array();
  for (const auto& c : set.pairs())
    arr.push_back({{"source_vertex", c.source_vertex},
                   {"target_point", {c.target_point.x(), c.target_point.y(), c.target_point.z()}},
                   {"kind", c.kind == CorrespondenceKind::Rigid ? "rigid" : "soft"}});
  return json{{"pairs", arr}}.dump();
}

}  // namespace drape
