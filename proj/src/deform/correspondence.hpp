#pragma once

#include "geometry/normalize.hpp"
#include "geometry/target_shape.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace drape {

enum class CorrespondenceKind { Soft, Rigid };

struct Correspondence {
  int source_vertex = -1;
  Vec3 target_point = Vec3::Zero();
  CorrespondenceKind kind = CorrespondenceKind::Soft;
};

// User-marked (source vertex, target point) pairs. Source ids are unique.
class CorrespondenceSet {
 public:
  CorrespondenceSet() = default;
  explicit CorrespondenceSet(std::vector<Correspondence> pairs);

  const std::vector<Correspondence>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  std::size_t rigid_count() const;
  CorrespondenceSet rigid_only() const;

  // Throws OutOfRange naming the first pair whose vertex id is not in
  // [0, vertex_count).
  void validate(std::size_t vertex_count) const;
  // Target points replaced by their nearest point on `target`.
  CorrespondenceSet snapped(const TargetShape& target) const;
  CorrespondenceSet transformed(const NormalizationTransform& t) const;

 private:
  std::vector<Correspondence> pairs_;
};

// Line records `src_index tx ty tz [rigid]` (0-based), or a JSON document:
// either an array of {source_vertex, target_point, kind} objects or an
// object holding such an array under "pairs".
CorrespondenceSet parse_correspondences(std::string_view text);
CorrespondenceSet load_correspondences(const std::filesystem::path& path);
std::string format_correspondences_json(const CorrespondenceSet& set);

}  // namespace drape
