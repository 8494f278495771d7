#pragma once

#include "geometry/mesh.hpp"
#include "geometry/normalize.hpp"
#include "geometry/point_index.hpp"
#include "geometry/sampling.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string_view>

namespace drape {

enum class TargetKind { Mesh, PolygonSoup, PointCloud };

const char* to_string(TargetKind kind);

struct Nearest {
  Vec3 point = Vec3::Zero();
  double distance = 0.0;
  int index = -1;  // into canonical_points()
};

inline constexpr std::size_t kDefaultDenseSamples = 100000;
inline constexpr std::uint64_t kDenseSampleSeed = 0x5eed0fdbull;

// The shape a source mesh is draped onto. Surface variants keep their
// triangles for sampling; all variants answer nearest-point queries against
// a canonical point set (dense surface sample plus vertices for surfaces,
// the points themselves for clouds).
class TargetShape {
 public:
  static TargetShape from_mesh(SurfaceMesh mesh, std::size_t dense_samples = kDefaultDenseSamples);
  // Faces are kept as independent polygons; nothing is welded.
  static TargetShape from_soup(SurfaceMesh soup, std::size_t dense_samples = kDefaultDenseSamples);
  static TargetShape from_points(Points points);

  TargetKind kind() const { return kind_; }
  bool is_surface() const { return kind_ != TargetKind::PointCloud; }
  // Surface geometry; for point clouds a face-less mesh over the points.
  const SurfaceMesh& geometry() const { return *geometry_; }
  const Points& canonical_points() const { return index_->points(); }
  std::size_t dense_samples() const { return dense_samples_; }

  Nearest nearest_point(const Vec3& q) const;

  // Surface sample for meshes and soups. Clouds return all points when
  // n >= size, otherwise a uniformly drawn subset without replacement.
  PointSet sample(std::size_t n, std::uint64_t seed) const;

  // Applies `t` to the geometry and rebuilds the canonical set.
  TargetShape transformed(const NormalizationTransform& t) const;

 private:
  TargetShape() = default;
  void build_index();

  TargetKind kind_ = TargetKind::PointCloud;
  std::shared_ptr<const SurfaceMesh> geometry_;
  std::shared_ptr<const PointIndex> index_;
  std::size_t dense_samples_ = 0;
};

// Classifies a parsed file: no faces -> point cloud; faces that never share
// a vertex (and more than one face) -> polygon soup; otherwise mesh.
TargetShape load_target(const std::filesystem::path& path, std::size_t dense_samples = kDefaultDenseSamples);
TargetShape parse_target(std::string_view text, std::size_t dense_samples = kDefaultDenseSamples);

}  // namespace drape
