#include "geometry/target_shape.hpp"

#include "core/error.hpp"
#include "core/random.hpp"
#include "geometry/mesh_io.hpp"

#include <cmath>
#include <numeric>

namespace drape {

const char* to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::Mesh: return "mesh";
    case TargetKind::PolygonSoup: return "polygon_soup";
    case TargetKind::PointCloud: return "point_cloud";
  }
  return "unknown";
}

TargetShape TargetShape::from_mesh(SurfaceMesh mesh, std::size_t dense_samples) {
  if (mesh.empty() || mesh.face_count() == 0) fail(ErrorCode::InvalidArgument, "target mesh is empty");
  TargetShape s;
  s.kind_ = TargetKind::Mesh;
  s.geometry_ = std::make_shared<const SurfaceMesh>(std::move(mesh));
  s.dense_samples_ = dense_samples;
  s.build_index();
  return s;
}

TargetShape TargetShape::from_soup(SurfaceMesh soup, std::size_t dense_samples) {
  TargetShape s = from_mesh(std::move(soup), dense_samples);
  s.kind_ = TargetKind::PolygonSoup;
  return s;
}

TargetShape TargetShape::from_points(Points points) {
  if (points.rows() == 0) fail(ErrorCode::InvalidArgument, "target point cloud is empty");
  TargetShape s;
  s.kind_ = TargetKind::PointCloud;
  s.geometry_ = std::make_shared<const SurfaceMesh>(std::move(points), std::vector<Face>{});
  s.build_index();
  return s;
}

void TargetShape::build_index() {
  const Points& v = geometry_->vertices();
  if (!is_surface() || dense_samples_ == 0) {
    index_ = std::make_shared<const PointIndex>(v);
    return;
  }
  if (!(geometry_->total_area() > 0.0)) fail(ErrorCode::Degenerate, "target surface has zero area");
  const PointSet dense = sample_surface(*geometry_, dense_samples_, kDenseSampleSeed);
  Points all(dense.points.rows() + v.rows(), 3);
  all << dense.points, v;
  index_ = std::make_shared<const PointIndex>(std::move(all));
}

Nearest TargetShape::nearest_point(const Vec3& q) const {
  const NearestHit hit = index_->nearest(q);
  return Nearest{index_->points().row(hit.index).transpose(), std::sqrt(hit.squared_distance), hit.index};
}

PointSet TargetShape::sample(std::size_t n, std::uint64_t seed) const {
  if (is_surface()) return sample_surface(*geometry_, n, seed);
  const Points& p = geometry_->vertices();
  const std::size_t m = static_cast<std::size_t>(p.rows());
  PointSet out;
  if (n >= m) {
    out.points = p;
    return out;
  }
  // Partial Fisher-Yates.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  out.points.resize(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(m - i);
    std::swap(order[i], order[j]);
    out.points.row(static_cast<Eigen::Index>(i)) = p.row(order[i]);
  }
  return out;
}

TargetShape TargetShape::transformed(const NormalizationTransform& t) const {
  TargetShape s;
  s.kind_ = kind_;
  s.dense_samples_ = dense_samples_;
  s.geometry_ = std::make_shared<const SurfaceMesh>(transform_mesh(*geometry_, t));
  // Sampling is barycentric and the transform is a similarity, so the
  // transformed canonical set equals the canonical set of the moved shape.
  s.index_ = std::make_shared<const PointIndex>(t.apply(index_->points()));
  return s;
}

namespace {

TargetShape classify(RawGeometry raw, std::size_t dense_samples) {
  if (raw.vertices.rows() == 0) fail(ErrorCode::InvalidArgument, "target has no geometry");
  if (raw.faces.empty()) return TargetShape::from_points(std::move(raw.vertices));
  std::vector<int> uses(static_cast<std::size_t>(raw.vertices.rows()), 0);
  bool shared = false;
  for (const Face& f : raw.faces)
    for (int v : f.indices()) shared |= ++uses[static_cast<std::size_t>(v)] > 1;
  SurfaceMesh mesh(std::move(raw.vertices), std::move(raw.faces));
  if (!shared && mesh.face_count() > 1) return TargetShape::from_soup(std::move(mesh), dense_samples);
  return TargetShape::from_mesh(std::move(mesh), dense_samples);
}

}  // namespace

TargetShape load_target(const std::filesystem::path& path, std::size_t dense_samples) {
  return classify(read_geometry(path), dense_samples);
}

TargetShape parse_target(std::string_view text, std::size_t dense_samples) {
  return classify(parse_geometry(text), dense_samples);
}

}  // namespace drape
