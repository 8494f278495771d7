#include "geometry/normalize.hpp"

#include "core/error.hpp"

namespace drape {

Points NormalizationTransform::apply(const Points& p) const {
  Points out = p * scale;
  out.rowwise() += translation.transpose();
  return out;
}

Points NormalizationTransform::invert(const Points& p) const {
  Points out = p;
  out.rowwise() -= translation.transpose();
  out /= scale;
  return out;
}

NormalizationTransform NormalizationTransform::inverse() const { return {1.0 / scale, -translation / scale}; }

bool NormalizationTransform::is_identity(double tol) const {
  return std::abs(scale - 1.0) <= tol && translation.cwiseAbs().maxCoeff() <= tol;
}

NormalizationTransform fit_unit_cube(const Points& points) {
  if (points.rows() == 0) fail(ErrorCode::Degenerate, "cannot normalize an empty point set");
  const Eigen::RowVector3d lo = points.colwise().minCoeff();
  const Eigen::RowVector3d hi = points.colwise().maxCoeff();
  const double extent = (hi - lo).maxCoeff();
  if (!(extent > 0.0)) fail(ErrorCode::Degenerate, "cannot normalize: all points coincide");
  NormalizationTransform t;
  t.scale = 1.0 / extent;
  const Vec3 center = 0.5 * (lo + hi).transpose();
  t.translation = Vec3::Constant(0.5) - t.scale * center;
  return t;
}

Points normalize_to_unit_cube(const Points& points, NormalizationTransform* transform) {
  const NormalizationTransform t = fit_unit_cube(points);
  if (transform) *transform = t;
  return t.apply(points);
}

SurfaceMesh normalize_to_unit_cube(const SurfaceMesh& mesh, NormalizationTransform* transform) {
  const NormalizationTransform t = fit_unit_cube(mesh.vertices());
  if (transform) *transform = t;
  return mesh.with_vertices(t.apply(mesh.vertices()));
}

SurfaceMesh transform_mesh(const SurfaceMesh& mesh, const NormalizationTransform& transform) {
  return mesh.with_vertices(transform.apply(mesh.vertices()));
}

}  // namespace drape
