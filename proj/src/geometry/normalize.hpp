#pragma once

#include "geometry/mesh.hpp"

namespace drape {

// p -> scale * p + translation, scale > 0.
struct NormalizationTransform {
  double scale = 1.0;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * p + translation; }
  Vec3 invert(const Vec3& p) const { return (p - translation) / scale; }
  Points apply(const Points& p) const;
  Points invert(const Points& p) const;
  NormalizationTransform inverse() const;
  bool is_identity(double tol = 1e-12) const;
};

// Uniform scale and translation that place the bounding box of `points`
// inside [0,1]^3 with the longest axis spanning exactly [0,1] and the other
// axes centred on 0.5. Throws Degenerate when all points coincide.
NormalizationTransform fit_unit_cube(const Points& points);

Points normalize_to_unit_cube(const Points& points, NormalizationTransform* transform = nullptr);
SurfaceMesh normalize_to_unit_cube(const SurfaceMesh& mesh, NormalizationTransform* transform = nullptr);
SurfaceMesh transform_mesh(const SurfaceMesh& mesh, const NormalizationTransform& transform);

}  // namespace drape
