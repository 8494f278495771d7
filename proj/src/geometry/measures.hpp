#pragma once

#include "geometry/mesh.hpp"

#include <vector>

namespace drape {

// Interior angles per triangle corner of the triangulated view. Row t,
// column k is the angle at triangles()(t, k); the table layout only depends
// on connectivity, so it lines up between a mesh and its deformed copy.
struct CornerAngles {
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> angle;
  std::vector<bool> degenerate;  // per triangle: a zero-length edge
};

CornerAngles corner_angles(const Points& vertices, const Triangles& triangles);
CornerAngles corner_angles(const SurfaceMesh& mesh);

// Angle at `a` in triangle (a, b, c). atan2 form; 0 for zero-length edges.
double corner_angle(const Vec3& a, const Vec3& b, const Vec3& c);

// Per-vertex normalised areas of incident triangles (CSR layout).
// Vertices without incident triangles have an empty range.
struct LocalAreaDistribution {
  std::vector<int> offset;      // size vertex_count + 1
  std::vector<int> triangle;    // incident triangle ids
  std::vector<double> weight;   // normalised areas, sum to 1 per vertex
  std::vector<int> degenerate;  // vertices whose incident triangles all have zero area

  std::size_t vertex_count() const { return offset.empty() ? 0 : offset.size() - 1; }
};

// Incidence structure alone (weights left empty).
LocalAreaDistribution vertex_triangle_incidence(std::size_t vertex_count, const Triangles& triangles);
LocalAreaDistribution local_area_distribution(const Points& vertices, const Triangles& triangles);
LocalAreaDistribution local_area_distribution(const SurfaceMesh& mesh);

// 4*sqrt(3)*area / (sum of squared edge lengths); 1 for equilateral, 0 for
// zero area (including fully collapsed triangles).
double face_quality(const Vec3& a, const Vec3& b, const Vec3& c);

struct DirichletResult {
  double energy = 0.0;      // sum ||J_f||^2 a_f / (2 sum a_f); 1 for the identity map
  double distortion = 0.0;  // energy - 1
};

// Area-weighted Dirichlet energy of the piecewise-linear map from `source`
// to `deformed`, with J_f taken between orthonormal frames of each source
// triangle and its image. Throws on connectivity mismatch or a degenerate
// source triangle.
DirichletResult dirichlet_energy(const SurfaceMesh& source, const SurfaceMesh& deformed);
double dirichlet_distortion(const SurfaceMesh& source, const SurfaceMesh& deformed);

}  // namespace drape
