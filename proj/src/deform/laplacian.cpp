#include "deform/deform.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace drape {

namespace {

double clamped_cot(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u = b - a, v = c - a;
  const double cross = u.cross(v).norm();
  const double cot = cross > 0.0 ? u.dot(v) / cross : (u.dot(v) >= 0 ? kCotangentClamp : -kCotangentClamp);
  return std::clamp(cot, -kCotangentClamp, kCotangentClamp);
}

}  // namespace

SparseMatrix cotangent_laplacian(const SurfaceMesh& mesh) {
  const Points& v = mesh.vertices();
  const Triangles& tris = mesh.triangles();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(tris.rows()) * 12);
  for (Eigen::Index t = 0; t < tris.rows(); ++t) {
    const int idx[3] = {tris(t, 0), tris(t, 1), tris(t, 2)};
    const Vec3 p[3] = {v.row(idx[0]).transpose(), v.row(idx[1]).transpose(), v.row(idx[2]).transpose()};
    if ((p[1] - p[0]).cross(p[2] - p[0]).norm() == 0.0)
      fail(ErrorCode::Degenerate, "triangle " + std::to_string(t) + " (face " +
                                      std::to_string(mesh.triangle_face()[static_cast<std::size_t>(t)]) +
                                      ") has zero area");
    for (int k = 0; k < 3; ++k) {
      // Corner k is opposite edge (k+1, k+2).
      const int i = idx[(k + 1) % 3], j = idx[(k + 2) % 3];
      const double w = 0.5 * clamped_cot(p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
      trip.emplace_back(i, j, w);
      trip.emplace_back(j, i, w);
      trip.emplace_back(i, i, -w);
      trip.emplace_back(j, j, -w);
    }
  }
  const Eigen::Index n = v.rows();
  SparseMatrix lap(n, n);
  lap.setFromTriplets(trip.begin(), trip.end());
  return lap;
}

Eigen::VectorXd lumped_mass(const SurfaceMesh& mesh) {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(mesh.vertices().rows());
  const Eigen::VectorXd areas = triangle_areas(mesh.vertices(), mesh.triangles());
  const Triangles& tris = mesh.triangles();
  for (Eigen::Index t = 0; t < tris.rows(); ++t)
    for (int k = 0; k < 3; ++k) mass[tris(t, k)] += areas[t] / 3.0;
  return mass;
}

SparseMatrix bilaplacian(const SurfaceMesh& mesh) {
  const SparseMatrix lap = cotangent_laplacian(mesh);
  Eigen::VectorXd inv_mass = lumped_mass(mesh);
  for (Eigen::Index i = 0; i < inv_mass.size(); ++i) inv_mass[i] = inv_mass[i] > 0.0 ? 1.0 / inv_mass[i] : 0.0;
  SparseMatrix q = lap * inv_mass.asDiagonal() * lap;
  q = 0.5 * (q + SparseMatrix(q.transpose()));
  return q;
}

}  // namespace drape
