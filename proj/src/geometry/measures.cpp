#include "geometry/measures.hpp"

#include "core/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace drape {

double corner_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u = b - a, v = c - a;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

CornerAngles corner_angles(const Points& vertices, const Triangles& triangles) {
  CornerAngles out;
  out.angle.resize(triangles.rows(), 3);
  out.degenerate.assign(static_cast<std::size_t>(triangles.rows()), false);
  for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
    const Vec3 p[3] = {vertices.row(triangles(t, 0)).transpose(), vertices.row(triangles(t, 1)).transpose(),
                       vertices.row(triangles(t, 2)).transpose()};
    for (int k = 0; k < 3; ++k) {
      const Vec3& a = p[k];
      const Vec3& b = p[(k + 1) % 3];
      const Vec3& c = p[(k + 2) % 3];
      if ((b - a).norm() == 0.0 || (c - a).norm() == 0.0) out.degenerate[static_cast<std::size_t>(t)] = true;
      out.angle(t, k) = corner_angle(a, b, c);
    }
  }
  return out;
}

CornerAngles corner_angles(const SurfaceMesh& mesh) { return corner_angles(mesh.vertices(), mesh.triangles()); }

LocalAreaDistribution vertex_triangle_incidence(std::size_t vertex_count, const Triangles& triangles) {
  LocalAreaDistribution d;
  d.offset.assign(vertex_count + 1, 0);
  for (Eigen::Index t = 0; t < triangles.rows(); ++t)
    for (int k = 0; k < 3; ++k) ++d.offset[static_cast<std::size_t>(triangles(t, k)) + 1];
  for (std::size_t v = 0; v < vertex_count; ++v) d.offset[v + 1] += d.offset[v];
  d.triangle.resize(static_cast<std::size_t>(d.offset.back()));
  std::vector<int> cursor(d.offset.begin(), d.offset.end() - 1);
  for (Eigen::Index t = 0; t < triangles.rows(); ++t)
    for (int k = 0; k < 3; ++k)
      d.triangle[static_cast<std::size_t>(cursor[static_cast<std::size_t>(triangles(t, k))]++)] = static_cast<int>(t);
  return d;
}

LocalAreaDistribution local_area_distribution(const Points& vertices, const Triangles& triangles) {
  LocalAreaDistribution d = vertex_triangle_incidence(static_cast<std::size_t>(vertices.rows()), triangles);
  const Eigen::VectorXd areas = triangle_areas(vertices, triangles);
  d.weight.resize(d.triangle.size());
  for (std::size_t v = 0; v + 1 < d.offset.size(); ++v) {
    const int begin = d.offset[v], end = d.offset[v + 1];
    if (begin == end) continue;
    double sum = 0.0;
    for (int j = begin; j < end; ++j) sum += areas[d.triangle[static_cast<std::size_t>(j)]];
    if (!(sum > 0.0)) {
      d.degenerate.push_back(static_cast<int>(v));
      for (int j = begin; j < end; ++j) d.weight[static_cast<std::size_t>(j)] = 1.0 / (end - begin);
      continue;
    }
    for (int j = begin; j < end; ++j)
      d.weight[static_cast<std::size_t>(j)] = areas[d.triangle[static_cast<std::size_t>(j)]] / sum;
  }
  return d;
}

LocalAreaDistribution local_area_distribution(const SurfaceMesh& mesh) {
  return local_area_distribution(mesh.vertices(), mesh.triangles());
}

double face_quality(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double denom = (b - a).squaredNorm() + (c - b).squaredNorm() + (a - c).squaredNorm();
  if (!(denom > 0.0)) return 0.0;
  const double q = 4.0 * std::sqrt(3.0) * triangle_area(a, b, c) / denom;
  return std::clamp(q, 0.0, 1.0);
}

namespace {

// 2x2 coordinates of the edge vectors (b-a, c-a) in an orthonormal frame of
// the triangle plane. Columns are the two edges.
bool local_frame_coords(const Vec3& a, const Vec3& b, const Vec3& c, Eigen::Matrix2d& out) {
  const Vec3 e1 = b - a, e2 = c - a;
  const double l1 = e1.norm();
  const Vec3 n = e1.cross(e2);
  if (l1 == 0.0 || n.norm() == 0.0) return false;
  const Vec3 x = e1 / l1;
  const Vec3 y = n.normalized().cross(x);
  out << l1, e2.dot(x), 0.0, e2.dot(y);
  return true;
}

}  // namespace

DirichletResult dirichlet_energy(const SurfaceMesh& source, const SurfaceMesh& deformed) {
  if (!source.same_connectivity(deformed))
    fail(ErrorCode::InvalidArgument, "dirichlet energy needs identical connectivity");
  const Triangles& tris = source.triangles();
  const Points& sv = source.vertices();
  const Points& dv = deformed.vertices();
  double weighted = 0.0, area_sum = 0.0;
  for (Eigen::Index t = 0; t < tris.rows(); ++t) {
    const Vec3 a = sv.row(tris(t, 0)).transpose(), b = sv.row(tris(t, 1)).transpose(),
               c = sv.row(tris(t, 2)).transpose();
    Eigen::Matrix2d rest;
    if (!local_frame_coords(a, b, c, rest))
      fail(ErrorCode::Degenerate, "source triangle " + std::to_string(t) + " is degenerate");
    // Image edges expressed in 3D; J = image * rest^{-1} has the same
    // Frobenius norm as its 2x2 form in the image's own frame.
    Eigen::Matrix<double, 3, 2> image;
    image.col(0) = dv.row(tris(t, 1)) - dv.row(tris(t, 0));
    image.col(1) = dv.row(tris(t, 2)) - dv.row(tris(t, 0));
    const Eigen::Matrix<double, 3, 2> jac = image * rest.inverse();
    const double area = 0.5 * std::abs(rest.determinant());
    weighted += jac.squaredNorm() * area;
    area_sum += area;
  }
  if (!(area_sum > 0.0)) fail(ErrorCode::Degenerate, "source mesh has zero area");
  DirichletResult r;
  r.energy = weighted / (2.0 * area_sum);
  r.distortion = r.energy - 1.0;
  return r;
}

double dirichlet_distortion(const SurfaceMesh& source, const SurfaceMesh& deformed) {
  return dirichlet_energy(source, deformed).distortion;
}

}  // namespace drape
