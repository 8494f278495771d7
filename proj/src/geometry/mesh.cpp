#include "geometry/mesh.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace drape {

SurfaceMesh::SurfaceMesh(Points vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const int n = static_cast<int>(vertices_.rows());
  if (!vertices_.allFinite()) fail(ErrorCode::NonFinite, "mesh has non-finite vertex coordinates");
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Face& face = faces_[f];
    if (face.size != 3 && face.size != 4)
      fail(ErrorCode::InvalidArgument, "face " + std::to_string(f) + " has arity " + std::to_string(face.size));
    for (int k = 0; k < face.size; ++k) {
      if (face.v[k] < 0 || face.v[k] >= n)
        fail(ErrorCode::OutOfRange, "face " + std::to_string(f) + " references vertex " +
                                        std::to_string(face.v[k]) + " of " + std::to_string(n));
      for (int m = 0; m < k; ++m)
        if (face.v[m] == face.v[k])
          fail(ErrorCode::InvalidArgument, "face " + std::to_string(f) + " repeats vertex " + std::to_string(face.v[k]));
    }
  }
  triangulate(faces_, triangles_, triangle_face_);
}

SurfaceMesh SurfaceMesh::with_vertices(Points vertices) const {
  if (vertices.rows() != vertices_.rows())
    fail(ErrorCode::InvalidArgument, "vertex count mismatch: " + std::to_string(vertices.rows()) + " vs " +
                                         std::to_string(vertices_.rows()));
  SurfaceMesh out = *this;
  out.vertices_ = std::move(vertices);
  if (!out.vertices_.allFinite()) fail(ErrorCode::NonFinite, "mesh has non-finite vertex coordinates");
  return out;
}

bool SurfaceMesh::same_connectivity(const SurfaceMesh& other) const {
  return vertices_.rows() == other.vertices_.rows() && faces_ == other.faces_;
}

double SurfaceMesh::total_area() const { return triangle_areas(vertices_, triangles_).sum(); }

void triangulate(std::span<const Face> faces, Triangles& triangles, std::vector<int>& triangle_face) {
  std::size_t count = 0;
  for (const Face& f : faces) count += f.size == 4 ? 2 : 1;
  triangles.resize(static_cast<Eigen::Index>(count), 3);
  triangle_face.assign(count, 0);
  Eigen::Index t = 0;
  for (std::size_t fi = 0; fi < faces.size(); ++fi) {
    const Face& f = faces[fi];
    if (f.size == 3) {
      triangles.row(t) << f.v[0], f.v[1], f.v[2];
      triangle_face[static_cast<std::size_t>(t++)] = static_cast<int>(fi);
      continue;
    }
    const int k = static_cast<int>(std::min_element(f.v.begin(), f.v.begin() + 4) - f.v.begin());
    const int a = f.v[k], b = f.v[(k + 1) % 4], c = f.v[(k + 2) % 4], d = f.v[(k + 3) % 4];
    triangles.row(t) << a, b, c;
    triangle_face[static_cast<std::size_t>(t++)] = static_cast<int>(fi);
    triangles.row(t) << a, c, d;
    triangle_face[static_cast<std::size_t>(t++)] = static_cast<int>(fi);
  }
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

Eigen::VectorXd triangle_areas(const Points& vertices, const Triangles& triangles) {
  Eigen::VectorXd areas(triangles.rows());
  for (Eigen::Index t = 0; t < triangles.rows(); ++t)
    areas[t] = triangle_area(vertices.row(triangles(t, 0)).transpose(), vertices.row(triangles(t, 1)).transpose(),
                             vertices.row(triangles(t, 2)).transpose());
  return areas;
}

namespace {
int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}
}  // namespace

std::vector<int> connected_components(std::size_t vertex_count, const Triangles& triangles, int* count) {
  std::vector<int> parent(vertex_count);
  std::iota(parent.begin(), parent.end(), 0);
  for (Eigen::Index t = 0; t < triangles.rows(); ++t)
    for (int k = 1; k < 3; ++k) {
      const int a = find_root(parent, triangles(t, 0));
      const int b = find_root(parent, triangles(t, k));
      if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  std::vector<int> label(vertex_count, -1);
  int next = 0;
  for (std::size_t v = 0; v < vertex_count; ++v) {
    const int r = find_root(parent, static_cast<int>(v));
    if (label[static_cast<std::size_t>(r)] < 0) label[static_cast<std::size_t>(r)] = next++;
    label[v] = label[static_cast<std::size_t>(r)];
  }
  if (count) *count = next;
  return label;
}

}  // namespace drape
