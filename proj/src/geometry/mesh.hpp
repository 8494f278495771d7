#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace drape {

using Vec3 = Eigen::Vector3d;
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Triangles = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

// A polygon with 3 or 4 vertex indices.
struct Face {
  std::array<int, 4> v{-1, -1, -1, -1};
  int size = 0;

  static Face tri(int a, int b, int c) { return Face{{a, b, c, -1}, 3}; }
  static Face quad(int a, int b, int c, int d) { return Face{{a, b, c, d}, 4}; }

  std::span<const int> indices() const { return {v.data(), static_cast<std::size_t>(size)}; }
  bool operator==(const Face&) const = default;
};

// Vertex positions plus tri/quad faces. Quads are split along the diagonal
// through their lowest-index vertex for every per-triangle computation; the
// face list itself is never modified.
//
// Connectivity is shared between copies produced by with_vertices(), so the
// optimized image of a mesh can be compared to its source cheaply.
class SurfaceMesh {
 public:
  SurfaceMesh() = default;
  // Validates indices and arity; throws Error on violation.
  SurfaceMesh(Points vertices, std::vector<Face> faces);

  const Points& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const Triangles& triangles() const { return triangles_; }
  // Face index in faces() that produced each triangle.
  const std::vector<int>& triangle_face() const { return triangle_face_; }

  std::size_t vertex_count() const { return static_cast<std::size_t>(vertices_.rows()); }
  std::size_t face_count() const { return faces_.size(); }
  std::size_t triangle_count() const { return static_cast<std::size_t>(triangles_.rows()); }
  bool empty() const { return vertices_.rows() == 0; }

  // Same faces, new positions. Throws if the row count differs.
  SurfaceMesh with_vertices(Points vertices) const;
  bool same_connectivity(const SurfaceMesh& other) const;

  double total_area() const;

 private:
  Points vertices_;
  std::vector<Face> faces_;
  Triangles triangles_;
  std::vector<int> triangle_face_;
};

// Splits faces into triangles with the lowest-index-diagonal rule.
void triangulate(std::span<const Face> faces, Triangles& triangles, std::vector<int>& triangle_face);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

// Per-triangle areas of `triangles` over positions `vertices`.
Eigen::VectorXd triangle_areas(const Points& vertices, const Triangles& triangles);

// Connected components over the triangle graph; isolated vertices form
// singleton components. Returns the component id per vertex.
std::vector<int> connected_components(std::size_t vertex_count, const Triangles& triangles, int* count);

}  // namespace drape
