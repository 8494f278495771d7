#pragma once

#include "geometry/mesh.hpp"

#include <cstdint>
#include <vector>

namespace drape {

// Points with optional provenance. When produced by surface sampling,
// `triangle` and `barycentric` record where each point came from so that
// its position can be re-evaluated (and differentiated) on a moved mesh.
struct PointSet {
  Points points;
  std::vector<int> triangle;
  Points barycentric;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  bool has_provenance() const { return !triangle.empty(); }
};

// n points, triangle chosen with probability proportional to its area and
// barycentric coordinates uniform within it. Deterministic in `seed`.
// Throws Degenerate on zero total area.
PointSet sample_surface(const Points& vertices, const Triangles& triangles, std::size_t n, std::uint64_t seed);
PointSet sample_surface(const SurfaceMesh& mesh, std::size_t n, std::uint64_t seed);

// Evaluates sample positions of `samples` on (possibly moved) `vertices`.
Points resample_positions(const PointSet& samples, const Points& vertices, const Triangles& triangles);

}  // namespace drape
