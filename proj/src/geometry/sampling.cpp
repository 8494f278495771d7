#include "geometry/sampling.hpp"

#include "core/error.hpp"
#include "core/random.hpp"

#include <algorithm>
#include <cmath>

namespace drape {

PointSet sample_surface(const Points& vertices, const Triangles& triangles, std::size_t n, std::uint64_t seed) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "sample count must be positive");
  const Eigen::VectorXd areas = triangle_areas(vertices, triangles);
  std::vector<double> cumulative(static_cast<std::size_t>(areas.size()));
  double total = 0.0;
  for (Eigen::Index t = 0; t < areas.size(); ++t) {
    total += areas[t];
    cumulative[static_cast<std::size_t>(t)] = total;
  }
  if (!(total > 0.0)) fail(ErrorCode::Degenerate, "cannot sample a surface with zero total area");

  Rng rng(seed);
  PointSet out;
  out.points.resize(static_cast<Eigen::Index>(n), 3);
  out.barycentric.resize(static_cast<Eigen::Index>(n), 3);
  out.triangle.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    // Skip zero-area triangles that share the cumulative value.
    while (it != cumulative.begin() && areas[it - cumulative.begin()] == 0.0) --it;
    const int t = static_cast<int>(it - cumulative.begin());
    const double s = std::sqrt(rng.uniform());
    const double r = rng.uniform();
    const double b0 = 1.0 - s, b1 = s * (1.0 - r), b2 = s * r;
    const Eigen::Index row = static_cast<Eigen::Index>(i);
    out.triangle[i] = t;
    out.barycentric.row(row) << b0, b1, b2;
    out.points.row(row) = b0 * vertices.row(triangles(t, 0)) + b1 * vertices.row(triangles(t, 1)) +
                          b2 * vertices.row(triangles(t, 2));
  }
  return out;
}

PointSet sample_surface(const SurfaceMesh& mesh, std::size_t n, std::uint64_t seed) {
  return sample_surface(mesh.vertices(), mesh.triangles(), n, seed);
}

Points resample_positions(const PointSet& samples, const Points& vertices, const Triangles& triangles) {
  Points out(samples.points.rows(), 3);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const int t = samples.triangle[static_cast<std::size_t>(i)];
    out.row(i) = samples.barycentric(i, 0) * vertices.row(triangles(t, 0)) +
                 samples.barycentric(i, 1) * vertices.row(triangles(t, 1)) +
                 samples.barycentric(i, 2) * vertices.row(triangles(t, 2));
  }
  return out;
}

}  // namespace drape
