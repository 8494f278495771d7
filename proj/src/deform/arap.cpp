#include "deform/constrained_solve.hpp"

#include "core/error.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace drape {

namespace {

// Symmetric neighbour lists with cotangent edge weights, read off the
// Laplacian's off-diagonal entries.
struct SpokeGraph {
  std::vector<int> offset;
  std::vector<int> neighbour;
  std::vector<double> weight;
};

SpokeGraph spokes_from(const SparseMatrix& lap) {
  SpokeGraph g;
  const Eigen::Index n = lap.rows();
  g.offset.assign(static_cast<std::size_t>(n) + 1, 0);
  // Column-major and symmetric: column k lists the neighbours of k.
  for (Eigen::Index k = 0; k < n; ++k) {
    for (SparseMatrix::InnerIterator it(lap, k); it; ++it)
      if (it.row() != k) {
        g.neighbour.push_back(static_cast<int>(it.row()));
        g.weight.push_back(it.value());
      }
    g.offset[static_cast<std::size_t>(k) + 1] = static_cast<int>(g.neighbour.size());
  }
  return g;
}

Eigen::Matrix3d fit_rotation(const Eigen::Matrix3d& covariance) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(covariance, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d r = v * u.transpose();
  if (r.determinant() < 0) {
    u.col(2) *= -1.0;  // smallest singular value
    r = v * u.transpose();
  }
  return r;
}

std::vector<Eigen::Matrix3d> local_step(const SpokeGraph& g, const Points& rest, const Points& cur) {
  const std::size_t n = g.offset.size() - 1;
  std::vector<Eigen::Matrix3d> rot(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int s = g.offset[i]; s < g.offset[i + 1]; ++s) {
      const int j = g.neighbour[static_cast<std::size_t>(s)];
      const Vec3 e = (rest.row(static_cast<Eigen::Index>(i)) - rest.row(j)).transpose();
      const Vec3 e2 = (cur.row(static_cast<Eigen::Index>(i)) - cur.row(j)).transpose();
      cov += g.weight[static_cast<std::size_t>(s)] * e * e2.transpose();
    }
    rot[i] = fit_rotation(cov);
  }
  return rot;
}

double energy_with(const SpokeGraph& g, const Points& rest, const Points& cur, const std::vector<Eigen::Matrix3d>& rot) {
  double e = 0.0;
  for (std::size_t i = 0; i + 1 < g.offset.size(); ++i)
    for (int s = g.offset[i]; s < g.offset[i + 1]; ++s) {
      const int j = g.neighbour[static_cast<std::size_t>(s)];
      const Vec3 d = (cur.row(static_cast<Eigen::Index>(i)) - cur.row(j)).transpose() -
                     rot[i] * (rest.row(static_cast<Eigen::Index>(i)) - rest.row(j)).transpose();
      e += g.weight[static_cast<std::size_t>(s)] * d.squaredNorm();
    }
  return e;
}

}  // namespace

double arap_energy(const SurfaceMesh& rest, const Points& deformed) {
  const SpokeGraph g = spokes_from(cotangent_laplacian(rest));
  return energy_with(g, rest.vertices(), deformed, local_step(g, rest.vertices(), deformed));
}

ArapResult arap_deform(const SurfaceMesh& rest, const CorrespondenceSet& handles, int iterations,
                       const Points* initial_guess) {
  if (handles.empty()) fail(ErrorCode::InvalidArgument, "ARAP needs at least one handle");
  if (iterations < 1) fail(ErrorCode::InvalidArgument, "ARAP needs at least one iteration");
  handles.validate(rest.vertex_count());

  const Points& p = rest.vertices();
  Points cur;
  if (initial_guess) {
    if (initial_guess->rows() != p.rows()) fail(ErrorCode::InvalidArgument, "ARAP initial guess has wrong size");
    cur = *initial_guess;
  } else {
    cur = biharmonic_deform(rest, handles, estimate_global_affine(rest, handles));
  }
  std::vector<bool> pinned(rest.vertex_count(), false);
  for (const Correspondence& c : handles.pairs()) {
    pinned[static_cast<std::size_t>(c.source_vertex)] = true;
    cur.row(c.source_vertex) = c.target_point.transpose();
  }

  const SparseMatrix lap = cotangent_laplacian(rest);
  const SpokeGraph g = spokes_from(lap);
  const SparseMatrix system = -lap;
  const detail::ConstrainedSolver solver(system, rest, pinned);

  ArapResult result;
  std::vector<Eigen::Matrix3d> rot = local_step(g, p, cur);
  result.energy.push_back(energy_with(g, p, cur, rot));
  const std::size_t n = rest.vertex_count();
  for (int it = 0; it < iterations; ++it) {
    // Global step: sum_j w_ij (x_i - x_j) = sum_j w_ij/2 (R_i + R_j)(p_i - p_j).
    Points rhs = Points::Zero(p.rows(), 3);
    for (std::size_t i = 0; i < n; ++i)
      for (int s = g.offset[i]; s < g.offset[i + 1]; ++s) {
        const int j = g.neighbour[static_cast<std::size_t>(s)];
        const Vec3 e = (p.row(static_cast<Eigen::Index>(i)) - p.row(j)).transpose();
        rhs.row(static_cast<Eigen::Index>(i)) +=
            (0.5 * g.weight[static_cast<std::size_t>(s)] * (rot[i] + rot[static_cast<std::size_t>(j)]) * e).transpose();
      }
    cur = solver.solve(cur, rhs);
    rot = local_step(g, p, cur);
    result.energy.push_back(energy_with(g, p, cur, rot));
  }
  for (const Correspondence& c : handles.pairs()) cur.row(c.source_vertex) = c.target_point.transpose();
  result.vertices = std::move(cur);
  return result;
}

}  // namespace drape
