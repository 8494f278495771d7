#pragma once

#include "deform/correspondence.hpp"
#include "geometry/mesh.hpp"
#include "geometry/target_shape.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace drape {

using SparseMatrix = Eigen::SparseMatrix<double>;

// x -> linear * x + translation, tagged with the model order that the
// number and spread of correspondences allowed.
struct AffineTransform {
  enum class Model { Identity, Translation, Similarity, Affine };

  Eigen::Matrix3d linear = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();
  Model model = Model::Identity;

  Vec3 apply(const Vec3& p) const { return linear * p + translation; }
  Points apply(const Points& p) const;
};

const char* to_string(AffineTransform::Model model);

// Least-squares fit of targets ~ A * sources + t (rows are points).
// >=4 non-coplanar points: full affine; >=3 non-collinear: similarity;
// >=1: centroid translation; none: identity.
AffineTransform estimate_global_affine(const Points& sources, const Points& targets);
AffineTransform estimate_global_affine(const SurfaceMesh& mesh, const CorrespondenceSet& corr);

inline constexpr double kCotangentClamp = 1e4;

// Cotangent Laplacian of the triangulated view: off-diagonal
// (cot a + cot b) / 2 per edge, diagonal minus the row sum, so rows sum to
// zero and the matrix is negative semi-definite. Throws Degenerate naming
// the first zero-area triangle.
SparseMatrix cotangent_laplacian(const SurfaceMesh& mesh);

// Lumped (barycentric) vertex areas.
Eigen::VectorXd lumped_mass(const SurfaceMesh& mesh);

// L M^{-1} L, the operator whose null space with fixed handle values is the
// biharmonic interpolant.
SparseMatrix bilaplacian(const SurfaceMesh& mesh);

// Solves the bi-Laplacian system for a displacement field that takes the
// value u_i - prealign(v_i) at each handle vertex and returns
// prealign(mesh) + displacement. Handle vertices land exactly on u_i.
// Throws Singular naming any connected component without a handle.
Points biharmonic_deform(const SurfaceMesh& mesh, const CorrespondenceSet& handles,
                         const AffineTransform& prealign = {});

struct ArapResult {
  Points vertices;
  // energy[0] is the energy of the initial guess, energy[i] after iteration i.
  std::vector<double> energy;
};

// Local-global as-rigid-as-possible deformation of `rest` with the handle
// vertices pinned to their targets. Without an initial guess the solver
// starts from a prealigned biharmonic interpolation of the handles.
ArapResult arap_deform(const SurfaceMesh& rest, const CorrespondenceSet& handles, int iterations,
                       const Points* initial_guess = nullptr);

// Spoke energy sum_i sum_j w_ij |(p'_i - p'_j) - R_i (p_i - p_j)|^2 with each
// R_i the optimal rotation for the current positions.
double arap_energy(const SurfaceMesh& rest, const Points& deformed);

struct InitialDeformation {
  Points vertices;
  AffineTransform affine;
  CorrespondenceSet correspondences;  // snapped to the target
};

// Global affine -> biharmonic over all pairs (skipped when there are none)
// -> ARAP over rigid pairs (skipped when there are none). `mesh` and
// `target` must share a frame.
InitialDeformation initial_deformation(const SurfaceMesh& mesh, const TargetShape& target,
                                       const CorrespondenceSet& corr, int arap_iterations = 20);

}  // namespace drape
