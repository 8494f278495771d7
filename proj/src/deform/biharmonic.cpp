#include "deform/constrained_solve.hpp"
#include "core/error.hpp"

#include <algorithm>
#include <string>

namespace drape {

namespace detail {

ConstrainedSolver::ConstrainedSolver(const SparseMatrix& a, const SurfaceMesh& mesh, const std::vector<bool>& pinned)
    : n_(a.rows()) {
  int component_count = 0;
  const std::vector<int> component = connected_components(mesh.vertex_count(), mesh.triangles(), &component_count);
  std::vector<bool> anchored(static_cast<std::size_t>(component_count), false);
  for (std::size_t v = 0; v < pinned.size(); ++v)
    if (pinned[v]) anchored[static_cast<std::size_t>(component[v])] = true;
  for (int c = 0; c < component_count; ++c)
    if (!anchored[static_cast<std::size_t>(c)]) {
      const auto it = std::find(component.begin(), component.end(), c);
      fail(ErrorCode::Singular, "connected component " + std::to_string(c) + " (containing vertex " +
                                    std::to_string(it - component.begin()) + ") has no handle");
    }

  std::vector<int> slot(static_cast<std::size_t>(n_), -1);
  for (Eigen::Index v = 0; v < n_; ++v) {
    auto& list = pinned[static_cast<std::size_t>(v)] ? fixed_ : free_;
    slot[static_cast<std::size_t>(v)] = static_cast<int>(list.size());
    list.push_back(static_cast<int>(v));
  }
  std::vector<Eigen::Triplet<double>> ff, fb;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const auto r = static_cast<std::size_t>(it.row()), c = static_cast<std::size_t>(it.col());
      if (pinned[r]) continue;
      if (pinned[c])
        fb.emplace_back(slot[r], slot[c], it.value());
      else
        ff.emplace_back(slot[r], slot[c], it.value());
    }
  const auto nf = static_cast<Eigen::Index>(free_.size()), nb = static_cast<Eigen::Index>(fixed_.size());
  SparseMatrix a_ff(nf, nf);
  a_ff.setFromTriplets(ff.begin(), ff.end());
  a_fb_.resize(nf, nb);
  a_fb_.setFromTriplets(fb.begin(), fb.end());
  if (nf > 0) {
    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(a_ff);
    if (ldlt_->info() != Eigen::Success) fail(ErrorCode::Singular, "reduced system factorisation failed");
    const Eigen::VectorXd d = ldlt_->vectorD();
    if (!(d.minCoeff() > 1e-14 * std::max(1.0, d.cwiseAbs().maxCoeff())))
      fail(ErrorCode::Singular, "reduced system is not positive definite");
  }
}

Points ConstrainedSolver::solve(const Points& pinned_values, const Points& rhs) const {
  Points out = pinned_values;
  if (free_.empty()) return out;
  Eigen::MatrixX3d xb(static_cast<Eigen::Index>(fixed_.size()), 3);
  for (std::size_t i = 0; i < fixed_.size(); ++i) xb.row(static_cast<Eigen::Index>(i)) = pinned_values.row(fixed_[i]);
  Eigen::MatrixX3d b = -(a_fb_ * xb);
  if (rhs.rows() > 0)
    for (std::size_t i = 0; i < free_.size(); ++i) b.row(static_cast<Eigen::Index>(i)) += rhs.row(free_[i]);
  const Eigen::MatrixX3d xf = ldlt_->solve(b);
  if (ldlt_->info() != Eigen::Success || !xf.allFinite()) fail(ErrorCode::Singular, "reduced solve failed");
  for (std::size_t i = 0; i < free_.size(); ++i) out.row(free_[i]) = xf.row(static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace detail

Points biharmonic_deform(const SurfaceMesh& mesh, const CorrespondenceSet& handles, const AffineTransform& prealign) {
  if (handles.empty()) fail(ErrorCode::InvalidArgument, "biharmonic deformation needs at least one handle");
  handles.validate(mesh.vertex_count());
  const Points aligned = prealign.apply(mesh.vertices());

  std::vector<bool> pinned(mesh.vertex_count(), false);
  Points boundary = Points::Zero(aligned.rows(), 3);
  for (const Correspondence& c : handles.pairs()) {
    pinned[static_cast<std::size_t>(c.source_vertex)] = true;
    boundary.row(c.source_vertex) = c.target_point.transpose() - aligned.row(c.source_vertex);
  }
  const detail::ConstrainedSolver solver(bilaplacian(mesh), mesh, pinned);
  Points out = aligned + solver.solve(boundary);
  // Pin exactly; the sum above can be off by one ulp.
  for (const Correspondence& c : handles.pairs()) out.row(c.source_vertex) = c.target_point.transpose();
  return out;
}

}  // namespace drape
