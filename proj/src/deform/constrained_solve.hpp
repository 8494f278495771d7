#pragma once

#include "deform/deform.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace drape::detail {

// Factorisation of a symmetric positive semi-definite system with a set of
// pinned rows eliminated: solves A_ff x_f = rhs_f - A_fb x_b.
class ConstrainedSolver {
 public:
  // `pinned` marks constrained vertices. Throws Singular naming a component
  // of the triangle graph that has no pinned vertex, or when the reduced
  // factorisation fails.
  ConstrainedSolver(const SparseMatrix& a, const SurfaceMesh& mesh, const std::vector<bool>& pinned);

  // `pinned_values` is full-size; only pinned rows are read. `rhs` may be
  // empty (treated as zero). Returns full-size positions.
  Points solve(const Points& pinned_values, const Points& rhs = {}) const;

 private:
  std::vector<int> free_, fixed_;
  SparseMatrix a_fb_;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
  Eigen::Index n_ = 0;
};

}  // namespace drape::detail
