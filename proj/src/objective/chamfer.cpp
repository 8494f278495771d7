#include "objective/objective.hpp"

#include "core/error.hpp"
#include "geometry/point_index.hpp"

namespace drape {

double chamfer(const Points& a, const Points& b) {
  if (a.rows() == 0 || b.rows() == 0) fail(ErrorCode::InvalidArgument, "chamfer of an empty point set");
  const PointIndex ia(a), ib(b);
  double ab = 0.0, ba = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) ab += ib.nearest(a.row(i).transpose()).squared_distance;
  for (Eigen::Index j = 0; j < b.rows(); ++j) ba += ia.nearest(b.row(j).transpose()).squared_distance;
  return ab / static_cast<double>(a.rows()) + ba / static_cast<double>(b.rows());
}

double chamfer(const PointSet& a, const PointSet& b) { return chamfer(a.points, b.points); }

ChamferGradient chamfer_with_gradient(const Points& a, const Points& b) {
  if (a.rows() == 0 || b.rows() == 0) fail(ErrorCode::InvalidArgument, "chamfer of an empty point set");
  const PointIndex ia(a), ib(b);
  ChamferGradient out;
  out.grad_a = Points::Zero(a.rows(), 3);
  const double wa = 1.0 / static_cast<double>(a.rows()), wb = 1.0 / static_cast<double>(b.rows());
  double ab = 0.0, ba = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const NearestHit hit = ib.nearest(a.row(i).transpose());
    ab += hit.squared_distance;
    out.grad_a.row(i) += 2.0 * wa * (a.row(i) - b.row(hit.index));
  }
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    const NearestHit hit = ia.nearest(b.row(j).transpose());
    ba += hit.squared_distance;
    out.grad_a.row(hit.index) += 2.0 * wb * (a.row(hit.index) - b.row(j));
  }
  out.value = ab * wa + ba * wb;
  return out;
}

}  // namespace drape
