#include "deform/deform.hpp"

#include "core/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace drape {

namespace {
constexpr double kRankTolerance = 1e-8;
}

const char* to_string(AffineTransform::Model model) {
  switch (model) {
    case AffineTransform::Model::Identity: return "identity";
    case AffineTransform::Model::Translation: return "translation";
    case AffineTransform::Model::Similarity: return "similarity";
    case AffineTransform::Model::Affine: return "affine";
  }
  return "unknown";
}

Points AffineTransform::apply(const Points& p) const {
  Points out = p * linear.transpose();
  out.rowwise() += translation.transpose();
  return out;
}

AffineTransform estimate_global_affine(const Points& sources, const Points& targets) {
  if (sources.rows() != targets.rows()) fail(ErrorCode::InvalidArgument, "affine fit: point count mismatch");
  const Eigen::Index k = sources.rows();
  AffineTransform out;
  if (k == 0) return out;

  const Eigen::RowVector3d src_mean = sources.colwise().mean();
  const Eigen::RowVector3d dst_mean = targets.colwise().mean();
  const Eigen::MatrixX3d centered = sources.rowwise() - src_mean;
  const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::MatrixX3d>(centered).singularValues();
  const double spread = sv[0];

  if (k >= 4 && sv[2] > kRankTolerance * spread) {
    Eigen::MatrixXd design(k, 4);
    design << centered, Eigen::VectorXd::Ones(k);
    const Eigen::MatrixXd rhs = targets.rowwise() - dst_mean;
    const Eigen::Matrix<double, 4, 3> sol = design.colPivHouseholderQr().solve(rhs);
    out.linear = sol.topRows<3>().transpose();
    out.translation = dst_mean.transpose() + sol.row(3).transpose() - out.linear * src_mean.transpose();
    out.model = AffineTransform::Model::Affine;
    return out;
  }
  if (k >= 3 && sv[1] > kRankTolerance * spread) {
    const Eigen::Matrix3Xd src = sources.transpose();
    const Eigen::Matrix3Xd dst = targets.transpose();
    const Eigen::Matrix4d m = Eigen::umeyama(src, dst, true);
    out.linear = m.topLeftCorner<3, 3>();
    out.translation = m.topRightCorner<3, 1>();
    out.model = AffineTransform::Model::Similarity;
    return out;
  }
  out.translation = (dst_mean - src_mean).transpose();
  out.model = AffineTransform::Model::Translation;
  return out;
}

AffineTransform estimate_global_affine(const SurfaceMesh& mesh, const CorrespondenceSet& corr) {
  corr.validate(mesh.vertex_count());
  Points src(static_cast<Eigen::Index>(corr.size()), 3), dst(static_cast<Eigen::Index>(corr.size()), 3);
  for (std::size_t i = 0; i < corr.size(); ++i) {
    src.row(static_cast<Eigen::Index>(i)) = mesh.vertices().row(corr.pairs()[i].source_vertex);
    dst.row(static_cast<Eigen::Index>(i)) = corr.pairs()[i].target_point.transpose();
  }
  return estimate_global_affine(src, dst);
}

}  // namespace drape
