#include "objective/objective.hpp"

#include "core/error.hpp"

namespace drape {

DistanceLossValue distance_loss_with_samples(const Points& vertices, const Triangles& triangles,
                                             const PointSet& surface_samples, const Points& target_samples,
                                             const CorrespondenceSet& corr, const DistanceLossOptions& options,
                                             Points* grad) {
  DistanceLossValue value;
  if (options.chamfer) {
    if (!surface_samples.has_provenance()) fail(ErrorCode::InvalidArgument, "surface samples need provenance");
    const Points positions = resample_positions(surface_samples, vertices, triangles);
    const ChamferGradient ch = chamfer_with_gradient(positions, target_samples);
    value.chamfer = ch.value;
    if (grad)
      for (Eigen::Index s = 0; s < positions.rows(); ++s) {
        const int t = surface_samples.triangle[static_cast<std::size_t>(s)];
        for (int k = 0; k < 3; ++k) grad->row(triangles(t, k)) += surface_samples.barycentric(s, k) * ch.grad_a.row(s);
      }
  }
  if (options.correspondence) {
    corr.validate(static_cast<std::size_t>(vertices.rows()));
    for (const Correspondence& c : corr.pairs()) {
      const Vec3 r = vertices.row(c.source_vertex).transpose() - c.target_point;
      value.correspondence += r.squaredNorm();
      if (grad) grad->row(c.source_vertex) += 2.0 * r.transpose();
    }
  }
  value.total = value.chamfer + value.correspondence;
  return value;
}

DistanceLossValue distance_loss(const SurfaceMesh& current, const TargetShape& target, const CorrespondenceSet& corr,
                                const DistanceLossOptions& options, Points* grad) {
  if (grad && grad->rows() != current.vertices().rows()) *grad = Points::Zero(current.vertices().rows(), 3);
  PointSet surface, target_samples;
  if (options.chamfer) {
    surface = sample_surface(current, options.samples, options.seed);
    target_samples = target.sample(options.samples, options.seed);
  }
  return distance_loss_with_samples(current.vertices(), current.triangles(), surface, target_samples.points, corr,
                                    options, grad);
}

}  // namespace drape
