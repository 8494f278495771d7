#include "objective/objective.hpp"

#include "core/error.hpp"

#include <cmath>

namespace drape {

namespace {

inline Vec3 row(const Points& p, int i) { return p.row(i).transpose(); }

// d angle(a; b, c) / d{a, b, c}; zero when the corner is degenerate.
void corner_angle_gradient(const Vec3& a, const Vec3& b, const Vec3& c, Vec3& ga, Vec3& gb, Vec3& gc) {
  const Vec3 u = b - a, v = c - a;
  const Vec3 n = u.cross(v);
  const double lu = u.norm(), lv = v.norm(), ln = n.norm();
  if (lu < kEdgeFloor || lv < kEdgeFloor || ln < kEdgeFloor * kEdgeFloor) {
    ga.setZero();
    gb.setZero();
    gc.setZero();
    return;
  }
  gb = -n.cross(u) / (ln * lu * lu);
  gc = n.cross(v) / (ln * lv * lv);
  ga = -(gb + gc);
}

double floored_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u = b - a, v = c - a;
  if (u.norm() < kEdgeFloor || v.norm() < kEdgeFloor) return 0.0;
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

// d area / d{a, b, c}.
void area_gradient(const Vec3& a, const Vec3& b, const Vec3& c, Vec3& ga, Vec3& gb, Vec3& gc) {
  const Vec3 n = (b - a).cross(c - a);
  const double ln = n.norm();
  if (ln == 0.0) {
    ga.setZero();
    gb.setZero();
    gc.setZero();
    return;
  }
  const Vec3 nh = n / ln;
  ga = 0.5 * nh.cross(c - b);
  gb = 0.5 * nh.cross(a - c);
  gc = 0.5 * nh.cross(b - a);
}

}  // namespace

StructuralLoss::StructuralLoss(const SurfaceMesh& source, double quality_threshold)
    : vertex_count_(source.vertex_count()),
      triangles_(source.triangles()),
      rest_angles_(corner_angles(source)),
      rest_area_(local_area_distribution(source)),
      quality_threshold_(quality_threshold) {}

double StructuralLoss::angle_term(const Points& deformed, Points* grad) const {
  if (static_cast<std::size_t>(deformed.rows()) != vertex_count_)
    fail(ErrorCode::InvalidArgument, "angle term: vertex count mismatch");
  const Eigen::Index nt = triangles_.rows();
  // Per-triangle corner residuals; a triangle appears in the 1-ring of each
  // of its vertices, so its squared residual sum is counted once per ring.
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> residual(nt, 3);
  for (Eigen::Index t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      const Vec3 a = row(deformed, triangles_(t, k)), b = row(deformed, triangles_(t, (k + 1) % 3)),
                 c = row(deformed, triangles_(t, (k + 2) % 3));
      residual(t, k) = floored_angle(a, b, c) - rest_angles_.angle(t, k);
    }
  std::vector<int> ring_count(static_cast<std::size_t>(nt), 0);
  for (std::size_t v = 0; v < vertex_count_; ++v)
    for (int s = rest_area_.offset[v]; s < rest_area_.offset[v + 1]; ++s)
      ++ring_count[static_cast<std::size_t>(rest_area_.triangle[static_cast<std::size_t>(s)])];

  const double inv_n = vertex_count_ ? 1.0 / static_cast<double>(vertex_count_) : 0.0;
  double value = 0.0;
  for (Eigen::Index t = 0; t < nt; ++t) {
    const double mult = ring_count[static_cast<std::size_t>(t)] * inv_n;
    value += mult * residual.row(t).squaredNorm();
    if (!grad) continue;
    for (int k = 0; k < 3; ++k) {
      const int ia = triangles_(t, k), ib = triangles_(t, (k + 1) % 3), ic = triangles_(t, (k + 2) % 3);
      Vec3 ga, gb, gc;
      corner_angle_gradient(row(deformed, ia), row(deformed, ib), row(deformed, ic), ga, gb, gc);
      const double w = 2.0 * mult * residual(t, k);
      grad->row(ia) += w * ga.transpose();
      grad->row(ib) += w * gb.transpose();
      grad->row(ic) += w * gc.transpose();
    }
  }
  return value;
}

double StructuralLoss::area_kl_term(const Points& deformed, Points* grad) const {
  if (static_cast<std::size_t>(deformed.rows()) != vertex_count_)
    fail(ErrorCode::InvalidArgument, "area term: vertex count mismatch");
  const Eigen::VectorXd areas = triangle_areas(deformed, triangles_);
  Eigen::VectorXd area_grad;  // d value / d area_t
  if (grad) area_grad = Eigen::VectorXd::Zero(areas.size());

  const double inv_n = vertex_count_ ? 1.0 / static_cast<double>(vertex_count_) : 0.0;
  double value = 0.0;
  for (std::size_t v = 0; v < vertex_count_; ++v) {
    const int begin = rest_area_.offset[v], end = rest_area_.offset[v + 1];
    if (begin == end) continue;
    double sum = 0.0;
    for (int s = begin; s < end; ++s) sum += areas[rest_area_.triangle[static_cast<std::size_t>(s)]];
    double kl = 0.0, live_mass = 0.0;
    for (int s = begin; s < end; ++s) {
      const double p = rest_area_.weight[static_cast<std::size_t>(s)];
      if (p <= 0.0) continue;
      const int t = rest_area_.triangle[static_cast<std::size_t>(s)];
      const double q = sum > 0.0 ? areas[t] / sum : 0.0;
      if (q >= kAreaFloor) {
        kl += p * std::log(p / q);
        live_mass += p;
        if (grad) area_grad[t] -= inv_n * p / areas[t];
      } else {
        kl += p * std::log(p / kAreaFloor);
      }
    }
    value += inv_n * kl;
    if (grad && sum > 0.0)
      for (int s = begin; s < end; ++s)
        area_grad[rest_area_.triangle[static_cast<std::size_t>(s)]] += inv_n * live_mass / sum;
  }
  if (grad)
    for (Eigen::Index t = 0; t < triangles_.rows(); ++t) {
      if (area_grad[t] == 0.0) continue;
      Vec3 ga, gb, gc;
      area_gradient(row(deformed, triangles_(t, 0)), row(deformed, triangles_(t, 1)), row(deformed, triangles_(t, 2)),
                    ga, gb, gc);
      grad->row(triangles_(t, 0)) += area_grad[t] * ga.transpose();
      grad->row(triangles_(t, 1)) += area_grad[t] * gb.transpose();
      grad->row(triangles_(t, 2)) += area_grad[t] * gc.transpose();
    }
  return value;
}

double StructuralLoss::quality_penalty(const Points& deformed, Points* grad) const {
  if (static_cast<std::size_t>(deformed.rows()) != vertex_count_)
    fail(ErrorCode::InvalidArgument, "quality penalty: vertex count mismatch");
  const double k4r3 = 4.0 * std::sqrt(3.0);
  double value = 0.0;
  for (Eigen::Index t = 0; t < triangles_.rows(); ++t) {
    const Vec3 a = row(deformed, triangles_(t, 0)), b = row(deformed, triangles_(t, 1)), c = row(deformed, triangles_(t, 2));
    const double q = face_quality(a, b, c);
    if (!(q < quality_threshold_)) continue;
    value += 1.0 - q;
    if (!grad) continue;
    const double s = (b - a).squaredNorm() + (c - b).squaredNorm() + (a - c).squaredNorm();
    if (!(s > 0.0)) continue;
    const double area = triangle_area(a, b, c);
    Vec3 ga, gb, gc;
    area_gradient(a, b, c, ga, gb, gc);
    // d(1 - Q) = -4 sqrt(3) (dA / S - A dS / S^2), dS/da = 2 (2a - b - c).
    const double fa = -k4r3 / s, fs = k4r3 * area / (s * s);
    grad->row(triangles_(t, 0)) += (fa * ga + fs * 2.0 * (2.0 * a - b - c)).transpose();
    grad->row(triangles_(t, 1)) += (fa * gb + fs * 2.0 * (2.0 * b - c - a)).transpose();
    grad->row(triangles_(t, 2)) += (fa * gc + fs * 2.0 * (2.0 * c - a - b)).transpose();
  }
  return value;
}

StructuralLossValue StructuralLoss::evaluate(const Points& deformed, const StructuralToggles& toggles,
                                             Points* grad) const {
  if (grad && grad->rows() != deformed.rows()) *grad = Points::Zero(deformed.rows(), 3);
  StructuralLossValue v;
  if (toggles.angle) v.angle = angle_term(deformed, grad);
  if (toggles.area_kl) v.area_kl = area_kl_term(deformed, grad);
  if (toggles.quality) v.quality = quality_penalty(deformed, grad);
  v.total = v.angle + v.area_kl + v.quality;
  return v;
}

namespace {
void require_same(const SurfaceMesh& a, const SurfaceMesh& b) {
  if (!a.same_connectivity(b)) fail(ErrorCode::InvalidArgument, "structural loss needs identical connectivity");
}
}  // namespace

double angle_term(const SurfaceMesh& source, const SurfaceMesh& deformed) {
  require_same(source, deformed);
  return StructuralLoss(source).angle_term(deformed.vertices());
}

double area_kl_term(const SurfaceMesh& source, const SurfaceMesh& deformed) {
  require_same(source, deformed);
  return StructuralLoss(source).area_kl_term(deformed.vertices());
}

double quality_penalty(const SurfaceMesh& deformed, double threshold) {
  return StructuralLoss(deformed, threshold).quality_penalty(deformed.vertices());
}

StructuralLossValue structural_loss(const SurfaceMesh& source, const SurfaceMesh& deformed,
                                    const StructuralToggles& toggles) {
  require_same(source, deformed);
  return StructuralLoss(source).evaluate(deformed.vertices(), toggles);
}

}  // namespace drape
