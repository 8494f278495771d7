#pragma once

#include "deform/correspondence.hpp"
#include "geometry/mesh.hpp"
#include "geometry/measures.hpp"
#include "geometry/sampling.hpp"
#include "geometry/target_shape.hpp"

#include <cstdint>
#include <string>

namespace drape {

// ---- Chamfer ---------------------------------------------------------------

// Mean squared nearest-neighbour distance a->b plus the same b->a.
double chamfer(const Points& a, const Points& b);
double chamfer(const PointSet& a, const PointSet& b);

struct ChamferGradient {
  double value = 0.0;
  Points grad_a;  // d value / d a, one row per point of a; b is held fixed
};
ChamferGradient chamfer_with_gradient(const Points& a, const Points& b);

// ---- Distance loss -----------------------------------------------------------

struct DistanceLossValue {
  double chamfer = 0.0;
  double correspondence = 0.0;
  double total = 0.0;
};

struct DistanceLossOptions {
  std::size_t samples = 5000;  // per side
  std::uint64_t seed = 0;      // both sides are drawn from this seed
  bool chamfer = true;
  bool correspondence = true;
};

// Chamfer between samples of the current mesh and samples of the target,
// plus the squared residual of every correspondence pair. When `grad` is
// given, d total / d vertices is added into it (samples are held at fixed
// triangle/barycentric positions).
DistanceLossValue distance_loss(const SurfaceMesh& current, const TargetShape& target, const CorrespondenceSet& corr,
                                const DistanceLossOptions& options, Points* grad = nullptr);

// Same, with the sample sets supplied by the caller. `surface_samples` must
// carry provenance on `vertices`/`triangles`.
DistanceLossValue distance_loss_with_samples(const Points& vertices, const Triangles& triangles,
                                             const PointSet& surface_samples, const Points& target_samples,
                                             const CorrespondenceSet& corr, const DistanceLossOptions& options,
                                             Points* grad = nullptr);

// ---- Structural loss -----------------------------------------------------------

struct StructuralToggles {
  bool angle = true;
  bool area_kl = true;
  bool quality = true;
};

struct StructuralLossValue {
  double angle = 0.0;
  double area_kl = 0.0;
  double quality = 0.0;
  double total = 0.0;
};

inline constexpr double kQualityThreshold = 0.1;
inline constexpr double kAreaFloor = 1e-12;
inline constexpr double kEdgeFloor = 1e-9;

// Terms that compare a deformed copy against the fixed source mesh. The
// source angles and local area distributions are precomputed once. Each
// term method adds its gradient with respect to the deformed vertices into
// `grad` when non-null.
class StructuralLoss {
 public:
  explicit StructuralLoss(const SurfaceMesh& source, double quality_threshold = kQualityThreshold);

  // (1/N) sum_i sum_{corners c in 1-ring(i)} (angle_c - rest_angle_c)^2
  double angle_term(const Points& deformed, Points* grad = nullptr) const;
  // (1/N) sum_i KL(P_i || Q_i) over local area distributions.
  double area_kl_term(const Points& deformed, Points* grad = nullptr) const;
  // sum over triangles with quality < threshold of (1 - quality).
  double quality_penalty(const Points& deformed, Points* grad = nullptr) const;

  StructuralLossValue evaluate(const Points& deformed, const StructuralToggles& toggles = {},
                               Points* grad = nullptr) const;

  std::size_t vertex_count() const { return vertex_count_; }
  const Triangles& triangles() const { return triangles_; }

 private:
  std::size_t vertex_count_ = 0;
  Triangles triangles_;
  CornerAngles rest_angles_;
  LocalAreaDistribution rest_area_;
  double quality_threshold_;
};

double angle_term(const SurfaceMesh& source, const SurfaceMesh& deformed);
double area_kl_term(const SurfaceMesh& source, const SurfaceMesh& deformed);
double quality_penalty(const SurfaceMesh& deformed, double threshold = kQualityThreshold);
StructuralLossValue structural_loss(const SurfaceMesh& source, const SurfaceMesh& deformed,
                                    const StructuralToggles& toggles = {});

// ---- Alternation schedule -------------------------------------------------------

struct LossConfig {
  double lambda_before = 1.0;
  double lambda_after = 0.2;
  long lambda_switch_iter = 1000;
  std::size_t chamfer_samples = 5000;
  double quality_threshold = kQualityThreshold;
  bool angle = true;
  bool area_kl = true;
  bool quality = true;
  bool chamfer = true;
  bool correspondence = true;

  StructuralToggles structural() const { return {angle, area_kl, quality}; }
  void validate() const;
};

enum class StepLoss { Distance, Structural };
const char* to_string(StepLoss loss);

struct StepSelection {
  StepLoss loss = StepLoss::Distance;
  double weight = 1.0;
};

double lambda_at(long t, const LossConfig& config);
// Even iterations back-propagate the distance loss, odd ones lambda(t)
// times the structural loss.
StepSelection select_step_loss(long t, const LossConfig& config);

struct LossReport {
  long iteration = 0;
  StepLoss loss = StepLoss::Distance;
  double weight = 1.0;
  double chamfer = 0.0;
  double correspondence = 0.0;
  double angle = 0.0;
  double area_kl = 0.0;
  double quality = 0.0;
  double total = 0.0;  // weight * sum of the active terms of the step loss
};

}  // namespace drape
