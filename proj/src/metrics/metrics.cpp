#include "metrics/metrics.hpp"

#include "core/error.hpp"
#include "core/random.hpp"
#include "geometry/measures.hpp"
#include "geometry/normalize.hpp"
#include "geometry/point_index.hpp"

#include <json.hpp>

#include <cmath>

namespace drape {

void MetricConfig::validate() const {
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "tau must be positive");
  if (!(w_a > 0.0)) fail(ErrorCode::InvalidArgument, "w_a must be positive");
  if (samples < 1) fail(ErrorCode::InvalidArgument, "metric sample count must be >= 1");
}

double hausdorff(const Points& a, const Points& b) {
  if (a.rows() == 0 || b.rows() == 0) fail(ErrorCode::InvalidArgument, "hausdorff of an empty point set");
  const PointIndex ia(a), ib(b);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) worst = std::max(worst, ib.nearest(a.row(i).transpose()).squared_distance);
  for (Eigen::Index j = 0; j < b.rows(); ++j) worst = std::max(worst, ia.nearest(b.row(j).transpose()).squared_distance);
  return std::sqrt(worst);
}

SurfaceAlignment surface_alignment(const TargetShape& target, const SurfaceMesh& result, const MetricConfig& config) {
  config.validate();
  const TargetShape result_shape = TargetShape::from_mesh(result, config.dense_samples);
  const Points target_samples = target.sample(config.samples, mix_seed(config.seed, 1)).points;
  const Points result_samples = sample_surface(result, config.samples, mix_seed(config.seed, 2)).points;

  SurfaceAlignment out;
  double to_result = 0.0, to_target = 0.0, worst = 0.0;
  for (Eigen::Index i = 0; i < target_samples.rows(); ++i) {
    const double d = result_shape.nearest_point(target_samples.row(i).transpose()).distance;
    to_result += d * d;
    worst = std::max(worst, d);
  }
  for (Eigen::Index i = 0; i < result_samples.rows(); ++i) {
    const double d = target.nearest_point(result_samples.row(i).transpose()).distance;
    to_target += d * d;
    worst = std::max(worst, d);
  }
  const Points& rv = result.vertices();
  for (Eigen::Index i = 0; i < rv.rows(); ++i)
    worst = std::max(worst, target.nearest_point(rv.row(i).transpose()).distance);
  out.chamfer = to_result / static_cast<double>(target_samples.rows()) +
                to_target / static_cast<double>(result_samples.rows());
  out.hausdorff = worst;
  return out;
}

double alignment_measure(const TargetShape& target, const SurfaceMesh& result, const MetricConfig& config) {
  return config.w_a * surface_alignment(target, result, config).hausdorff;
}

namespace {
double q_from_sum(double sum, double tau) {
  if (sum < 1e-12) return 1.0;
  return 1.0 - std::exp(-tau / sum);
}
}  // namespace

double q_transfer(double f_d, double f_a, double tau) {
  if (f_d < 0.0 || f_a < 0.0) fail(ErrorCode::InvalidArgument, "q_transfer inputs must be non-negative");
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "tau must be positive");
  return q_from_sum(std::abs(f_d + f_a), tau);
}

TransferReport evaluate_transfer(const SurfaceMesh& source, const SurfaceMesh& result, const TargetShape& target,
                                 const MetricConfig& config) {
  config.validate();
  if (!source.same_connectivity(result))
    fail(ErrorCode::InvalidArgument, "source and result must have identical connectivity");
  const SurfaceMesh source_n = normalize_to_unit_cube(source);
  const SurfaceMesh result_n = normalize_to_unit_cube(result);
  const TargetShape target_n = target.transformed(fit_unit_cube(target.geometry().vertices()));

  TransferReport r;
  r.tau = config.tau;
  r.w_a = config.w_a;
  r.seed = config.seed;
  const SurfaceAlignment align = surface_alignment(target_n, result_n, config);
  r.chamfer = align.chamfer;
  r.hausdorff = align.hausdorff;
  const DirichletResult dir = dirichlet_energy(source_n, result_n);
  r.dirichlet = dir.distortion;
  r.dirichlet_energy = dir.energy;
  r.f_a = config.w_a * align.hausdorff;
  // A map that shrinks the surface has F_d < 0; the score uses the
  // magnitude of the sum as written.
  r.q_transfer = q_from_sum(std::abs(r.dirichlet + r.f_a), config.tau);
  return r;
}

std::string report_to_json(const TransferReport& r) {
  const nlohmann::json j = {{"chamfer", r.chamfer},     {"hausdorff", r.hausdorff},
                            {"dirichlet", r.dirichlet}, {"dirichlet_energy", r.dirichlet_energy},
                            {"f_a", r.f_a},             {"q_transfer", r.q_transfer},
                            {"tau", r.tau},             {"w_a", r.w_a},
                            {"seed", r.seed}};
  return j.dump(2);
}

TransferReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TransferReport r;
    r.chamfer = j.at("chamfer").get<double>();
    r.hausdorff = j.at("hausdorff").get<double>();
    r.dirichlet = j.at("dirichlet").get<double>();
    r.dirichlet_energy = j.value("dirichlet_energy", r.dirichlet + 1.0);
    r.f_a = j.at("f_a").get<double>();
    r.q_transfer = j.at("q_transfer").get<double>();
    r.tau = j.at("tau").get<double>();
    r.w_a = j.at("w_a").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("report: ") + e.what());
  }
}

}  // namespace drape
