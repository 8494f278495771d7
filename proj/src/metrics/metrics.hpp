#pragma once

#include "geometry/mesh.hpp"
#include "geometry/target_shape.hpp"

#include <cstdint>
#include <string>

namespace drape {

struct MetricConfig {
  double tau = 5.0;
  double w_a = 100.0;
  std::size_t samples = 10000;  // per shape, for Chamfer and Hausdorff
  std::size_t dense_samples = kDefaultDenseSamples;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TransferReport {
  double chamfer = 0.0;
  double hausdorff = 0.0;
  double dirichlet = 0.0;         // F_d, zero for a distortion-free map
  double dirichlet_energy = 0.0;  // F_d + 1
  double f_a = 0.0;
  double q_transfer = 0.0;
  double tau = 5.0;
  double w_a = 100.0;
  std::uint64_t seed = 0;
};

// Symmetric point-set Hausdorff distance (unsquared).
double hausdorff(const Points& a, const Points& b);

struct SurfaceAlignment {
  double chamfer = 0.0;    // mean squared distance, both directions summed
  double hausdorff = 0.0;  // max distance over both directions
};

// Distances between a target and a result mesh, both assumed to be in the
// same (normalised) frame. Samples of each shape are measured against the
// other shape's canonical point set; the result's vertices join its
// samples for the Hausdorff term.
SurfaceAlignment surface_alignment(const TargetShape& target, const SurfaceMesh& result, const MetricConfig& config);

// w_a * Hausdorff(target, result).
double alignment_measure(const TargetShape& target, const SurfaceMesh& result, const MetricConfig& config);

// 1 - exp(-tau / |f_d + f_a|), 1 when the sum vanishes. Negative inputs
// are rejected.
double q_transfer(double f_d, double f_a, double tau);

// Normalises source, result and target to the unit cube independently and
// evaluates every metric on the normalised shapes.
TransferReport evaluate_transfer(const SurfaceMesh& source, const SurfaceMesh& result, const TargetShape& target,
                                 const MetricConfig& config = {});

std::string report_to_json(const TransferReport& report);
TransferReport report_from_json(const std::string& text);

}  // namespace drape
