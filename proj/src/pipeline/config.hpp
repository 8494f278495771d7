#pragma once

#include "metrics/metrics.hpp"
#include "neural/encoder.hpp"
#include "neural/mlp.hpp"
#include "objective/objective.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace drape {

struct DrapeConfig {
  long iterations = 1500;
  std::uint64_t seed = 0;
  EncoderConfig encoder;
  int net_layers = 4;
  int net_width = 256;
  AdamConfig adam;
  LossConfig loss;
  int arap_iterations = 20;
  long snapshot_stride = 50;
  MetricConfig metrics;

  MlpShape network_shape() const;
  // Throws InvalidArgument on any out-of-range field.
  void validate() const;
};

// Sets one dotted key ("encoder.mode", "loss.lambda_after", ...) from its
// text form. Unknown keys are rejected.
void set_config_value(DrapeConfig& config, const std::string& key, const std::string& value);

// A JSON object (nested or with dotted keys) or `key = value` lines with
// `#` comments. Keys not present keep their defaults.
DrapeConfig parse_config(std::string_view text, DrapeConfig base = {});
DrapeConfig load_config(const std::filesystem::path& path, DrapeConfig base = {});
std::string format_config(const DrapeConfig& config);

}  // namespace drape
