#include "neural/encoder.hpp"

#include "core/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace drape {

const char* to_string(EncoderMode mode) {
  switch (mode) {
    case EncoderMode::Progressive: return "progressive";
    case EncoderMode::Static: return "static";
    case EncoderMode::None: return "none";
  }
  return "unknown";
}

EncoderMode parse_encoder_mode(const std::string& s) {
  if (s == "progressive") return EncoderMode::Progressive;
  if (s == "static") return EncoderMode::Static;
  if (s == "none") return EncoderMode::None;
  fail(ErrorCode::InvalidArgument, "unknown encoder mode '" + s + "'");
}

ProgressiveEncoder::ProgressiveEncoder(EncoderConfig config) : config_(config) {
  if (config_.blocks < 0) fail(ErrorCode::InvalidArgument, "encoder block count must be non-negative");
  if (config_.reveal_iters < 0) fail(ErrorCode::InvalidArgument, "encoder reveal horizon must be non-negative");
}

double ProgressiveEncoder::frequency(int block) const { return std::ldexp(std::numbers::pi, block); }

std::vector<double> ProgressiveEncoder::masks(long t) const {
  if (config_.mode == EncoderMode::None) return {};
  std::vector<double> a(static_cast<std::size_t>(config_.blocks), 1.0);
  const long horizon = reveal_horizon();
  if (horizon == 0) return a;
  const double ramp = static_cast<double>(horizon) / config_.blocks;
  for (int j = 0; j < config_.blocks; ++j)
    a[static_cast<std::size_t>(j)] = std::clamp((static_cast<double>(t) - j * ramp) / ramp, 0.0, 1.0);
  return a;
}

Eigen::MatrixXd ProgressiveEncoder::encode(const Points& positions, long t) const {
  Eigen::MatrixXd out;
  EncodedPositions(*this, positions).features(t, out);
  return out;
}

EncodedPositions::EncodedPositions(const ProgressiveEncoder& encoder, const Points& positions)
    : encoder_(encoder), table_(positions.rows(), encoder.width()) {
  table_.leftCols(3) = positions;
  if (encoder.config().mode == EncoderMode::None) return;
  for (int j = 0; j < encoder.config().blocks; ++j) {
    const double f = encoder.frequency(j);
    const Eigen::Index c = 3 + 6 * j;
    table_.middleCols(c, 3) = (f * positions.array()).sin().matrix();
    table_.middleCols(c + 3, 3) = (f * positions.array()).cos().matrix();
  }
}

}  // namespace drape
