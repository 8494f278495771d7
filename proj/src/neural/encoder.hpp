#pragma once

#include "geometry/mesh.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace drape {

enum class EncoderMode { Progressive, Static, None };

const char* to_string(EncoderMode mode);
EncoderMode parse_encoder_mode(const std::string& s);

struct EncoderConfig {
  EncoderMode mode = EncoderMode::Progressive;
  int blocks = 6;
  long reveal_iters = 1000;
};

// Positional encoding with per-block reveal masks. Block j carries
// sin/cos of 2^j * pi * p per coordinate, scaled by alpha_j(t); the raw
// coordinates are always passed through. Static mode is the progressive
// schedule with a zero reveal horizon; None passes raw coordinates only.
class ProgressiveEncoder {
 public:
  explicit ProgressiveEncoder(EncoderConfig config = {});

  const EncoderConfig& config() const { return config_; }
  int width() const { return config_.mode == EncoderMode::None ? 3 : 3 + 6 * config_.blocks; }
  double frequency(int block) const;
  long reveal_horizon() const { return config_.mode == EncoderMode::Static ? 0 : config_.reveal_iters; }

  // alpha_j(t) = clamp((t - j*r) / r, 0, 1) with r = horizon / blocks;
  // all ones once the horizon is 0.
  std::vector<double> masks(long t) const;

  // Row layout: [x y z | a0 sin(f0 x..z) | a0 cos(f0 x..z) | a1 sin ... ].
  Eigen::MatrixXd encode(const Points& positions, long t) const;

 private:
  EncoderConfig config_;
};

// Unmasked sin/cos table for a fixed point set, so that per-iteration
// encoding is a masked copy.
class EncodedPositions {
 public:
  EncodedPositions(const ProgressiveEncoder& encoder, const Points& positions);

  template <class Scalar>
  void features(long t, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& out) const {
    const std::vector<double> a = encoder_.masks(t);
    out.resize(table_.rows(), table_.cols());
    out.leftCols(3) = table_.leftCols(3).template cast<Scalar>();
    for (std::size_t j = 0; j < a.size(); ++j)
      out.middleCols(3 + 6 * static_cast<Eigen::Index>(j), 6) =
          (a[j] * table_.middleCols(3 + 6 * static_cast<Eigen::Index>(j), 6)).template cast<Scalar>();
  }

 private:
  ProgressiveEncoder encoder_;
  Eigen::MatrixXd table_;
};

}  // namespace drape
