#pragma once

#include "core/error.hpp"
#include "core/random.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <vector>

namespace drape {

struct MlpShape {
  int input = 39;
  int hidden_layers = 4;
  int width = 256;
  int output = 3;
};

// Fully connected ReLU network with a linear output layer. All parameters
// live in one contiguous vector (per layer: weight matrix in x out,
// column-major, then bias) so the optimizer and gradient checks can treat
// them as a flat array.
//
// Hidden layers use the uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) scheme for
// weights and biases; the output layer starts at zero, so a fresh network
// predicts a zero offset field.
template <class Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using WeightMap = Eigen::Map<Matrix>;
  using ConstWeightMap = Eigen::Map<const Matrix>;
  using BiasMap = Eigen::Map<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>;
  using ConstBiasMap = Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>;

  // Activations recorded by forward() for the backward pass: layer inputs
  // (index 0 is the feature matrix, index l the post-ReLU output of
  // hidden layer l).
  struct Tape {
    std::vector<Matrix> inputs;
  };

  Mlp() = default;
  Mlp(MlpShape shape, std::uint64_t seed) : shape_(shape) {
    if (shape.input < 1 || shape.output < 1 || shape.hidden_layers < 0 || shape.width < 1)
      fail(ErrorCode::InvalidArgument, "invalid network shape");
    dims_.push_back(shape.input);
    for (int l = 0; l < shape.hidden_layers; ++l) dims_.push_back(shape.width);
    dims_.push_back(shape.output);
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      offsets_.push_back(total);
      total += static_cast<std::size_t>(dims_[l]) * dims_[l + 1] + dims_[l + 1];
    }
    params_ = Vector::Zero(static_cast<Eigen::Index>(total));
    Rng rng(seed);
    for (int l = 0; l + 1 < layer_count(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(dims_[static_cast<std::size_t>(l)]));
      auto w = weight(l);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
      auto b = bias(l);
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
    }
  }

  const MlpShape& shape() const { return shape_; }
  int layer_count() const { return static_cast<int>(dims_.size()) - 1; }
  Eigen::Index parameter_count() const { return params_.size(); }
  Vector& parameters() { return params_; }
  const Vector& parameters() const { return params_; }

  WeightMap weight(int l) {
    return WeightMap(params_.data() + offsets_[static_cast<std::size_t>(l)], dims_[static_cast<std::size_t>(l)],
                     dims_[static_cast<std::size_t>(l) + 1]);
  }
  ConstWeightMap weight(int l) const {
    return ConstWeightMap(params_.data() + offsets_[static_cast<std::size_t>(l)], dims_[static_cast<std::size_t>(l)],
                          dims_[static_cast<std::size_t>(l) + 1]);
  }
  BiasMap bias(int l) {
    const auto n = dims_[static_cast<std::size_t>(l)] * dims_[static_cast<std::size_t>(l) + 1];
    return BiasMap(params_.data() + offsets_[static_cast<std::size_t>(l)] + static_cast<std::size_t>(n),
                   dims_[static_cast<std::size_t>(l) + 1]);
  }
  ConstBiasMap bias(int l) const {
    const auto n = dims_[static_cast<std::size_t>(l)] * dims_[static_cast<std::size_t>(l) + 1];
    return ConstBiasMap(params_.data() + offsets_[static_cast<std::size_t>(l)] + static_cast<std::size_t>(n),
                        dims_[static_cast<std::size_t>(l) + 1]);
  }

  // features: one row per point. Returns one output row per point.
  Matrix forward(const Matrix& features, Tape* tape = nullptr) const {
    if (features.cols() != shape_.input) fail(ErrorCode::InvalidArgument, "feature width does not match network input");
    if (!features.allFinite()) fail(ErrorCode::NonFinite, "non-finite network input");
    if (!params_.allFinite()) fail(ErrorCode::NonFinite, "non-finite network parameter");
    if (tape) tape->inputs.assign(1, features);
    Matrix act = features;
    for (int l = 0; l < layer_count(); ++l) {
      Matrix z = act * weight(l);
      z.rowwise() += bias(l);
      if (l + 1 < layer_count()) {
        z = z.cwiseMax(Scalar(0));
        if (tape) tape->inputs.push_back(z);
      }
      act.swap(z);
    }
    return act;
  }

  // Gradient of sum(upstream .* output) with respect to the parameters,
  // using the activations recorded by forward().
  Vector backward(const Tape& tape, const Matrix& upstream) const {
    if (static_cast<int>(tape.inputs.size()) != layer_count())
      fail(ErrorCode::InvalidState, "backward called without a matching forward tape");
    Vector grad = Vector::Zero(params_.size());
    Matrix g = upstream;
    for (int l = layer_count() - 1; l >= 0; --l) {
      const Matrix& in = tape.inputs[static_cast<std::size_t>(l)];
      const std::size_t off = offsets_[static_cast<std::size_t>(l)];
      const Eigen::Index rows = dims_[static_cast<std::size_t>(l)], cols = dims_[static_cast<std::size_t>(l) + 1];
      WeightMap(grad.data() + off, rows, cols).noalias() = in.transpose() * g;
      BiasMap(grad.data() + off + static_cast<std::size_t>(rows * cols), cols) = g.colwise().sum();
      if (l == 0) break;
      Matrix next = g * weight(l).transpose();
      // ReLU derivative: the stored input is positive exactly where the
      // pre-activation was.
      next.array() *= (in.array() > Scalar(0)).template cast<Scalar>();
      g.swap(next);
    }
    return grad;
  }

 private:
  MlpShape shape_;
  std::vector<int> dims_;
  std::vector<std::size_t> offsets_;
  Vector params_;
};

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive-moment update with bias correction.
template <class Scalar>
class Adam {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Adam() = default;
  Adam(AdamConfig config, Eigen::Index parameter_count)
      : config_(config), m_(Vector::Zero(parameter_count)), v_(Vector::Zero(parameter_count)) {}

  const AdamConfig& config() const { return config_; }
  long step_count() const { return step_; }
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }

  // Throws NonFinite and leaves both parameters and state untouched when
  // the gradient has a NaN or infinity.
  void step(Vector& params, const Vector& grad) {
    if (grad.size() != params.size() || grad.size() != m_.size())
      fail(ErrorCode::InvalidArgument, "optimizer shape mismatch");
    if (!grad.allFinite()) fail(ErrorCode::NonFinite, "non-finite gradient");
    ++step_;
    const Scalar b1 = static_cast<Scalar>(config_.beta1), b2 = static_cast<Scalar>(config_.beta2);
    m_ = b1 * m_ + (Scalar(1) - b1) * grad;
    v_ = b2 * v_ + (Scalar(1) - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    const Scalar lr = static_cast<Scalar>(config_.learning_rate);
    const Scalar eps = static_cast<Scalar>(config_.epsilon);
    params.array() -= lr * (m_.array() / static_cast<Scalar>(c1)) /
                      ((v_.array() / static_cast<Scalar>(c2)).sqrt() + eps);
  }

  // Checkpoint restore.
  void restore(long step, Vector m, Vector v) {
    if (m.size() != m_.size() || v.size() != v_.size()) fail(ErrorCode::InvalidArgument, "optimizer state size mismatch");
    step_ = step;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  AdamConfig config_;
  long step_ = 0;
  Vector m_, v_;
};

}  // namespace drape
