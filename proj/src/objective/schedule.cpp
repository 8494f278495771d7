#include "objective/objective.hpp"

#include "core/error.hpp"

namespace drape {

void LossConfig::validate() const {
  if (chamfer_samples < 1) fail(ErrorCode::InvalidArgument, "loss.chamfer_samples must be >= 1");
  if (!(lambda_before > 0.0) || !(lambda_after > 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be positive");
  if (lambda_switch_iter < 0) fail(ErrorCode::InvalidArgument, "loss.lambda_switch_iter must be >= 0");
}

const char* to_string(StepLoss loss) { return loss == StepLoss::Distance ? "distance" : "structural"; }

double lambda_at(long t, const LossConfig& config) {
  return t < config.lambda_switch_iter ? config.lambda_before : config.lambda_after;
}

StepSelection select_step_loss(long t, const LossConfig& config) {
  if (t % 2 == 0) return {StepLoss::Distance, 1.0};
  return {StepLoss::Structural, lambda_at(t, config)};
}

}  // namespace drape
