#pragma once

// Internal layout of DrapeSession, shared by session.cpp and checkpoint.cpp.

#include "pipeline/session.hpp"

#include <memory>

namespace drape {

struct DrapeSession::State {
  State(SurfaceMesh source_in, TargetShape target_in, DrapeConfig config_in);

  DrapeConfig config;
  SurfaceMesh source;
  TargetShape target;
  NormalizationTransform source_t;
  NormalizationTransform target_t;
  SurfaceMesh source_n;
  TargetShape target_n;
  StructuralLoss structural;
  ProgressiveEncoder encoder;

  bool initialized = false;
  CorrespondenceSet corr;
  Points init;
  std::unique_ptr<EncodedPositions> encoded;

  Mlp<float> net;
  Adam<float> adam;

  long t = 0;
  SessionStatus status = SessionStatus::Idle;
  std::vector<LossReport> history;
  std::function<void(const Snapshot&)> snapshot_cb;

  void set_initial(Points vertices);
  CorrespondenceSet to_working_frame(const CorrespondenceSet& corr_in) const;
  Points forward(long at) const;
};

}  // namespace drape
