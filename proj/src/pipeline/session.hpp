#pragma once

#include "deform/correspondence.hpp"
#include "deform/deform.hpp"
#include "geometry/mesh.hpp"
#include "geometry/target_shape.hpp"
#include "metrics/metrics.hpp"
#include "neural/encoder.hpp"
#include "neural/mlp.hpp"
#include "objective/objective.hpp"
#include "pipeline/config.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace drape {

enum class SessionStatus { Idle, Running, Paused, Done, Failed, Cancelled };

const char* to_string(SessionStatus status);

struct Snapshot {
  long iteration = 0;
  Points vertices;  // target's original frame
  LossReport loss;
};

struct DrapeResult {
  SurfaceMesh mesh;  // target's original frame, source connectivity
  TransferReport report;
  bool partial = false;
};

// One draping optimization. Both shapes are scaled into the unit cube (each
// by its own transform, which places them in the shared working frame);
// correspondences are given in the target's original frame and snapped to
// the target on entry. Results are mapped back with the inverse of the
// target transform.
//
// Not thread-safe; callers that drive a session from several threads must
// serialize access.
class DrapeSession {
 public:
  // Prepares the session without computing the initial deformation; that
  // happens on set_correspondences() or on the first step.
  DrapeSession(SurfaceMesh source, TargetShape target, DrapeConfig config);
  // Prepares and initializes in one go.
  DrapeSession(SurfaceMesh source, TargetShape target, const CorrespondenceSet& corr, DrapeConfig config);

  DrapeSession(DrapeSession&&) noexcept;
  DrapeSession& operator=(DrapeSession&&) noexcept;
  ~DrapeSession();

  // Idle sessions only: replaces the pairs and recomputes the initial
  // deformation. Returns the preview in the target's original frame.
  Points set_correspondences(const CorrespondenceSet& corr);
  // Paused (or idle) sessions: replaces the pairs used by the distance
  // loss from the next step on. The network state is kept.
  void update_correspondences(const CorrespondenceSet& corr);

  void start();
  void pause();
  void resume();
  void cancel();

  // One optimization iteration. Allowed while idle, running or paused.
  LossReport step();
  // Steps while running until done or until `keep_going` returns false
  // (checked before each step). An idle session is started first.
  void run(const std::function<bool()>& keep_going = {});

  void on_snapshot(std::function<void(const Snapshot&)> callback);

  SessionStatus status() const;
  long iteration() const;
  bool initialized() const;
  const DrapeConfig& config() const;
  const std::vector<LossReport>& loss_history() const;

  const SurfaceMesh& source() const;  // original frame
  const TargetShape& target() const;  // original frame
  const SurfaceMesh& normalized_source() const;
  const TargetShape& normalized_target() const;
  const NormalizationTransform& source_transform() const;
  const NormalizationTransform& target_transform() const;
  // In the working frame, snapped.
  const CorrespondenceSet& correspondences() const;
  // Initial deformation in the working frame.
  const Points& initial_vertices() const;

  // Current deformed vertices, working frame / target's original frame.
  Points current_vertices() const;
  Points current_vertices_original() const;

  // Distance loss with a fixed evaluation sample seed plus
  // lambda(t) times the structural loss, at the current parameters.
  double total_loss() const;

  DrapeResult extract_result() const;

  void save_checkpoint(const std::filesystem::path& path) const;
  static DrapeSession load_checkpoint(const std::filesystem::path& path);

  // Network and optimizer state, exposed for checkpoint tests.
  const Mlp<float>& network() const;
  const Adam<float>& optimizer() const;

 private:
  struct State;
  explicit DrapeSession(std::unique_ptr<State> state);
  void ensure_initialized();
  std::unique_ptr<State> s_;
};

}  // namespace drape
