#include "pipeline/session.hpp"

#include "core/error.hpp"
#include "core/random.hpp"
#include "geometry/normalize.hpp"
#include "pipeline/session_state.hpp"

#include <cmath>

namespace drape {

namespace {
constexpr std::uint64_t kNetworkSalt = 0x6e6574ull;
constexpr std::uint64_t kEvalSalt = 0x6576616cull;

void require_nonempty(const SurfaceMesh& source, const TargetShape& target) {
  if (source.vertex_count() == 0 || source.triangle_count() == 0)
    fail(ErrorCode::InvalidArgument, "source mesh is empty");
  if (target.geometry().vertex_count() == 0) fail(ErrorCode::InvalidArgument, "target is empty");
}

const SurfaceMesh& checked_source(const SurfaceMesh& source, const TargetShape& target) {
  require_nonempty(source, target);
  return source;
}
}  // namespace

const char* to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::Idle: return "idle";
    case SessionStatus::Running: return "running";
    case SessionStatus::Paused: return "paused";
    case SessionStatus::Done: return "done";
    case SessionStatus::Failed: return "failed";
    case SessionStatus::Cancelled: return "cancelled";
  }
  return "unknown";
}

DrapeSession::State::State(SurfaceMesh source_in, TargetShape target_in, DrapeConfig config_in)
    : config((config_in.validate(), config_in)),
      source(checked_source(source_in, target_in)),
      target(std::move(target_in)),
      source_t(fit_unit_cube(source.vertices())),
      target_t(fit_unit_cube(target.geometry().vertices())),
      source_n(transform_mesh(source, source_t)),
      target_n(target.transformed(target_t)),
      structural(source_n, config.loss.quality_threshold),
      encoder(config.encoder),
      net(config.network_shape(), mix_seed(config.seed, kNetworkSalt)),
      adam(config.adam, net.parameter_count()) {}

void DrapeSession::State::set_initial(Points vertices) {
  init = std::move(vertices);
  encoded = std::make_unique<EncodedPositions>(encoder, init);
  initialized = true;
}

CorrespondenceSet DrapeSession::State::to_working_frame(const CorrespondenceSet& corr_in) const {
  corr_in.validate(source.vertex_count());
  return corr_in.transformed(target_t).snapped(target_n);
}

Points DrapeSession::State::forward(long at) const {
  Eigen::MatrixXf features;
  encoded->features<float>(std::min(at, config.iterations), features);
  const Eigen::MatrixXf out = net.forward(features);
  return init + out.cast<double>();
}

DrapeSession::DrapeSession(SurfaceMesh source, TargetShape target, DrapeConfig config)
    : s_(std::make_unique<State>(std::move(source), std::move(target), std::move(config))) {}

DrapeSession::DrapeSession(SurfaceMesh source, TargetShape target, const CorrespondenceSet& corr, DrapeConfig config)
    : DrapeSession(std::move(source), std::move(target), std::move(config)) {
  set_correspondences(corr);
}

DrapeSession::DrapeSession(std::unique_ptr<State> state) : s_(std::move(state)) {}
DrapeSession::DrapeSession(DrapeSession&&) noexcept = default;
DrapeSession& DrapeSession::operator=(DrapeSession&&) noexcept = default;
DrapeSession::~DrapeSession() = default;

Points DrapeSession::set_correspondences(const CorrespondenceSet& corr) {
  if (s_->status != SessionStatus::Idle || s_->t != 0)
    fail(ErrorCode::InvalidState, std::string("cannot re-initialize a ") + to_string(s_->status) + " session at t=" +
                                      std::to_string(s_->t));
  CorrespondenceSet working = s_->to_working_frame(corr);
  InitialDeformation init = initial_deformation(s_->source_n, s_->target_n, working, s_->config.arap_iterations);
  s_->corr = std::move(init.correspondences);
  s_->set_initial(std::move(init.vertices));
  return s_->target_t.invert(s_->init);
}

void DrapeSession::update_correspondences(const CorrespondenceSet& corr) {
  if (s_->status == SessionStatus::Idle && s_->t == 0) {
    set_correspondences(corr);
    return;
  }
  if (s_->status != SessionStatus::Paused && s_->status != SessionStatus::Idle)
    fail(ErrorCode::InvalidState, std::string("correspondences can only change while paused, session is ") +
                                      to_string(s_->status));
  s_->corr = s_->to_working_frame(corr);
}

void DrapeSession::ensure_initialized() {
  if (!s_->initialized) set_correspondences({});
}

void DrapeSession::start() {
  if (s_->status != SessionStatus::Idle)
    fail(ErrorCode::InvalidState, std::string("cannot start a ") + to_string(s_->status) + " session");
  ensure_initialized();
  s_->status = s_->t >= s_->config.iterations ? SessionStatus::Done : SessionStatus::Running;
}

void DrapeSession::pause() {
  if (s_->status != SessionStatus::Running)
    fail(ErrorCode::InvalidState, std::string("cannot pause a ") + to_string(s_->status) + " session");
  s_->status = SessionStatus::Paused;
}

void DrapeSession::resume() {
  if (s_->status != SessionStatus::Paused)
    fail(ErrorCode::InvalidState, std::string("cannot resume a ") + to_string(s_->status) + " session");
  s_->status = SessionStatus::Running;
}

void DrapeSession::cancel() {
  const SessionStatus st = s_->status;
  if (st != SessionStatus::Idle && st != SessionStatus::Running && st != SessionStatus::Paused)
    fail(ErrorCode::InvalidState, std::string("cannot cancel a ") + to_string(st) + " session");
  ensure_initialized();
  s_->status = SessionStatus::Cancelled;
}

LossReport DrapeSession::step() {
  State& s = *s_;
  if (s.status != SessionStatus::Idle && s.status != SessionStatus::Running && s.status != SessionStatus::Paused)
    fail(ErrorCode::InvalidState, std::string("cannot step a ") + to_string(s.status) + " session");
  if (s.t >= s.config.iterations) fail(ErrorCode::InvalidState, "session already ran all iterations");
  ensure_initialized();

  Eigen::MatrixXf features;
  s.encoded->features<float>(s.t, features);
  Mlp<float>::Tape tape;
  const Eigen::MatrixXf out = s.net.forward(features, &tape);
  const Points vertices = s.init + out.cast<double>();

  const StepSelection sel = select_step_loss(s.t, s.config.loss);
  LossReport rep;
  rep.iteration = s.t;
  rep.loss = sel.loss;
  rep.weight = sel.weight;
  Points grad = Points::Zero(vertices.rows(), 3);
  if (sel.loss == StepLoss::Distance) {
    DistanceLossOptions opts;
    opts.samples = s.config.loss.chamfer_samples;
    opts.seed = mix_seed(s.config.seed, static_cast<std::uint64_t>(s.t));
    opts.chamfer = s.config.loss.chamfer;
    opts.correspondence = s.config.loss.correspondence;
    const DistanceLossValue d = distance_loss(s.source_n.with_vertices(vertices), s.target_n, s.corr, opts, &grad);
    rep.chamfer = d.chamfer;
    rep.correspondence = d.correspondence;
    rep.total = d.total;
  } else {
    const StructuralLossValue v = s.structural.evaluate(vertices, s.config.loss.structural(), &grad);
    grad *= sel.weight;
    rep.angle = v.angle;
    rep.area_kl = v.area_kl;
    rep.quality = v.quality;
    rep.total = sel.weight * v.total;
  }
  if (!std::isfinite(rep.total) || !grad.allFinite()) {
    s.status = SessionStatus::Failed;
    fail(ErrorCode::NonFinite, "non-finite loss at iteration " + std::to_string(s.t));
  }
  const Eigen::MatrixXf upstream = grad.cast<float>();
  const Eigen::VectorXf pgrad = s.net.backward(tape, upstream);
  try {
    s.adam.step(s.net.parameters(), pgrad);
  } catch (const Error&) {
    s.status = SessionStatus::Failed;
    throw;
  }
  s.history.push_back(rep);
  ++s.t;
  if (s.t >= s.config.iterations) s.status = SessionStatus::Done;
  if (s.snapshot_cb && s.t % s.config.snapshot_stride == 0)
    s.snapshot_cb(Snapshot{s.t, current_vertices_original(), rep});
  return rep;
}

void DrapeSession::run(const std::function<bool()>& keep_going) {
  if (s_->status == SessionStatus::Idle) start();
  while (s_->status == SessionStatus::Running && s_->t < s_->config.iterations) {
    if (keep_going && !keep_going()) break;
    step();
  }
}

void DrapeSession::on_snapshot(std::function<void(const Snapshot&)> callback) { s_->snapshot_cb = std::move(callback); }

SessionStatus DrapeSession::status() const { return s_->status; }
long DrapeSession::iteration() const { return s_->t; }
bool DrapeSession::initialized() const { return s_->initialized; }
const DrapeConfig& DrapeSession::config() const { return s_->config; }
const std::vector<LossReport>& DrapeSession::loss_history() const { return s_->history; }
const SurfaceMesh& DrapeSession::source() const { return s_->source; }
const TargetShape& DrapeSession::target() const { return s_->target; }
const SurfaceMesh& DrapeSession::normalized_source() const { return s_->source_n; }
const TargetShape& DrapeSession::normalized_target() const { return s_->target_n; }
const NormalizationTransform& DrapeSession::source_transform() const { return s_->source_t; }
const NormalizationTransform& DrapeSession::target_transform() const { return s_->target_t; }
const CorrespondenceSet& DrapeSession::correspondences() const { return s_->corr; }
const Mlp<float>& DrapeSession::network() const { return s_->net; }
const Adam<float>& DrapeSession::optimizer() const { return s_->adam; }

const Points& DrapeSession::initial_vertices() const {
  if (!s_->initialized) fail(ErrorCode::InvalidState, "session has no initial deformation yet");
  return s_->init;
}

Points DrapeSession::current_vertices() const {
  if (!s_->initialized) fail(ErrorCode::InvalidState, "session has no initial deformation yet");
  return s_->forward(s_->t);
}

Points DrapeSession::current_vertices_original() const { return s_->target_t.invert(current_vertices()); }

double DrapeSession::total_loss() const {
  const State& s = *s_;
  const Points v = current_vertices();
  DistanceLossOptions opts;
  opts.samples = s.config.loss.chamfer_samples;
  opts.seed = mix_seed(s.config.seed, kEvalSalt);
  opts.chamfer = s.config.loss.chamfer;
  opts.correspondence = s.config.loss.correspondence;
  const double ld = distance_loss(s.source_n.with_vertices(v), s.target_n, s.corr, opts).total;
  const double ls = s.structural.evaluate(v, s.config.loss.structural()).total;
  return ld + lambda_at(s.t, s.config.loss) * ls;
}

DrapeResult DrapeSession::extract_result() const {
  DrapeResult r;
  r.mesh = s_->source.with_vertices(current_vertices_original());
  MetricConfig mc = s_->config.metrics;
  mc.seed = s_->config.seed;
  r.report = evaluate_transfer(s_->source, r.mesh, s_->target, mc);
  r.partial = s_->status != SessionStatus::Done;
  return r;
}

}  // namespace drape
