#include "drape/drape.h"

#include "core/error.hpp"
#include "geometry/mesh_io.hpp"
#include "metrics/metrics.hpp"
#include "pipeline/session.hpp"
#include "service/server.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

struct drape_mesh {
  drape::SurfaceMesh mesh;
};
struct drape_target {
  drape::TargetShape target;
};
struct drape_corr {
  std::vector<drape::Correspondence> pairs;
};
struct drape_config {
  drape::DrapeConfig config;
};
struct drape_session {
  drape::DrapeSession session;
  drape_snapshot_fn fn = nullptr;
  void* user = nullptr;
};
struct drape_report {
  drape::TransferReport report;
};
struct drape_server {
  std::unique_ptr<drape::DrapeServer> server;
};

namespace {

thread_local std::string g_last_error;

drape_status to_status(drape::ErrorCode code) {
  using drape::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return DRAPE_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return DRAPE_ERR_PARSE;
    case ErrorCode::OutOfRange: return DRAPE_ERR_OUT_OF_RANGE;
    case ErrorCode::Degenerate: return DRAPE_ERR_DEGENERATE;
    case ErrorCode::Singular: return DRAPE_ERR_SINGULAR;
    case ErrorCode::NonFinite: return DRAPE_ERR_NON_FINITE;
    case ErrorCode::InvalidState: return DRAPE_ERR_INVALID_STATE;
    case ErrorCode::NotFound: return DRAPE_ERR_NOT_FOUND;
    case ErrorCode::Io: return DRAPE_ERR_IO;
  }
  return DRAPE_ERR_INTERNAL;
}

template <class F>
drape_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return DRAPE_OK;
  } catch (const drape::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DRAPE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DRAPE_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) drape::fail(drape::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void copy_points(const drape::Points& p, double* out, std::size_t capacity) {
  const auto n = static_cast<std::size_t>(p.size());
  if (n == 0) return;
  need(out, "output buffer");
  if (capacity < n)
    drape::fail(drape::ErrorCode::InvalidArgument,
                "output buffer holds " + std::to_string(capacity) + " doubles, need " + std::to_string(n));
  std::memcpy(out, p.data(), n * sizeof(double));
}

drape::Points points_from(const double* xyz, std::size_t count) {
  if (count > 0) need(xyz, "coordinates");
  drape::Points p(static_cast<Eigen::Index>(count), 3);
  if (count > 0) std::memcpy(p.data(), xyz, count * 3 * sizeof(double));
  return p;
}

template <class F>
drape_status with_session(drape_session* s, F&& f) {
  return guard([&] {
    need(s, "session");
    f(s->session);
  });
}

}  // namespace

extern "C" {

const char* drape_version(void) { return "0.1.0"; }

const char* drape_status_string(drape_status status) {
  switch (status) {
    case DRAPE_OK: return "ok";
    case DRAPE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DRAPE_ERR_PARSE: return "parse error";
    case DRAPE_ERR_OUT_OF_RANGE: return "out of range";
    case DRAPE_ERR_DEGENERATE: return "degenerate geometry";
    case DRAPE_ERR_SINGULAR: return "singular system";
    case DRAPE_ERR_NON_FINITE: return "non-finite value";
    case DRAPE_ERR_INVALID_STATE: return "invalid state";
    case DRAPE_ERR_NOT_FOUND: return "not found";
    case DRAPE_ERR_IO: return "i/o error";
    case DRAPE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* drape_last_error(void) { return g_last_error.c_str(); }

void drape_string_free(char* s) { std::free(s); }

// ---- meshes

drape_status drape_mesh_load(const char* path, drape_mesh** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new drape_mesh{drape::load_mesh(path)};
  });
}

drape_status drape_mesh_parse(const char* text, size_t length, drape_mesh** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new drape_mesh{drape::parse_mesh(std::string_view(text, length))};
  });
}

drape_status drape_mesh_from_arrays(const double* xyz, size_t vertex_count, const int32_t* triangles,
                                    size_t triangle_count, drape_mesh** out) {
  return guard([&] {
    need(out, "out");
    if (triangle_count > 0) need(triangles, "triangles");
    std::vector<drape::Face> faces;
    faces.reserve(triangle_count);
    for (size_t t = 0; t < triangle_count; ++t)
      faces.push_back(drape::Face::tri(triangles[3 * t], triangles[3 * t + 1], triangles[3 * t + 2]));
    *out = new drape_mesh{drape::SurfaceMesh(points_from(xyz, vertex_count), std::move(faces))};
  });
}

drape_status drape_mesh_save(const drape_mesh* mesh, const char* path) {
  return guard([&] {
    need(mesh, "mesh");
    need(path, "path");
    drape::save_mesh(mesh->mesh, path);
  });
}

drape_status drape_mesh_format(const drape_mesh* mesh, char** out) {
  return guard([&] {
    need(mesh, "mesh");
    need(out, "out");
    *out = dup_string(drape::format_mesh(mesh->mesh));
  });
}

size_t drape_mesh_vertex_count(const drape_mesh* mesh) { return mesh ? mesh->mesh.vertex_count() : 0; }
size_t drape_mesh_face_count(const drape_mesh* mesh) { return mesh ? mesh->mesh.face_count() : 0; }

drape_status drape_mesh_vertices(const drape_mesh* mesh, double* out, size_t capacity) {
  return guard([&] {
    need(mesh, "mesh");
    copy_points(mesh->mesh.vertices(), out, capacity);
  });
}

drape_status drape_mesh_same_connectivity(const drape_mesh* a, const drape_mesh* b, int* out) {
  return guard([&] {
    need(a, "mesh");
    need(b, "mesh");
    need(out, "out");
    *out = a->mesh.same_connectivity(b->mesh) ? 1 : 0;
  });
}

void drape_mesh_free(drape_mesh* mesh) { delete mesh; }

// ---- targets

drape_status drape_target_load(const char* path, drape_target** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new drape_target{drape::load_target(path)};
  });
}

drape_status drape_target_parse(const char* text, size_t length, drape_target** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new drape_target{drape::parse_target(std::string_view(text, length))};
  });
}

drape_status drape_target_from_mesh(const drape_mesh* mesh, drape_target** out) {
  return guard([&] {
    need(mesh, "mesh");
    need(out, "out");
    *out = new drape_target{drape::TargetShape::from_mesh(mesh->mesh)};
  });
}

drape_status drape_target_from_points(const double* xyz, size_t count, drape_target** out) {
  return guard([&] {
    need(out, "out");
    *out = new drape_target{drape::TargetShape::from_points(points_from(xyz, count))};
  });
}

drape_target_kind drape_target_get_kind(const drape_target* target) {
  if (!target) return DRAPE_TARGET_MESH;
  return static_cast<drape_target_kind>(target->target.kind());
}

void drape_target_free(drape_target* target) { delete target; }

// ---- correspondences

drape_status drape_corr_create(drape_corr** out) {
  return guard([&] {
    need(out, "out");
    *out = new drape_corr{};
  });
}

drape_status drape_corr_load(const char* path, drape_corr** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new drape_corr{drape::load_correspondences(path).pairs()};
  });
}

drape_status drape_corr_parse(const char* text, size_t length, drape_corr** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new drape_corr{drape::parse_correspondences(std::string_view(text, length)).pairs()};
  });
}

drape_status drape_corr_add(drape_corr* corr, int32_t source_vertex, double x, double y, double z, int rigid) {
  return guard([&] {
    need(corr, "corr");
    if (source_vertex < 0)
      drape::fail(drape::ErrorCode::OutOfRange, "negative source vertex id " + std::to_string(source_vertex));
    auto pairs = corr->pairs;
    pairs.push_back({source_vertex, drape::Vec3(x, y, z),
                     rigid ? drape::CorrespondenceKind::Rigid : drape::CorrespondenceKind::Soft});
    // Validates uniqueness and finiteness before committing.
    corr->pairs = drape::CorrespondenceSet(std::move(pairs)).pairs();
  });
}

size_t drape_corr_size(const drape_corr* corr) { return corr ? corr->pairs.size() : 0; }

void drape_corr_free(drape_corr* corr) { delete corr; }

// ---- configuration

drape_status drape_config_create(drape_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new drape_config{};
  });
}

drape_status drape_config_load(const char* path, drape_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new drape_config{drape::load_config(path)};
  });
}

drape_status drape_config_parse(const char* text, size_t length, drape_config** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new drape_config{drape::parse_config(std::string_view(text, length))};
  });
}

drape_status drape_config_set(drape_config* config, const char* key, const char* value) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    drape::DrapeConfig next = config->config;
    drape::set_config_value(next, key, value);
    config->config = next;
  });
}

drape_status drape_config_set_seed(drape_config* config, uint64_t seed) {
  return guard([&] {
    need(config, "config");
    config->config.seed = seed;
  });
}

drape_status drape_config_format(const drape_config* config, char** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    *out = dup_string(drape::format_config(config->config));
  });
}

void drape_config_free(drape_config* config) { delete config; }

// ---- sessions

drape_status drape_session_create(const drape_mesh* source, const drape_target* target, const drape_corr* corr,
                                  const drape_config* config, drape_session** out) {
  return guard([&] {
    need(source, "source");
    need(target, "target");
    need(out, "out");
    const drape::CorrespondenceSet pairs = corr ? drape::CorrespondenceSet(corr->pairs) : drape::CorrespondenceSet();
    const drape::DrapeConfig cfg = config ? config->config : drape::DrapeConfig{};
    *out = new drape_session{drape::DrapeSession(source->mesh, target->target, pairs, cfg)};
  });
}

drape_status drape_session_start(drape_session* s) {
  return with_session(s, [](drape::DrapeSession& d) { d.start(); });
}
drape_status drape_session_pause(drape_session* s) {
  return with_session(s, [](drape::DrapeSession& d) { d.pause(); });
}
drape_status drape_session_resume(drape_session* s) {
  return with_session(s, [](drape::DrapeSession& d) { d.resume(); });
}
drape_status drape_session_cancel(drape_session* s) {
  return with_session(s, [](drape::DrapeSession& d) { d.cancel(); });
}

drape_status drape_session_step(drape_session* s, double* loss) {
  return with_session(s, [&](drape::DrapeSession& d) {
    const drape::LossReport r = d.step();
    if (loss) *loss = r.total;
  });
}

drape_status drape_session_run(drape_session* s, long max_steps) {
  return with_session(s, [&](drape::DrapeSession& d) {
    long taken = 0;
    d.run([&] { return max_steps <= 0 || taken++ < max_steps; });
  });
}

drape_status drape_session_update_correspondences(drape_session* s, const drape_corr* corr) {
  return with_session(s, [&](drape::DrapeSession& d) {
    need(corr, "corr");
    d.update_correspondences(drape::CorrespondenceSet(corr->pairs));
  });
}

drape_status drape_session_set_snapshot_callback(drape_session* s, drape_snapshot_fn fn, void* user) {
  return with_session(s, [&](drape::DrapeSession& d) {
    s->fn = fn;
    s->user = user;
    if (!fn) {
      d.on_snapshot({});
      return;
    }
    d.on_snapshot([s](const drape::Snapshot& snap) {
      s->fn(s->user, snap.iteration, snap.vertices.data(), static_cast<size_t>(snap.vertices.rows()), snap.loss.total);
    });
  });
}

drape_session_status drape_session_get_status(const drape_session* s) {
  if (!s) return DRAPE_SESSION_FAILED;
  return static_cast<drape_session_status>(s->session.status());
}

long drape_session_iteration(const drape_session* s) { return s ? s->session.iteration() : -1; }

drape_status drape_session_total_loss(const drape_session* s, double* out) {
  return guard([&] {
    need(s, "session");
    need(out, "out");
    *out = s->session.total_loss();
  });
}

drape_status drape_session_loss_history(const drape_session* s, double* out, size_t capacity, size_t* count) {
  return guard([&] {
    need(s, "session");
    const auto& h = s->session.loss_history();
    if (count) *count = h.size();
    if (!out) return;
    for (size_t i = 0; i < h.size() && i < capacity; ++i) out[i] = h[i].total;
  });
}

drape_status drape_session_vertices(const drape_session* s, double* out, size_t capacity) {
  return guard([&] {
    need(s, "session");
    copy_points(s->session.current_vertices_original(), out, capacity);
  });
}

drape_status drape_session_result(const drape_session* s, drape_mesh** mesh, drape_report** report) {
  return guard([&] {
    need(s, "session");
    drape::DrapeResult r = s->session.extract_result();
    auto m = mesh ? std::make_unique<drape_mesh>(drape_mesh{std::move(r.mesh)}) : nullptr;
    auto rep = report ? std::make_unique<drape_report>(drape_report{r.report}) : nullptr;
    if (mesh) *mesh = m.release();
    if (report) *report = rep.release();
  });
}

drape_status drape_session_save_checkpoint(const drape_session* s, const char* path) {
  return guard([&] {
    need(s, "session");
    need(path, "path");
    s->session.save_checkpoint(path);
  });
}

drape_status drape_session_load_checkpoint(const char* path, drape_session** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new drape_session{drape::DrapeSession::load_checkpoint(path)};
  });
}

void drape_session_free(drape_session* s) { delete s; }

// ---- metrics

void drape_metric_options_default(drape_metric_options* options) {
  if (!options) return;
  const drape::MetricConfig d;
  options->tau = d.tau;
  options->w_a = d.w_a;
  options->samples = d.samples;
  options->seed = d.seed;
}

drape_status drape_evaluate(const drape_mesh* source, const drape_mesh* result, const drape_target* target,
                            const drape_metric_options* options, drape_report** out) {
  return guard([&] {
    need(source, "source");
    need(result, "result");
    need(target, "target");
    need(out, "out");
    drape::MetricConfig mc;
    if (options) {
      mc.tau = options->tau;
      mc.w_a = options->w_a;
      mc.samples = static_cast<std::size_t>(options->samples);
      mc.seed = options->seed;
    }
    *out = new drape_report{drape::evaluate_transfer(source->mesh, result->mesh, target->target, mc)};
  });
}

drape_status drape_report_values_get(const drape_report* report, drape_report_values* out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    const drape::TransferReport& r = report->report;
    *out = drape_report_values{r.chamfer, r.hausdorff, r.dirichlet, r.dirichlet_energy, r.f_a,
                               r.q_transfer, r.tau, r.w_a, r.seed};
  });
}

drape_status drape_report_to_json(const drape_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup_string(drape::report_to_json(report->report));
  });
}

drape_status drape_report_parse(const char* text, size_t length, drape_report** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new drape_report{drape::report_from_json(std::string(text, length))};
  });
}

drape_status drape_report_save(const drape_report* report, const char* path) {
  return guard([&] {
    need(report, "report");
    need(path, "path");
    drape::write_text_file(path, drape::report_to_json(report->report) + "\n");
  });
}

void drape_report_free(drape_report* report) { delete report; }

drape_status drape_q_transfer(double f_d, double f_a, double tau, double* out) {
  return guard([&] {
    need(out, "out");
    *out = drape::q_transfer(f_d, f_a, tau);
  });
}

// ---- service

void drape_server_options_default(drape_server_options* options) {
  if (!options) return;
  options->host = "127.0.0.1";
  options->port = 8080;
  options->max_upload_bytes = std::uint64_t{64} << 20;
  options->checkpoint_dir = nullptr;
  options->config = nullptr;
}

drape_status drape_server_options_from_env(drape_server_options* options) {
  return guard([&] {
    need(options, "options");
    drape::ServiceOptions o;
    o.port = options->port;
    o.max_upload_bytes = static_cast<std::size_t>(options->max_upload_bytes);
    o = drape::options_from_environment(o);
    options->port = o.port;
    options->max_upload_bytes = o.max_upload_bytes;
  });
}

drape_status drape_server_create(const drape_server_options* options, drape_server** out) {
  return guard([&] {
    need(out, "out");
    drape::ServiceOptions o;
    if (options) {
      if (options->host && *options->host) o.host = options->host;
      o.port = options->port;
      o.max_upload_bytes = static_cast<std::size_t>(options->max_upload_bytes);
      if (options->checkpoint_dir) o.checkpoint_dir = options->checkpoint_dir;
      if (options->config) o.default_config = options->config->config;
    }
    if (o.port < 0 || o.port > 65535) drape::fail(drape::ErrorCode::InvalidArgument, "port out of range");
    *out = new drape_server{std::make_unique<drape::DrapeServer>(std::move(o))};
  });
}

drape_status drape_server_bind(drape_server* server, int* port) {
  return guard([&] {
    need(server, "server");
    const int p = server->server->bind();
    if (port) *port = p;
  });
}

drape_status drape_server_listen(drape_server* server) {
  return guard([&] {
    need(server, "server");
    server->server->listen();
  });
}

drape_status drape_server_start(drape_server* server, int* port) {
  return guard([&] {
    need(server, "server");
    const int p = server->server->start_background();
    if (port) *port = p;
  });
}

drape_status drape_server_stop(drape_server* server) {
  return guard([&] {
    need(server, "server");
    server->server->stop();
  });
}

void drape_server_free(drape_server* server) { delete server; }

}  // extern "C"
