/* C interface to the mesh draping library.
 *
 * All objects are opaque handles released with the matching *_free call.
 * Functions return DRAPE_OK or an error status; the message of the last
 * failure on the calling thread is available from drape_last_error().
 * Strings returned through char** are released with drape_string_free().
 */
#ifndef DRAPE_DRAPE_H
#define DRAPE_DRAPE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(DRAPE_BUILDING_LIBRARY)
#define DRAPE_API __attribute__((visibility("default")))
#else
#define DRAPE_API
#endif

typedef enum drape_status {
  DRAPE_OK = 0,
  DRAPE_ERR_INVALID_ARGUMENT = 1,
  DRAPE_ERR_PARSE = 2,
  DRAPE_ERR_OUT_OF_RANGE = 3,
  DRAPE_ERR_DEGENERATE = 4,
  DRAPE_ERR_SINGULAR = 5,
  DRAPE_ERR_NON_FINITE = 6,
  DRAPE_ERR_INVALID_STATE = 7,
  DRAPE_ERR_NOT_FOUND = 8,
  DRAPE_ERR_IO = 9,
  DRAPE_ERR_INTERNAL = 10
} drape_status;

typedef enum drape_session_status {
  DRAPE_SESSION_IDLE = 0,
  DRAPE_SESSION_RUNNING = 1,
  DRAPE_SESSION_PAUSED = 2,
  DRAPE_SESSION_DONE = 3,
  DRAPE_SESSION_FAILED = 4,
  DRAPE_SESSION_CANCELLED = 5
} drape_session_status;

typedef enum drape_target_kind {
  DRAPE_TARGET_MESH = 0,
  DRAPE_TARGET_POLYGON_SOUP = 1,
  DRAPE_TARGET_POINT_CLOUD = 2
} drape_target_kind;

typedef struct drape_mesh drape_mesh;
typedef struct drape_target drape_target;
typedef struct drape_corr drape_corr;
typedef struct drape_config drape_config;
typedef struct drape_session drape_session;
typedef struct drape_report drape_report;
typedef struct drape_server drape_server;

DRAPE_API const char* drape_version(void);
DRAPE_API const char* drape_status_string(drape_status status);
/* Message of the last failed call on this thread, "" if none. */
DRAPE_API const char* drape_last_error(void);
DRAPE_API void drape_string_free(char* s);

/* ---- meshes ---- */
DRAPE_API drape_status drape_mesh_load(const char* path, drape_mesh** out);
DRAPE_API drape_status drape_mesh_parse(const char* text, size_t length, drape_mesh** out);
/* xyz: 3*vertex_count doubles; triangles: 3*triangle_count 0-based ids. */
DRAPE_API drape_status drape_mesh_from_arrays(const double* xyz, size_t vertex_count, const int32_t* triangles,
                                              size_t triangle_count, drape_mesh** out);
DRAPE_API drape_status drape_mesh_save(const drape_mesh* mesh, const char* path);
DRAPE_API drape_status drape_mesh_format(const drape_mesh* mesh, char** out);
DRAPE_API size_t drape_mesh_vertex_count(const drape_mesh* mesh);
DRAPE_API size_t drape_mesh_face_count(const drape_mesh* mesh);
/* Copies 3*vertex_count doubles into out; capacity counts doubles. */
DRAPE_API drape_status drape_mesh_vertices(const drape_mesh* mesh, double* out, size_t capacity);
DRAPE_API drape_status drape_mesh_same_connectivity(const drape_mesh* a, const drape_mesh* b, int* out);
DRAPE_API void drape_mesh_free(drape_mesh* mesh);

/* ---- targets (mesh, polygon soup or point cloud) ---- */
DRAPE_API drape_status drape_target_load(const char* path, drape_target** out);
DRAPE_API drape_status drape_target_parse(const char* text, size_t length, drape_target** out);
DRAPE_API drape_status drape_target_from_mesh(const drape_mesh* mesh, drape_target** out);
DRAPE_API drape_status drape_target_from_points(const double* xyz, size_t count, drape_target** out);
DRAPE_API drape_target_kind drape_target_get_kind(const drape_target* target);
DRAPE_API void drape_target_free(drape_target* target);

/* ---- correspondences ---- */
DRAPE_API drape_status drape_corr_create(drape_corr** out);
DRAPE_API drape_status drape_corr_load(const char* path, drape_corr** out);
DRAPE_API drape_status drape_corr_parse(const char* text, size_t length, drape_corr** out);
DRAPE_API drape_status drape_corr_add(drape_corr* corr, int32_t source_vertex, double x, double y, double z,
                                      int rigid);
DRAPE_API size_t drape_corr_size(const drape_corr* corr);
DRAPE_API void drape_corr_free(drape_corr* corr);

/* ---- configuration ---- */
DRAPE_API drape_status drape_config_create(drape_config** out);
DRAPE_API drape_status drape_config_load(const char* path, drape_config** out);
DRAPE_API drape_status drape_config_parse(const char* text, size_t length, drape_config** out);
/* Dotted keys such as "iterations", "encoder.mode", "loss.lambda_after". */
DRAPE_API drape_status drape_config_set(drape_config* config, const char* key, const char* value);
DRAPE_API drape_status drape_config_set_seed(drape_config* config, uint64_t seed);
DRAPE_API drape_status drape_config_format(const drape_config* config, char** out);
DRAPE_API void drape_config_free(drape_config* config);

/* ---- sessions ---- */
typedef void (*drape_snapshot_fn)(void* user, long iteration, const double* xyz, size_t vertex_count,
                                  double loss);

/* corr and config may be NULL. */
DRAPE_API drape_status drape_session_create(const drape_mesh* source, const drape_target* target,
                                            const drape_corr* corr, const drape_config* config, drape_session** out);
DRAPE_API drape_status drape_session_start(drape_session* session);
DRAPE_API drape_status drape_session_pause(drape_session* session);
DRAPE_API drape_status drape_session_resume(drape_session* session);
DRAPE_API drape_status drape_session_cancel(drape_session* session);
/* One iteration; loss may be NULL. */
DRAPE_API drape_status drape_session_step(drape_session* session, double* loss);
/* Starts an idle session and steps until done, or at most max_steps
 * iterations when max_steps > 0. */
DRAPE_API drape_status drape_session_run(drape_session* session, long max_steps);
DRAPE_API drape_status drape_session_update_correspondences(drape_session* session, const drape_corr* corr);
DRAPE_API drape_status drape_session_set_snapshot_callback(drape_session* session, drape_snapshot_fn fn, void* user);
DRAPE_API drape_session_status drape_session_get_status(const drape_session* session);
DRAPE_API long drape_session_iteration(const drape_session* session);
DRAPE_API drape_status drape_session_total_loss(const drape_session* session, double* out);
/* Per-iteration loss values; *count receives the history length. */
DRAPE_API drape_status drape_session_loss_history(const drape_session* session, double* out, size_t capacity,
                                                  size_t* count);
/* Current vertices in the target's original frame. */
DRAPE_API drape_status drape_session_vertices(const drape_session* session, double* out, size_t capacity);
/* Either output may be NULL. */
DRAPE_API drape_status drape_session_result(const drape_session* session, drape_mesh** mesh, drape_report** report);
DRAPE_API drape_status drape_session_save_checkpoint(const drape_session* session, const char* path);
DRAPE_API drape_status drape_session_load_checkpoint(const char* path, drape_session** out);
DRAPE_API void drape_session_free(drape_session* session);

/* ---- metrics ---- */
typedef struct drape_metric_options {
  double tau;
  double w_a;
  uint64_t samples;
  uint64_t seed;
} drape_metric_options;

typedef struct drape_report_values {
  double chamfer;
  double hausdorff;
  double dirichlet;
  double dirichlet_energy;
  double f_a;
  double q_transfer;
  double tau;
  double w_a;
  uint64_t seed;
} drape_report_values;

DRAPE_API void drape_metric_options_default(drape_metric_options* options);
/* options may be NULL. */
DRAPE_API drape_status drape_evaluate(const drape_mesh* source, const drape_mesh* result, const drape_target* target,
                                      const drape_metric_options* options, drape_report** out);
DRAPE_API drape_status drape_report_values_get(const drape_report* report, drape_report_values* out);
DRAPE_API drape_status drape_report_to_json(const drape_report* report, char** out);
DRAPE_API drape_status drape_report_parse(const char* text, size_t length, drape_report** out);
DRAPE_API drape_status drape_report_save(const drape_report* report, const char* path);
DRAPE_API void drape_report_free(drape_report* report);
DRAPE_API drape_status drape_q_transfer(double f_d, double f_a, double tau, double* out);

/* ---- HTTP service ---- */
typedef struct drape_server_options {
  const char* host;           /* default "127.0.0.1" */
  int port;                   /* default 8080, 0 picks a free port */
  uint64_t max_upload_bytes;  /* default 64 MiB */
  const char* checkpoint_dir; /* NULL or "" disables checkpoints */
  const drape_config* config; /* defaults for new sessions, may be NULL */
} drape_server_options;

DRAPE_API void drape_server_options_default(drape_server_options* options);
/* Applies DRAPE_PORT and DRAPE_MAX_UPLOAD_MB from the environment. */
DRAPE_API drape_status drape_server_options_from_env(drape_server_options* options);
DRAPE_API drape_status drape_server_create(const drape_server_options* options, drape_server** out);
/* Binds the port; fails with DRAPE_ERR_IO when it is in use. */
DRAPE_API drape_status drape_server_bind(drape_server* server, int* port);
/* Blocks until drape_server_stop() is called from another thread. */
DRAPE_API drape_status drape_server_listen(drape_server* server);
/* Binds and serves on a background thread. */
DRAPE_API drape_status drape_server_start(drape_server* server, int* port);
/* Stops serving and checkpoints all sessions. */
DRAPE_API drape_status drape_server_stop(drape_server* server);
DRAPE_API void drape_server_free(drape_server* server);

#ifdef __cplusplus
}
#endif

#endif
