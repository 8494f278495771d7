// Command-line front end. Uses only the C interface.
#include <drape/drape.h>

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>

namespace {

struct ModuleError {
  std::string message;
};

void check(drape_status st, const std::string& what) {
  if (st != DRAPE_OK) throw ModuleError{what + ": " + drape_last_error()};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Free(p);
  }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Mesh = Handle<drape_mesh, drape_mesh_free>;
using Target = Handle<drape_target, drape_target_free>;
using Corr = Handle<drape_corr, drape_corr_free>;
using Config = Handle<drape_config, drape_config_free>;
using Session = Handle<drape_session, drape_session_free>;
using Report = Handle<drape_report, drape_report_free>;
using Server = Handle<drape_server, drape_server_free>;

void print_report(const drape_report* report) {
  drape_report_values v;
  check(drape_report_values_get(report, &v), "report");
  std::printf("chamfer = %.9g\n", v.chamfer);
  std::printf("hausdorff = %.9g\n", v.hausdorff);
  std::printf("dirichlet = %.9g\n", v.dirichlet);
  std::printf("dirichlet_energy = %.9g\n", v.dirichlet_energy);
  std::printf("f_a = %.9g\n", v.f_a);
  std::printf("q_transfer = %.9g\n", v.q_transfer);
}

struct TransferArgs {
  std::string source, target, corr, config, out = "draped.obj", report;
  std::optional<std::uint64_t> seed;
  bool progress = false;
};

void on_snapshot(void*, long t, const double*, size_t, double loss) {
  std::fprintf(stderr, "iteration %ld  loss %.6g\n", t, loss);
}

int run_transfer(const TransferArgs& a) {
  Mesh source;
  Target target;
  Corr corr;
  Config config;
  check(drape_mesh_load(a.source.c_str(), source.out()), "source");
  check(drape_target_load(a.target.c_str(), target.out()), "target");
  if (!a.corr.empty()) check(drape_corr_load(a.corr.c_str(), corr.out()), "correspondences");
  if (!a.config.empty())
    check(drape_config_load(a.config.c_str(), config.out()), "config");
  else
    check(drape_config_create(config.out()), "config");
  if (a.seed) check(drape_config_set_seed(config.get(), *a.seed), "seed");

  Session session;
  check(drape_session_create(source.get(), target.get(), corr.get(), config.get(), session.out()), "session");
  if (a.progress) check(drape_session_set_snapshot_callback(session.get(), on_snapshot, nullptr), "session");
  check(drape_session_run(session.get(), 0), "optimization");

  Mesh result;
  Report report;
  check(drape_session_result(session.get(), result.out(), report.out()), "result");
  check(drape_mesh_save(result.get(), a.out.c_str()), "output mesh");
  if (!a.report.empty()) check(drape_report_save(report.get(), a.report.c_str()), "report");
  print_report(report.get());
  return 0;
}

struct EvalArgs {
  std::string source, result, target, report;
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a) {
  Mesh source, result;
  Target target;
  check(drape_mesh_load(a.source.c_str(), source.out()), "source");
  check(drape_mesh_load(a.result.c_str(), result.out()), "result");
  check(drape_target_load(a.target.c_str(), target.out()), "target");
  drape_metric_options opts;
  drape_metric_options_default(&opts);
  opts.seed = a.seed;
  Report report;
  check(drape_evaluate(source.get(), result.get(), target.get(), &opts, report.out()), "evaluation");
  if (!a.report.empty()) check(drape_report_save(report.get(), a.report.c_str()), "report");
  print_report(report.get());
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  std::optional<int> port;
  std::optional<std::uint64_t> max_upload_mb;
  std::string checkpoint_dir = "drape-checkpoints";
  std::string config;
};

int run_serve(const ServeArgs& a) {
  // Signals are taken synchronously by a dedicated thread; block them
  // before any other thread exists so that none of them receives one.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  drape_server_options opts;
  drape_server_options_default(&opts);
  check(drape_server_options_from_env(&opts), "environment");
  opts.host = a.host.c_str();
  if (a.port) opts.port = *a.port;
  if (a.max_upload_mb) opts.max_upload_bytes = *a.max_upload_mb << 20;
  opts.checkpoint_dir = a.checkpoint_dir.c_str();
  Config config;
  if (!a.config.empty()) {
    check(drape_config_load(a.config.c_str(), config.out()), "config");
    opts.config = config.get();
  }

  Server server;
  check(drape_server_create(&opts, server.out()), "server");
  int port = 0;
  check(drape_server_bind(server.get(), &port), "bind");
  std::fprintf(stderr, "listening on %s:%d\n", a.host.c_str(), port);

  drape_server* raw = server.get();
  std::thread waiter([&signals, raw] {
    int sig = 0;
    sigwait(&signals, &sig);
    drape_server_stop(raw);
  });
  const drape_status st = drape_server_listen(raw);
  // listen() also returns on its own failure; make sure the waiter exits.
  if (st != DRAPE_OK) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  check(st, "serve");
  std::fprintf(stderr, "stopped, sessions checkpointed to %s\n", a.checkpoint_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drape a source mesh onto a target shape"};
  app.require_subcommand(1);

  TransferArgs ta;
  auto* transfer = app.add_subcommand("transfer", "Run one draping optimization");
  transfer->add_option("--source", ta.source, "Source mesh (OBJ)")->required();
  transfer->add_option("--target", ta.target, "Target mesh, polygon soup or point cloud")->required();
  transfer->add_option("--corr", ta.corr, "Correspondence file");
  transfer->add_option("--config", ta.config, "Config file (JSON or key=value)");
  transfer->add_option("--out", ta.out, "Output mesh path")->capture_default_str();
  transfer->add_option("--report", ta.report, "Write the metric report here");
  transfer->add_option("--seed", ta.seed, "Random seed (overrides the config)");
  transfer->add_flag("--progress", ta.progress, "Print losses at every snapshot");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a draped mesh");
  eval->add_option("--source", ea.source, "Source mesh")->required();
  eval->add_option("--result", ea.result, "Draped mesh")->required();
  eval->add_option("--target", ea.target, "Target shape")->required();
  eval->add_option("--report", ea.report, "Write the metric report here");
  eval->add_option("--seed", ea.seed, "Sampling seed")->capture_default_str();

  ServeArgs sa;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", sa.host, "Listen address")->capture_default_str();
  serve->add_option("--port", sa.port, "Port (default: DRAPE_PORT or 8080)")->check(CLI::Range(0, 65535));
  serve->add_option("--max-upload-mb", sa.max_upload_mb, "Upload limit (default: DRAPE_MAX_UPLOAD_MB or 64)")
      ->check(CLI::Range(1, 1 << 20));
  serve->add_option("--checkpoint-dir", sa.checkpoint_dir, "Session checkpoint directory")->capture_default_str();
  serve->add_option("--config", sa.config, "Default config for new sessions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*transfer) return run_transfer(ta);
    if (*eval) return run_eval(ea);
    if (*serve) return run_serve(sa);
  } catch (const ModuleError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return 1;
  }
  return 2;
}
