// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
#include "geometry/measures.hpp"
#include "geometry/mesh_io.hpp"
#include "objective/objective.hpp"
#include "pipeline/session.hpp"
#include "service/server.hpp"
#include "shapes.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <vector>

using namespace drape;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const Vec3 kAxes(1.0, 0.7, 0.5);

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Options {
  std::string unit_tests;
  std::string cli;
  std::vector<std::string> only;
  bool verbose = false;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int run_command(const std::string& cmd) {
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Pairs the source vertex closest to each axis direction with the target's
// extreme point along that axis.
CorrespondenceSet axis_pairs(const SurfaceMesh& source) {
  std::vector<Correspondence> pairs;
  for (int axis = 0; axis < 3; ++axis)
    for (double sign : {1.0, -1.0}) {
      Vec3 dir = Vec3::Zero();
      dir[axis] = sign;
      Eigen::Index best = 0;
      (source.vertices() * dir).maxCoeff(&best);
      pairs.push_back({static_cast<int>(best), dir.cwiseProduct(kAxes), CorrespondenceKind::Soft});
    }
  return CorrespondenceSet(pairs);
}

struct Run {
  DrapeResult result;
  double total_loss = 0.0;
  double angle = 0.0;
  double seconds = 0.0;
};

Run drape_run(const SurfaceMesh& source, const TargetShape& target, const CorrespondenceSet& corr,
              const DrapeConfig& cfg) {
  Stopwatch w;
  DrapeSession s(source, target, corr, cfg);
  s.run();
  Run r;
  r.total_loss = s.total_loss();
  r.result = s.extract_result();
  r.angle = angle_term(source, r.result.mesh);
  r.seconds = w.seconds();
  return r;
}

int low_quality_faces(const SurfaceMesh& m, double threshold = kQualityThreshold) {
  int n = 0;
  const Triangles& t = m.triangles();
  for (Eigen::Index f = 0; f < t.rows(); ++f)
    n += face_quality(m.vertices().row(t(f, 0)), m.vertices().row(t(f, 1)), m.vertices().row(t(f, 2))) < threshold;
  return n;
}

int degenerate_faces(const SurfaceMesh& m) {
  const Eigen::VectorXd a = triangle_areas(m.vertices(), m.triangles());
  const double tol = 1e-10 * a.mean();
  return static_cast<int>((a.array() <= tol).count());
}

double min_quality(const SurfaceMesh& m) {
  double q = 1.0;
  const Triangles& t = m.triangles();
  for (Eigen::Index f = 0; f < t.rows(); ++f)
    q = std::min(q, face_quality(m.vertices().row(t(f, 0)), m.vertices().row(t(f, 1)), m.vertices().row(t(f, 2))));
  return q;
}

Outcome unit_suite(const Options& o, const std::string& suite, double budget) {
  if (o.unit_tests.empty()) return {false, "unit test binary not given"};
  Stopwatch w;
  const int code = run_command("\"" + o.unit_tests + "\" -ts=" + suite + (o.verbose ? "" : " >/dev/null 2>&1"));
  const double s = w.seconds();
  return {code == 0 && s < budget, fmt("doctest suite '%s' exit %d, %.2f s (limit %.0f s)", suite.c_str(), code, s, budget)};
}

Outcome self_transfer(const Options&) {
  const SurfaceMesh s = testing::icosphere(4);
  const Run r = drape_run(s, TargetShape::from_mesh(s), {}, DrapeConfig{});
  const TransferReport& rep = r.result.report;
  const int low = low_quality_faces(r.result.mesh);
  const bool same = r.result.mesh.faces() == s.faces() && r.result.mesh.vertex_count() == s.vertex_count();
  const bool pass = rep.chamfer <= 1e-4 && rep.dirichlet <= 0.05 && rep.q_transfer >= 0.95 && low == 0 && same &&
                    r.seconds <= 600.0;
  return {pass, fmt("%zu vertices: chamfer %.3g, F_d %.3g, Q %.4f, %d faces below 0.1, connectivity %s, %.0f s",
                    s.vertex_count(), rep.chamfer, rep.dirichlet, rep.q_transfer, low, same ? "identical" : "CHANGED",
                    r.seconds)};
}

Outcome sphere_to_ellipsoid(const Options&) {
  const SurfaceMesh s = testing::icosphere(4);
  const Run r = drape_run(s, TargetShape::from_mesh(testing::ellipsoid(4, kAxes)), axis_pairs(s), DrapeConfig{});
  const TransferReport& rep = r.result.report;
  const int degenerate = degenerate_faces(r.result.mesh);
  const bool pass = rep.chamfer <= 5e-4 && rep.dirichlet <= 0.5 && rep.q_transfer >= 0.7 && degenerate == 0;
  return {pass, fmt("chamfer %.3g, F_d %.3g, Q %.4f, %d degenerate faces (min Q_f %.3f), %.0f s", rep.chamfer,
                    rep.dirichlet, rep.q_transfer, degenerate, min_quality(r.result.mesh), r.seconds)};
}

// Shared by the two ablation criteria: sphere -> bumpy ellipsoid, 5 seeds.
struct AblationCase {
  std::string name;
  std::function<void(DrapeConfig&)> tweak;
};

std::map<std::string, std::vector<Run>>& ablation_cache() {
  static std::map<std::string, std::vector<Run>> cache;
  return cache;
}

const std::vector<Run>& ablation_runs(const AblationCase& c, const Options& o) {
  auto& cache = ablation_cache();
  if (auto it = cache.find(c.name); it != cache.end()) return it->second;
  const SurfaceMesh s = testing::icosphere(3);
  const TargetShape t = TargetShape::from_mesh(testing::bumpy_ellipsoid(4, kAxes, 0.08, 6.0));
  std::vector<Run> runs;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DrapeConfig cfg;
    cfg.seed = seed;
    c.tweak(cfg);
    runs.push_back(drape_run(s, t, axis_pairs(s), cfg));
    if (o.verbose)
      std::fprintf(stderr, "  %s seed %llu: total %.6g chamfer %.4g angle %.5g (%.0f s)\n", c.name.c_str(),
                   static_cast<unsigned long long>(seed), runs.back().total_loss, runs.back().result.report.chamfer,
                   runs.back().angle, runs.back().seconds);
  }
  return cache[c.name] = std::move(runs);
}

const AblationCase kProgressive{"progressive", [](DrapeConfig&) {}};
const AblationCase kStatic{"static", [](DrapeConfig& c) { c.encoder.mode = EncoderMode::Static; }};
const AblationCase kNone{"none", [](DrapeConfig& c) { c.encoder.mode = EncoderMode::None; }};
const AblationCase kNoAngle{"no-angle", [](DrapeConfig& c) { c.loss.angle = false; }};

Outcome encoder_ablation(const Options& o) {
  auto med = [&](const AblationCase& c, auto field) {
    std::vector<double> v;
    for (const Run& r : ablation_runs(c, o)) v.push_back(field(r));
    return median(v);
  };
  auto total = [](const Run& r) { return r.total_loss; };
  auto chamfer = [](const Run& r) { return r.result.report.chamfer; };
  const double lp = med(kProgressive, total), ls = med(kStatic, total), ln = med(kNone, total);
  const double cp = med(kProgressive, chamfer), cs = med(kStatic, chamfer), cn = med(kNone, chamfer);
  const bool pass = lp <= ls && lp <= ln && cn > cp && cn > cs;
  return {pass, fmt("median total loss progressive %.5g, static %.5g, none %.5g; median chamfer %.4g, %.4g, %.4g",
                    lp, ls, ln, cp, cs, cn)};
}

Outcome structural_ablation(const Options& o) {
  std::vector<double> full, off;
  for (const Run& r : ablation_runs(kProgressive, o)) full.push_back(r.angle);
  for (const Run& r : ablation_runs(kNoAngle, o)) off.push_back(r.angle);
  const double mf = median(full), mo = median(off);
  return {mo > mf, fmt("median final angle term: full loss %.5g, angle term disabled %.5g", mf, mo)};
}

Outcome point_cloud(const Options&) {
  const SurfaceMesh s = testing::icosphere(4);
  const TargetShape cloud = TargetShape::from_points(testing::ellipsoid_cloud(50000, kAxes, 17));
  const Run r = drape_run(s, cloud, axis_pairs(s), DrapeConfig{});
  const TransferReport& rep = r.result.report;
  const bool pass = r.result.mesh.faces() == s.faces() && rep.q_transfer >= 0.7;
  return {pass, fmt("%s target, chamfer %.3g, F_d %.3g, Q %.4f, %.0f s", to_string(cloud.kind()), rep.chamfer,
                    rep.dirichlet, rep.q_transfer, r.seconds)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism(const Options& o) {
  if (o.cli.empty()) return {false, "CLI binary not given"};
  const fs::path dir = fs::temp_directory_path() / ("drape_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  save_mesh(testing::icosphere(3), dir / "source.obj");
  save_mesh(testing::ellipsoid(3, kAxes), dir / "target.obj");
  auto run = [&](const std::string& out) {
    return run_command("\"" + o.cli + "\" transfer --source " + (dir / "source.obj").string() + " --target " +
                       (dir / "target.obj").string() + " --seed 7 --out " + (dir / out).string() + " >/dev/null 2>&1");
  };
  Stopwatch w;
  const int a = run("a.obj"), b = run("b.obj");
  const std::string ma = slurp(dir / "a.obj"), mb = slurp(dir / "b.obj");
  fs::remove_all(dir);
  const bool pass = a == 0 && b == 0 && !ma.empty() && ma == mb;
  return {pass, fmt("exit codes %d/%d, %zu-byte meshes %s, %.0f s", a, b, ma.size(),
                    ma == mb ? "byte-identical" : "DIFFER", w.seconds())};
}

Outcome service_drivability(const Options&) {
  const SurfaceMesh source = testing::icosphere(3);
  const SurfaceMesh target = testing::ellipsoid(3, kAxes);
  const CorrespondenceSet pairs = axis_pairs(source);
  std::vector<Correspondence> edited_pairs = pairs.pairs();
  edited_pairs[2].target_point += Vec3(0.1, 0.0, 0.05);
  const CorrespondenceSet edited(edited_pairs);
  auto pair_text = [](const CorrespondenceSet& c) {
    std::string s;
    for (const auto& p : c.pairs())
      s += fmt("%d %.17g %.17g %.17g\n", p.source_vertex, p.target_point.x(), p.target_point.y(), p.target_point.z());
    return s;
  };

  ServiceOptions so;
  so.port = 0;
  DrapeServer server(so);
  const int port = server.start_background();
  httplib::Client c("127.0.0.1", port);
  c.set_read_timeout(600, 0);

  Stopwatch w;
  std::string step = "create";
  long paused_at = -1;
  std::string mesh_text;
  try {
    auto r = c.Post("/sessions", json{{"source", format_mesh(source)}, {"target", format_mesh(target)}}.dump(),
                    "application/json");
    if (!r || r->status != 201) throw std::runtime_error("create failed");
    const std::string id = json::parse(r->body).at("id");
    const std::string base = "/sessions/" + id;
    auto control = [&](const char* action) {
      auto res = c.Post(base + "/control", json{{"action", action}}.dump(), "application/json");
      if (!res || res->status != 200) throw std::runtime_error(std::string(action) + " failed");
      return json::parse(res->body);
    };
    step = "correspondences";
    r = c.Put(base + "/correspondences", pair_text(pairs), "text/plain");
    if (!r || r->status != 200) throw std::runtime_error("correspondences failed");
    step = "start";
    control("start");
    for (;;) {
      auto st = c.Get(base);
      if (!st) throw std::runtime_error("status failed");
      if (json::parse(st->body).at("t").get<long>() >= 400) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    step = "pause";
    paused_at = control("pause").at("t").get<long>();
    step = "edit";
    r = c.Put(base + "/correspondences", pair_text(edited), "text/plain");
    if (!r || r->status != 200) throw std::runtime_error("edit failed");
    step = "resume";
    control("resume");
    step = "result";
    for (;;) {
      auto st = c.Get(base);
      if (!st) throw std::runtime_error("status failed");
      const std::string status = json::parse(st->body).at("status");
      if (status == "done") break;
      if (status != "running") throw std::runtime_error("session ended as " + status);
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    r = c.Get(base + "/result");
    if (!r || r->status != 200) throw std::runtime_error("result failed");
    mesh_text = json::parse(r->body).at("mesh");
  } catch (const std::exception& e) {
    server.stop();
    return {false, "scripted client failed at " + step + ": " + e.what()};
  }
  server.stop();

  // Reference: the same inputs in-process, with the edit applied at the same t.
  DrapeSession ref(parse_mesh(format_mesh(source)), parse_target(format_mesh(target)), DrapeConfig{});
  ref.set_correspondences(pairs);
  ref.start();
  while (ref.iteration() < paused_at) ref.step();
  ref.pause();
  ref.update_correspondences(edited);
  ref.resume();
  ref.run();
  const SurfaceMesh served = parse_mesh(mesh_text);
  const Points expected = ref.extract_result().mesh.vertices();
  const double diff = (served.vertices() - expected).cwiseAbs().maxCoeff();
  const bool pass = diff <= 1e-9 && served.faces() == source.faces();
  return {pass, fmt("paused at t=%ld, edited one pair, max vertex difference to the reference run %.3g, %.0f s",
                    paused_at, diff, w.seconds())};
}

struct Criterion {
  std::string key;
  std::string title;
  std::function<Outcome(const Options&)> check;
};

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"drape acceptance checks"};
  app.add_option("--unit-tests", o.unit_tests, "Path to the unit test binary");
  app.add_option("--cli", o.cli, "Path to the drape CLI");
  app.add_option("--only", o.only, "Run only these criteria (by key)");
  app.add_flag("-v,--verbose", o.verbose, "Print per-run details");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {"formulas", "formula unit suite", [](const Options& x) { return unit_suite(x, "formula", 5.0); }},
      {"gradients", "gradient integrity", [](const Options& x) { return unit_suite(x, "gradients", 30.0); }},
      {"solvers", "solver suite", [](const Options& x) { return unit_suite(x, "solvers", 60.0); }},
      {"self", "self-transfer regression", self_transfer},
      {"ellipsoid", "sphere to ellipsoid", sphere_to_ellipsoid},
      {"encoder", "encoder ablation ordering", encoder_ablation},
      {"structural", "structural loss ablation", structural_ablation},
      {"cloud", "point cloud target", point_cloud},
      {"determinism", "CLI determinism", cli_determinism},
      {"service", "service drivability", service_drivability},
  };

  int failed = 0, ran = 0;
  for (const Criterion& c : criteria) {
    if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), c.key) == o.only.end()) continue;
    Outcome out;
    try {
      out = c.check(o);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    ++ran;
    failed += !out.pass;
    std::printf("%s  %-26s %s\n", out.pass ? "PASS" : "FAIL", c.title.c_str(), out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
