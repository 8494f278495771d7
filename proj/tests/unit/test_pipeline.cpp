#include <doctest.h>

#include "core/error.hpp"
#include "geometry/normalize.hpp"
#include "pipeline/session.hpp"
#include "shapes.hpp"

#include <filesystem>

using namespace drape;

namespace {

DrapeConfig small_config(std::uint64_t seed = 1) {
  DrapeConfig c;
  c.iterations = 20;
  c.seed = seed;
  c.encoder.reveal_iters = 10;
  c.net_layers = 2;
  c.net_width = 16;
  c.adam.learning_rate = 1e-3;
  c.loss.chamfer_samples = 200;
  c.loss.lambda_switch_iter = 10;
  c.snapshot_stride = 5;
  c.arap_iterations = 5;
  c.metrics.samples = 500;
  c.metrics.dense_samples = 2000;
  return c;
}

TargetShape small_target(const SurfaceMesh& m) { return TargetShape::from_mesh(m, 2000); }

SurfaceMesh ellipsoid_target() { return testing::ellipsoid(2, Vec3(1.0, 0.7, 0.5)); }

CorrespondenceSet pole_pairs() {
  // Vertices 0..5 of the level-2 icosphere paired with nearby ellipsoid points.
  const SurfaceMesh s = testing::icosphere(2);
  const Vec3 axes(1.0, 0.7, 0.5);
  std::vector<Correspondence> pairs;
  for (int i : {0, 3, 5, 8}) pairs.push_back({i, s.vertices().row(i).transpose().cwiseProduct(axes), CorrespondenceKind::Soft});
  return CorrespondenceSet(pairs);
}

double correspondence_sum(const Points& v, const CorrespondenceSet& corr) {
  double s = 0.0;
  for (const auto& c : corr.pairs()) s += (v.row(c.source_vertex).transpose() - c.target_point).squaredNorm();
  return s;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("json with nested objects") {
    const DrapeConfig c = parse_config(R"({"iterations": 300, "seed": 9, "encoder": {"mode": "static", "reveal_iters": 0},
                                          "loss": {"angle": false, "lambda_after": 0.5}, "optim": {"lr": 0.001}})");
    CHECK(c.iterations == 300);
    CHECK(c.seed == 9);
    CHECK(c.encoder.mode == EncoderMode::Static);
    CHECK_FALSE(c.loss.angle);
    CHECK(c.loss.lambda_after == 0.5);
    CHECK(c.adam.learning_rate == 0.001);
  }
  SUBCASE("key=value lines") {
    const DrapeConfig c = parse_config("# comment\niterations = 200\nencoder.reveal_iters=100\nnet.width=64\n\n");
    CHECK(c.iterations == 200);
    CHECK(c.encoder.reveal_iters == 100);
    CHECK(c.net_width == 64);
    CHECK(c.net_layers == 4);
  }
  SUBCASE("round trip through format_config") {
    DrapeConfig c = small_config(77);
    c.encoder.mode = EncoderMode::None;
    c.loss.quality = false;
    const DrapeConfig back = parse_config(format_config(c));
    CHECK(format_config(back) == format_config(c));
    CHECK(back.seed == 77);
    CHECK(back.encoder.mode == EncoderMode::None);
  }
  SUBCASE("errors") {
    CHECK(code_of([] { parse_config("bogus.key = 1"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_config("iterations = ten"); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse_config("iterations = 100\nencoder.reveal_iters = 200"); }) == ErrorCode::InvalidArgument);
    DrapeConfig d;
    CHECK(code_of([&] { set_config_value(d, "encoder.mode", "fancy"); }) != ErrorCode::Io);
  }
}

TEST_CASE("session creation") {
  const SurfaceMesh s = testing::icosphere(2);

  SUBCASE("self transfer starts at the source") {
    DrapeSession session(s, small_target(s), {}, small_config());
    CHECK(session.iteration() == 0);
    CHECK(session.status() == SessionStatus::Idle);
    CHECK((session.current_vertices() - session.initial_vertices()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((session.current_vertices_original() - s.vertices()).cwiseAbs().maxCoeff() <= 1e-9);
  }
  SUBCASE("exact affine target") {
    Eigen::Matrix3d a;
    a << 1.3, 0.2, 0.0, -0.1, 0.8, 0.3, 0.05, 0.0, 0.6;
    const Vec3 b(0.4, -1.0, 2.0);
    Points tv = s.vertices() * a.transpose();
    tv.rowwise() += b.transpose();
    const SurfaceMesh t = s.with_vertices(tv);
    std::vector<Correspondence> pairs;
    for (int i : {0, 7, 19, 33}) pairs.push_back({i, tv.row(i).transpose(), CorrespondenceKind::Soft});
    DrapeSession session(s, small_target(t), {}, small_config());
    const Points preview = session.set_correspondences(CorrespondenceSet(pairs));
    CHECK((preview - tv).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((session.current_vertices_original() - tv).cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("empty inputs") {
    CHECK_THROWS_AS(DrapeSession(s, TargetShape::from_points(Points(0, 3)), small_config()), Error);
    CHECK_THROWS_AS(DrapeSession(SurfaceMesh(), small_target(s), small_config()), Error);
  }
  SUBCASE("vertex id out of range") {
    DrapeSession session(s, small_target(s), small_config());
    std::vector<Correspondence> pairs = {{100000, Vec3::Zero(), CorrespondenceKind::Soft}};
    CHECK(code_of([&] { session.set_correspondences(CorrespondenceSet(pairs)); }) == ErrorCode::OutOfRange);
  }
}

TEST_CASE("optimization contracts") {
  const SurfaceMesh s = testing::icosphere(2);
  const SurfaceMesh t = ellipsoid_target();
  const DrapeConfig cfg = small_config(3);

  DrapeSession a(s, small_target(t), pole_pairs(), cfg);
  std::vector<long> snaps;
  a.on_snapshot([&](const Snapshot& snap) {
    snaps.push_back(snap.iteration);
    CHECK(snap.vertices.rows() == static_cast<Eigen::Index>(s.vertex_count()));
  });
  a.run();
  REQUIRE(a.status() == SessionStatus::Done);
  REQUIRE(a.iteration() == 20);

  SUBCASE("determinism") {
    DrapeSession b(s, small_target(t), pole_pairs(), cfg);
    b.run();
    REQUIRE(b.loss_history().size() == a.loss_history().size());
    for (std::size_t i = 0; i < a.loss_history().size(); ++i) CHECK(b.loss_history()[i].total == a.loss_history()[i].total);
    CHECK(b.current_vertices() == a.current_vertices());
  }
  SUBCASE("alternation") {
    for (const LossReport& r : a.loss_history()) {
      CAPTURE(r.iteration);
      if (r.iteration % 2 == 0) {
        CHECK(r.loss == StepLoss::Distance);
        CHECK(r.angle == 0.0);
        CHECK(r.chamfer > 0.0);
      } else {
        CHECK(r.loss == StepLoss::Structural);
        CHECK(r.chamfer == 0.0);
        CHECK(r.weight == (r.iteration < 10 ? 1.0 : 0.2));
      }
    }
  }
  SUBCASE("snapshots every stride") {
    CHECK(snaps == std::vector<long>{5, 10, 15, 20});
  }
  SUBCASE("result keeps connectivity") {
    const DrapeResult r = a.extract_result();
    CHECK(r.mesh.same_connectivity(s));
    CHECK(r.mesh.faces() == s.faces());
    CHECK_FALSE(r.partial);
    CHECK(r.report.q_transfer > 0.0);
    CHECK(r.report.q_transfer <= 1.0);
  }
  SUBCASE("pause and resume match an uninterrupted run") {
    DrapeSession b(s, small_target(t), pole_pairs(), cfg);
    b.start();
    for (int i = 0; i < 7; ++i) b.step();
    b.pause();
    CHECK(b.status() == SessionStatus::Paused);
    b.resume();
    CHECK(b.iteration() == 7);
    b.run();
    CHECK(b.current_vertices() == a.current_vertices());
    CHECK(b.optimizer().step_count() == a.optimizer().step_count());
  }
  SUBCASE("illegal transitions") {
    DrapeSession b(s, small_target(t), cfg);
    CHECK(code_of([&] { b.pause(); }) == ErrorCode::InvalidState);
    CHECK(code_of([&] { b.resume(); }) == ErrorCode::InvalidState);
    CHECK(code_of([&] { a.start(); }) == ErrorCode::InvalidState);
    CHECK(code_of([&] { a.step(); }) == ErrorCode::InvalidState);
    CHECK(code_of([&] { a.cancel(); }) == ErrorCode::InvalidState);
  }
}

TEST_CASE("correspondence edits while paused") {
  const SurfaceMesh s = testing::icosphere(2);
  const SurfaceMesh t = ellipsoid_target();
  DrapeSession session(s, small_target(t), pole_pairs(), small_config(4));
  session.start();
  for (int i = 0; i < 8; ++i) session.step();
  session.pause();
  CHECK(code_of([&] { session.set_correspondences(pole_pairs()); }) == ErrorCode::InvalidState);

  const Points v = session.current_vertices();
  const CorrespondenceSet before = session.correspondences();

  SUBCASE("moving one target changes the term by the residual difference") {
    std::vector<Correspondence> pairs = pole_pairs().pairs();
    pairs[1].target_point += Vec3(0.0, 0.05, 0.0);
    session.update_correspondences(CorrespondenceSet(pairs));
    const CorrespondenceSet& after = session.correspondences();
    const auto& p0 = before.pairs()[1];
    const auto& p1 = after.pairs()[1];
    CHECK((p1.target_point - p0.target_point).norm() > 1e-3);
    const Vec3 vi = v.row(p0.source_vertex).transpose();
    const double delta = (vi - p1.target_point).squaredNorm() - (vi - p0.target_point).squaredNorm();
    CHECK(std::abs(correspondence_sum(v, after) - correspondence_sum(v, before) - delta) <= 1e-12);

    session.resume();
    CHECK(session.iteration() == 8);
    const LossReport r = session.step();
    CHECK(r.loss == StepLoss::Distance);
    CHECK(std::abs(r.correspondence - correspondence_sum(v, after)) <= 1e-12);
  }
  SUBCASE("removing all pairs leaves chamfer only") {
    session.update_correspondences({});
    session.resume();
    const LossReport r = session.step();
    CHECK(r.correspondence == 0.0);
    CHECK(r.total == r.chamfer);
  }
  SUBCASE("a satisfied pair adds nothing") {
    std::vector<Correspondence> pairs = pole_pairs().pairs();
    // Place a new pair exactly at the vertex's current position mapped back to the input frame.
    const Points vo = session.current_vertices_original();
    pairs.push_back({40, vo.row(40).transpose(), CorrespondenceKind::Soft});
    session.update_correspondences(CorrespondenceSet(pairs));
    const auto& added = session.correspondences().pairs().back();
    const double residual = (v.row(40).transpose() - added.target_point).squaredNorm();
    // Snapping moves the point onto the target surface, so compare against that distance.
    CHECK(std::abs(correspondence_sum(v, session.correspondences()) - correspondence_sum(v, before) - residual) <= 1e-12);
  }
}

TEST_CASE("checkpoint round trip") {
  const SurfaceMesh s = testing::icosphere(2);
  const SurfaceMesh t = ellipsoid_target();
  const auto path = std::filesystem::temp_directory_path() / "drape_unit_checkpoint.bin";

  DrapeSession a(s, small_target(t), pole_pairs(), small_config(6));
  a.start();
  for (int i = 0; i < 6; ++i) a.step();
  a.save_checkpoint(path);
  DrapeSession b = DrapeSession::load_checkpoint(path);
  std::filesystem::remove(path);

  CHECK(b.status() == SessionStatus::Paused);
  CHECK(b.iteration() == 6);
  CHECK(b.current_vertices() == a.current_vertices());
  CHECK(b.loss_history().size() == 6);
  CHECK(b.optimizer().step_count() == 6);

  a.run();
  b.resume();
  b.run();
  CHECK(b.current_vertices() == a.current_vertices());
  CHECK(b.extract_result().mesh.faces() == s.faces());

  CHECK(code_of([] { DrapeSession::load_checkpoint("/nonexistent/drape.ckpt"); }) == ErrorCode::Io);
}

TEST_CASE("cancel yields a partial result") {
  const SurfaceMesh s = testing::icosphere(2);
  DrapeSession session(s, small_target(ellipsoid_target()), small_config(2));
  session.start();
  session.step();
  session.cancel();
  CHECK(session.status() == SessionStatus::Cancelled);
  const DrapeResult r = session.extract_result();
  CHECK(r.partial);
  CHECK(r.mesh.same_connectivity(s));
}

TEST_CASE("normalization round trip") {
  const SurfaceMesh s = testing::ellipsoid(2, Vec3(3.0, -2.0, 7.0));
  NormalizationTransform tr;
  const SurfaceMesh n = normalize_to_unit_cube(s, &tr);
  CHECK((tr.invert(n.vertices()) - s.vertices()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((tr.inverse().apply(n.vertices()) - s.vertices()).cwiseAbs().maxCoeff() <= 1e-9);
}
