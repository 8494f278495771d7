#include <doctest.h>

#include "core/error.hpp"
#include "geometry/normalize.hpp"
#include "metrics/metrics.hpp"
#include "shapes.hpp"

#include <cmath>

using namespace drape;

namespace {

MetricConfig quick_config(std::uint64_t seed = 0) {
  MetricConfig c;
  c.samples = 2000;
  c.dense_samples = 5000;
  c.seed = seed;
  return c;
}

// Dirichlet energy from per-triangle first fundamental forms: for the map
// restricted to a face, ||J||^2 = tr(G_src^-1 G_def).
double dirichlet_oracle(const SurfaceMesh& src, const SurfaceMesh& def) {
  double num = 0.0, den = 0.0;
  const Triangles& t = src.triangles();
  for (Eigen::Index f = 0; f < t.rows(); ++f) {
    auto form = [&](const Points& p) {
      const Vec3 e1 = p.row(t(f, 1)) - p.row(t(f, 0));
      const Vec3 e2 = p.row(t(f, 2)) - p.row(t(f, 0));
      Eigen::Matrix2d g;
      g << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
      return g;
    };
    const Eigen::Matrix2d gs = form(src.vertices()), gd = form(def.vertices());
    const double area = 0.5 * std::sqrt(gs.determinant());
    num += (gs.inverse() * gd).trace() * area;
    den += area;
  }
  return num / (2.0 * den);
}

}  // namespace

TEST_CASE("hausdorff examples" * doctest::test_suite("formula")) {
  Points a(1, 3), b(1, 3);
  a << 0, 0, 0;
  b << 1, 0, 0;
  CHECK(hausdorff(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  Points c(3, 3), d(2, 3);
  c << 0, 0, 0, 1, 0, 0, 5, 0, 0;
  d << 0, 0, 0, 1, 1, 0;
  CHECK(hausdorff(c, d) == hausdorff(d, c));
  CHECK(hausdorff(c, d) == doctest::Approx(std::sqrt(17.0)).epsilon(1e-12));
  CHECK(hausdorff(c, c) == 0.0);
  CHECK_THROWS_AS(hausdorff(Points(0, 3), c), Error);
}

TEST_CASE("q_transfer examples" * doctest::test_suite("formula")) {
  CHECK(q_transfer(0.0, 0.0, 5.0) == 1.0);
  CHECK(std::abs(q_transfer(2.0, 3.0, 5.0) - (1.0 - std::exp(-1.0))) <= 1e-12);
  CHECK(std::abs(q_transfer(2.0, 3.0, 5.0) - 0.6321) <= 1e-4);
  CHECK(q_transfer(1e6, 1e6, 5.0) < 1e-5);
  CHECK_THROWS_AS(q_transfer(-1.0, 0.0, 5.0), Error);
  CHECK_THROWS_AS(q_transfer(1.0, 0.0, 0.0), Error);

  double prev = 1.0;
  for (double s = 1.0; s < 50; s *= 1.5) {
    const double q = q_transfer(s, 0.0, 5.0);
    CHECK(q < prev);
    CHECK(q_transfer(s, 0.0, 2.0) < q);
    prev = q;
  }
}

TEST_CASE("alignment measure scales hausdorff by w_a" * doctest::test_suite("formula")) {
  const SurfaceMesh m = testing::icosphere(2);
  const MetricConfig cfg = quick_config();
  const TargetShape t = TargetShape::from_mesh(m, cfg.dense_samples);
  const SurfaceAlignment a = surface_alignment(t, m, cfg);
  CHECK(alignment_measure(t, m, cfg) == doctest::Approx(100.0 * a.hausdorff).epsilon(1e-12));
  MetricConfig doubled = cfg;
  doubled.w_a = 200.0;
  CHECK(alignment_measure(t, m, doubled) == doctest::Approx(2.0 * alignment_measure(t, m, cfg)).epsilon(1e-12));
}

TEST_CASE("identical triple") {
  const SurfaceMesh m = testing::ellipsoid(4, Vec3(1.0, 0.7, 0.5));
  MetricConfig cfg;
  cfg.samples = 2000;
  const TransferReport r = evaluate_transfer(m, m, TargetShape::from_mesh(m), cfg);
  CHECK(std::abs(r.dirichlet) <= 1e-9);
  CHECK(r.dirichlet_energy == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.chamfer < 1e-3);
  CHECK(r.q_transfer > 0.95);
  CHECK(r.f_a == doctest::Approx(100.0 * r.hausdorff).epsilon(1e-12));
}

TEST_CASE("target scaled by two is the same shape after normalization") {
  const SurfaceMesh m = testing::ellipsoid(3, Vec3(1.0, 0.7, 0.5));
  const MetricConfig cfg = quick_config(2);
  const TransferReport same = evaluate_transfer(m, m, TargetShape::from_mesh(m, 5000), cfg);
  const TransferReport scaled = evaluate_transfer(m, m, TargetShape::from_mesh(m.with_vertices(2.0 * m.vertices()), 5000), cfg);
  CHECK(std::abs(scaled.f_a - same.f_a) <= 1e-6);
  CHECK(std::abs(scaled.chamfer - same.chamfer) <= 1e-9);
}

TEST_CASE("report invariances") {
  const SurfaceMesh src = testing::icosphere(3);
  const SurfaceMesh res = testing::ellipsoid(3, Vec3(1.0, 0.72, 0.5));
  const SurfaceMesh tgt = testing::ellipsoid(3, Vec3(1.0, 0.7, 0.5));
  const MetricConfig cfg = quick_config(5);
  const TransferReport base = evaluate_transfer(src, res, TargetShape::from_mesh(tgt, 5000), cfg);

  SUBCASE("uniform scale of all inputs") {
    const TransferReport s = evaluate_transfer(src.with_vertices(src.vertices() * 3.0), res.with_vertices(res.vertices() * 3.0),
                                               TargetShape::from_mesh(tgt.with_vertices(tgt.vertices() * 3.0), 5000), cfg);
    CHECK(std::abs(s.chamfer - base.chamfer) <= 1e-6);
    CHECK(std::abs(s.hausdorff - base.hausdorff) <= 1e-6);
    CHECK(std::abs(s.dirichlet - base.dirichlet) <= 1e-6);
    CHECK(std::abs(s.q_transfer - base.q_transfer) <= 1e-6);
  }
  SUBCASE("axis-aligned rigid motion of result and target") {
    Eigen::Matrix3d r;
    r << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    auto move = [&](const SurfaceMesh& m) {
      Points p = m.vertices() * r.transpose();
      p.rowwise() += Eigen::RowVector3d(2, -7, 0.5);
      return m.with_vertices(p);
    };
    const TransferReport s = evaluate_transfer(src, move(res), TargetShape::from_mesh(move(tgt), 5000), cfg);
    CHECK(std::abs(s.chamfer - base.chamfer) <= 1e-6);
    CHECK(std::abs(s.hausdorff - base.hausdorff) <= 1e-6);
    CHECK(std::abs(s.dirichlet - base.dirichlet) <= 1e-6);
    CHECK(std::abs(s.q_transfer - base.q_transfer) <= 1e-6);
  }
}

TEST_CASE("report terms recombine" * doctest::test_suite("formula")) {
  // Sheared, stretched copy of a sphere evaluated against an ellipsoid.
  const SurfaceMesh src = testing::icosphere(3);
  Eigen::Matrix3d a;
  a << 1.2, 0.3, 0, 0, 0.8, 0, 0.1, 0, 0.6;
  const SurfaceMesh res = src.with_vertices(src.vertices() * a.transpose());
  const SurfaceMesh tgt = testing::ellipsoid(3, Vec3(1.0, 0.7, 0.5));
  const MetricConfig cfg = quick_config(9);
  const TransferReport r = evaluate_transfer(src, res, TargetShape::from_mesh(tgt, cfg.dense_samples), cfg);

  // Each shape goes to the unit cube on its own.
  auto unit = [](const SurfaceMesh& m) {
    const Eigen::RowVector3d lo = m.vertices().colwise().minCoeff(), hi = m.vertices().colwise().maxCoeff();
    const double ext = (hi - lo).maxCoeff();
    Points p = m.vertices();
    p.rowwise() -= 0.5 * (lo + hi);
    p /= ext;
    p.array() += 0.5;
    return m.with_vertices(p);
  };
  const double energy = dirichlet_oracle(unit(src), unit(res));
  CHECK(std::abs(r.dirichlet_energy - energy) <= 1e-9);
  CHECK(std::abs(r.dirichlet - (energy - 1.0)) <= 1e-9);
  CHECK(std::abs(r.f_a - 100.0 * r.hausdorff) <= 1e-12);
  CHECK(std::abs(r.q_transfer - (1.0 - std::exp(-5.0 / std::abs(r.dirichlet + r.f_a)))) <= 1e-12);
  CHECK(r.hausdorff >= std::sqrt(r.chamfer / 2.0) - 1e-12);

  MetricConfig lower = cfg;
  lower.tau = 2.0;
  CHECK(evaluate_transfer(src, res, TargetShape::from_mesh(tgt, cfg.dense_samples), lower).q_transfer < r.q_transfer);
}

TEST_CASE("evaluate_transfer rejects mismatched connectivity") {
  const SurfaceMesh a = testing::icosphere(2), b = testing::icosphere(3);
  CHECK_THROWS_AS(evaluate_transfer(a, b, TargetShape::from_mesh(b, 1000), quick_config()), Error);
  MetricConfig bad = quick_config();
  bad.tau = 0.0;
  CHECK_THROWS_AS(evaluate_transfer(a, a, TargetShape::from_mesh(a, 1000), bad), Error);
}

TEST_CASE("report json round trip") {
  TransferReport r;
  r.chamfer = 1.25e-5;
  r.hausdorff = 0.0123456789012345;
  r.dirichlet = -0.3;
  r.dirichlet_energy = 0.7;
  r.f_a = 1.23456789012345;
  r.q_transfer = 0.987654321;
  r.tau = 4.0;
  r.w_a = 50.0;
  r.seed = 0xfedcba9876543210ull;
  const TransferReport back = report_from_json(report_to_json(r));
  CHECK(back.chamfer == r.chamfer);
  CHECK(back.hausdorff == r.hausdorff);
  CHECK(back.dirichlet == r.dirichlet);
  CHECK(back.dirichlet_energy == r.dirichlet_energy);
  CHECK(back.f_a == r.f_a);
  CHECK(back.q_transfer == r.q_transfer);
  CHECK(back.tau == r.tau);
  CHECK(back.w_a == r.w_a);
  CHECK(back.seed == r.seed);
  CHECK_THROWS_AS(report_from_json("{\"chamfer\": 1}"), Error);
  CHECK_THROWS_AS(report_from_json("not json"), Error);
}
