#include <doctest.h>

#include "core/error.hpp"
#include "core/random.hpp"
#include "geometry/measures.hpp"
#include "objective/objective.hpp"
#include "shapes.hpp"

#include <cmath>
#include <functional>
#include <numbers>

using namespace drape;

namespace {

Points pts(std::initializer_list<std::array<double, 3>> rows) {
  Points p(static_cast<Eigen::Index>(rows.size()), 3);
  Eigen::Index i = 0;
  for (const auto& r : rows) p.row(i++) << r[0], r[1], r[2];
  return p;
}

Points perturbed(const Points& p, std::uint64_t seed, double amount) {
  Rng rng(seed);
  Points out = p;
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += rng.uniform(-amount, amount);
  return out;
}

// Central differences of f over every vertex coordinate.
Points finite_difference(const Points& x, const std::function<double(const Points&)>& f, double h = 1e-4) {
  Points g(x.rows(), 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (int k = 0; k < 3; ++k) {
      Points a = x, b = x;
      a(i, k) += h;
      b(i, k) -= h;
      g(i, k) = (f(a) - f(b)) / (2 * h);
    }
  return g;
}

double relative_error(const Points& analytic, const Points& numeric) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-12);
}

}  // namespace

TEST_CASE("chamfer examples" * doctest::test_suite("formula")) {
  CHECK(chamfer(pts({{0, 0, 0}}), pts({{1, 0, 0}})) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(chamfer(pts({{0, 0, 0}, {2, 0, 0}}), pts({{0, 0, 0}})) == doctest::Approx(2.0).epsilon(1e-12));
  const Points a = perturbed(Points::Zero(30, 3), 3, 1.0);
  CHECK(chamfer(a, a) == 0.0);
  const Points b = perturbed(Points::Zero(17, 3), 4, 1.0);
  CHECK(chamfer(a, b) == doctest::Approx(chamfer(b, a)).epsilon(1e-12));
}

TEST_CASE("distance loss" * doctest::test_suite("formula")) {
  const SurfaceMesh m = testing::icosphere(2);
  const TargetShape t = TargetShape::from_mesh(m, 5000);
  DistanceLossOptions opts;
  opts.samples = 500;
  opts.seed = 42;

  SUBCASE("identical shapes with a shared seed") {
    CHECK(distance_loss(m, t, {}, opts).total == 0.0);
  }
  SUBCASE("one pair adds its squared distance") {
    const Vec3 v = m.vertices().row(10);
    const Vec3 u = v + Vec3(0.3, 0, 0);
    const DistanceLossValue base = distance_loss(m, t, {}, opts);
    const DistanceLossValue with = distance_loss(m, t, CorrespondenceSet({{10, u, CorrespondenceKind::Soft}}), opts);
    CHECK(with.total == doctest::Approx(base.chamfer + 0.09).epsilon(1e-12));
    CHECK(with.correspondence == doctest::Approx(0.09).epsilon(1e-12));
  }
  SUBCASE("satisfied pairs leave the loss unchanged") {
    std::vector<Correspondence> pairs;
    for (int i : {0, 4, 9}) pairs.push_back({i, m.vertices().row(i).transpose(), CorrespondenceKind::Rigid});
    CHECK(distance_loss(m, t, CorrespondenceSet(pairs), opts).total == distance_loss(m, t, {}, opts).total);
  }
}

TEST_CASE("angle term on one triangle" * doctest::test_suite("formula")) {
  const double pi = std::numbers::pi;
  const SurfaceMesh eq(pts({{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}}), {Face::tri(0, 1, 2)});
  const SurfaceMesh right = eq.with_vertices(pts({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}));
  const double expected = (pi / 6) * (pi / 6) + 2 * (pi / 12) * (pi / 12);
  CHECK(std::abs(angle_term(eq, right) - expected) <= 1e-6);
  CHECK(std::abs(expected - 0.4112) < 1e-4);
  CHECK(angle_term(eq, eq) == 0.0);
}

TEST_CASE("area KL for one vertex" * doctest::test_suite("formula")) {
  // Vertex 0 touches two triangles of equal area in the source, 0.9/0.1 of
  // its local area after deformation. The other vertices each touch a
  // single triangle, so their distributions are trivially equal.
  const Points src = pts({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}});
  const SurfaceMesh m(src, {Face::tri(0, 1, 2), Face::tri(0, 3, 4)});
  Points def = src;
  def.row(1) << 1.8, 0, 0;
  def.row(2) << 0, 1, 0;
  def.row(3) << -0.2, 0, 0;
  const SurfaceMesh d = m.with_vertices(def);
  const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  CHECK(std::abs(expected - 0.5108) < 1e-4);
  CHECK(std::abs(area_kl_term(m, d) * 5 - expected) <= 1e-6);
  // Invariant under uniform scaling.
  CHECK(area_kl_term(m, m.with_vertices(3.0 * def)) == doctest::Approx(area_kl_term(m, d)).epsilon(1e-12));
}

TEST_CASE("quality penalty threshold" * doctest::test_suite("formula")) {
  // Isoceles sliver with quality exactly 0.05: 2 sqrt(3) h / (1.5 + 2 h^2) = 0.05.
  const double s3 = std::sqrt(3.0);
  const double h = (2 * s3 - std::sqrt(12.0 - 4 * 0.1 * 0.075)) / (2 * 0.1);
  const Points p = pts({{0, 0, 0}, {1, 0, 0}, {0.5, h, 0}});
  REQUIRE(face_quality(p.row(0), p.row(1), p.row(2)) == doctest::Approx(0.05).epsilon(1e-12));
  const SurfaceMesh m(p, {Face::tri(0, 1, 2)});
  CHECK(std::abs(quality_penalty(m) - 0.95) <= 1e-9);
  // A good triangle costs nothing.
  const SurfaceMesh good = m.with_vertices(pts({{0, 0, 0}, {1, 0, 0}, {0.5, 0.8, 0}}));
  CHECK(quality_penalty(good) == 0.0);
}

TEST_CASE("structural loss is the sum of its terms" * doctest::test_suite("formula")) {
  const SurfaceMesh src = testing::icosphere(2);
  const SurfaceMesh def = src.with_vertices(perturbed(src.vertices(), 7, 0.05));
  const StructuralLossValue v = structural_loss(src, def);
  CHECK(std::abs(v.total - (angle_term(src, def) + area_kl_term(src, def) + quality_penalty(def))) <= 1e-12);
  CHECK(v.angle > 0);
  CHECK(v.area_kl > 0);

  StructuralToggles no_angle;
  no_angle.angle = false;
  CHECK(structural_loss(src, def, no_angle).total == doctest::Approx(v.area_kl + v.quality).epsilon(1e-12));
}

TEST_CASE("structural terms are invariant under rigid motion") {
  const SurfaceMesh src = testing::icosphere(2);
  const Points def = perturbed(src.vertices(), 8, 0.05);
  const Eigen::Matrix3d r = Eigen::AngleAxisd(1.1, Vec3(0.3, -1, 0.2).normalized()).toRotationMatrix();
  const Points moved = (def * r.transpose()).rowwise() + Eigen::RowVector3d(4, 5, -6);
  CHECK(std::abs(angle_term(src, src.with_vertices(def)) - angle_term(src, src.with_vertices(moved))) <= 1e-9);
  CHECK(std::abs(area_kl_term(src, src.with_vertices(def)) - area_kl_term(src, src.with_vertices(moved))) <= 1e-9);
}

struct GradientCase {
  SurfaceMesh source;
  Points x;
};

GradientCase gradient_case(std::uint64_t seed) {
  GradientCase c{testing::random_mesh(seed), {}};
  REQUIRE(c.source.vertex_count() == 20);
  c.x = perturbed(c.source.vertices(), seed + 50, 0.08);
  return c;
}

TEST_CASE("angle term gradient" * doctest::test_suite("gradients")) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    const GradientCase c = gradient_case(seed);
    const StructuralLoss loss(c.source);
    Points g = Points::Zero(20, 3);
    loss.angle_term(c.x, &g);
    CHECK(relative_error(g, finite_difference(c.x, [&](const Points& y) { return loss.angle_term(y); })) <= 1e-4);
  }
}

TEST_CASE("area KL gradient" * doctest::test_suite("gradients")) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    const GradientCase c = gradient_case(seed);
    const StructuralLoss loss(c.source);
    Points g = Points::Zero(20, 3);
    loss.area_kl_term(c.x, &g);
    CHECK(relative_error(g, finite_difference(c.x, [&](const Points& y) { return loss.area_kl_term(y); })) <= 1e-4);
  }
}

TEST_CASE("quality penalty gradient" * doctest::test_suite("gradients")) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    const GradientCase c = gradient_case(seed);
    const StructuralLoss loss(c.source);
    // Stretch along x so that faces become slivers. Stretching rather than
    // flattening keeps the short edges long compared with h. The factor is
    // chosen so that no face sits right at the threshold.
    auto margin = [&](const Points& p, int* below) {
      double m = 1e300;
      *below = 0;
      for (Eigen::Index t = 0; t < c.source.triangles().rows(); ++t) {
        const auto f = c.source.triangles().row(t);
        const double q = face_quality(p.row(f(0)), p.row(f(1)), p.row(f(2)));
        m = std::min(m, std::abs(q - kQualityThreshold));
        *below += q < kQualityThreshold;
      }
      return m;
    };
    Points thin;
    int below = 0;
    for (double stretch = 30.0;; stretch += 1.0) {
      REQUIRE(stretch < 60.0);
      thin = c.x;
      thin.col(0) *= stretch;
      if (margin(thin, &below) > 1e-3 && below > 0) break;
    }
    Points g = Points::Zero(20, 3);
    CHECK(loss.quality_penalty(thin, &g) > 0);
    CHECK(relative_error(g, finite_difference(thin, [&](const Points& y) { return loss.quality_penalty(y); })) <= 1e-4);
  }
}

TEST_CASE("distance loss gradient" * doctest::test_suite("gradients")) {
  // Sample positions stay attached to their triangles and barycentric
  // coordinates, so the loss is smooth away from nearest-neighbour switches.
  // Few samples per side keep such switches out of the +-h stencil.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    const GradientCase c = gradient_case(seed);
    const TargetShape target = TargetShape::from_mesh(testing::random_mesh(seed + 1000), 2000);
    const PointSet surface = sample_surface(c.x, c.source.triangles(), 30, seed);
    const Points tsamples = target.sample(30, seed + 7).points;
    std::vector<Correspondence> pairs = {{2, Vec3(0.1, 0.2, 0.3), CorrespondenceKind::Soft},
                                         {11, Vec3(0.5, 0.9, -0.1), CorrespondenceKind::Rigid}};
    const CorrespondenceSet corr(pairs);
    const DistanceLossOptions opts;
    auto f = [&](const Points& y) {
      return distance_loss_with_samples(y, c.source.triangles(), surface, tsamples, corr, opts).total;
    };
    Points g = Points::Zero(20, 3);
    distance_loss_with_samples(c.x, c.source.triangles(), surface, tsamples, corr, opts, &g);
    CHECK(relative_error(g, finite_difference(c.x, f)) <= 1e-4);
  }
}

TEST_CASE("alternation schedule" * doctest::test_suite("formula")) {
  const LossConfig cfg;
  CHECK(select_step_loss(0, cfg).loss == StepLoss::Distance);
  CHECK(select_step_loss(998, cfg).loss == StepLoss::Distance);
  const StepSelection a = select_step_loss(999, cfg);
  CHECK(a.loss == StepLoss::Structural);
  CHECK(a.weight == 1.0);
  const StepSelection b = select_step_loss(1001, cfg);
  CHECK(b.loss == StepLoss::Structural);
  CHECK(b.weight == 0.2);
  CHECK(lambda_at(1000, cfg) == 0.2);
  LossConfig bad;
  bad.chamfer_samples = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}
