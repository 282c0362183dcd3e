#include "bilip/certify.hpp"

#include "bilip/pathcore.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <memory>

using namespace bilip;
using geom::Point;

TEST_SUITE("certify") {

TEST_CASE("identity certificate") {
  const auto cert = certify::estimate_distortion(
      certify::map_under_test(diffeo::make_identity(2)),
      sampling::Sampler::sphere(2, 64, 3), certify::Metric::spherical);
  CHECK(cert.L_lower == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cert.max_disp == 0.0);
  CHECK(cert.point_count == 64);
  CHECK(cert.pair_count > 0);
}

TEST_CASE("similarity has exact euclidean ratio") {
  const auto g = geom::MobiusMap::similarity(2, 2.0, Vec::Zero(2));
  const auto cert = certify::estimate_distortion(
      certify::map_under_test(g),
      sampling::Sampler::euclid_ball(Vec::Zero(2), 2.0, 80, 5),
      certify::Metric::euclidean);
  CHECK(cert.L_lower == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("spiral distortion from pair sampling on an annulus") {
  const auto spiral = diffeo::make_spiral(1.5);
  certify::MapUnderTest mut;
  mut.dim = 2;
  mut.eval = [spiral](const Point& x) { return spiral.apply(x); };
  const auto cert = certify::estimate_distortion(
      mut, sampling::Sampler::annulus(0.5, 2.0, 1200, 7),
      certify::Metric::euclidean);
  CHECK(cert.L_lower >= 1.95);
  CHECK(cert.L_lower <= 2.0 + 1e-9);
}

TEST_CASE("twist gets a derivative-based euclidean upper bound") {
  const auto f = diffeo::make_twist(0.3, 2);
  const auto cert = certify::estimate_distortion(
      certify::map_under_test(f),
      sampling::Sampler::euclid_ball(Vec::Zero(2), 0.4, 120, 11),
      certify::Metric::euclidean);
  REQUIRE(cert.L_upper.has_value());
  CHECK(cert.L_lower <= *cert.L_upper);
  CHECK(*cert.L_upper <= f.analytic_T * 1.5);
  CHECK(cert.L_lower > 1.05);
}

TEST_CASE("degenerate pairs are skipped and reported") {
  certify::MapUnderTest id;
  id.dim = 2;
  id.eval = [](const Point& x) { return x; };
  std::vector<Point> pts = {Point::origin(2), Point::origin(2),
                            Point::finite(unit_axis(2, 0))};
  const auto cert =
      certify::estimate_distortion(id, pts, certify::Metric::spherical, 0);
  CHECK(cert.skipped_pairs == 1);
  CHECK(cert.pair_count == 2);
}

TEST_CASE("monotone refinement of the sampled lower bound") {
  const auto f = diffeo::make_twist(0.35, 2);
  const auto mut = certify::map_under_test(f);
  double previous = 0.0;
  for (int count : {50, 100, 200, 400}) {
    const auto cert = certify::estimate_distortion(
        mut, sampling::Sampler::sphere(2, count, 13),
        certify::Metric::spherical);
    CHECK(cert.L_lower >= previous);
    previous = cert.L_lower;
  }
}

TEST_CASE("transfer constants in closed form") {
  CHECK(certify::eps_prime(0.0) == 0.0);
  CHECK(certify::xi(0.0) == 0.0);
  CHECK_THROWS_AS(certify::eps_prime(-0.1), std::invalid_argument);

  // Brute-force maximization over r on a fine grid.
  for (double eps : {0.02, 0.1, 0.5}) {
    const double brute = oracles::grid_max(
        [eps](double r) {
          return eps * (2.0 * r + eps) / (1.0 + r * r);
        },
        0.0, 100.0, 1000000);
    CHECK(std::abs(certify::eps_prime(eps) - brute) <= 1e-9);
    CHECK(certify::eps_prime(eps) >= brute);
  }
  CHECK(certify::eps_prime(0.1) == doctest::Approx(0.10512).epsilon(1e-4));

  // Monotone in eps.
  double prev = 0.0;
  for (double eps = 0.0; eps <= 1.0; eps += 0.05) {
    const double v = certify::xi(eps);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("spherical transfer bounds a certified path slice") {
  const auto f = diffeo::make_twist(0.3, 2);
  const auto g = std::make_shared<pathcore::PropagatedMap>(
      pathcore::propagate(f));
  const auto b = pathcore::bounds(
      *g, sampling::Sampler::euclid_ball(Vec::Zero(2), 1.0 / 3.0, 48, 17));

  const double s = 0.3005, t = 0.3;
  const auto tb = pathcore::theoretical_bounds(b, s, t);
  REQUIRE(tb.deriv < 1.0);
  const double eps_euclid =
      std::max(tb.deriv / (1.0 - tb.deriv), tb.disp);
  const double chi_bound = 1.0 + certify::xi(eps_euclid);

  certify::MapUnderTest slice;
  slice.dim = 2;
  slice.eval = [g, s, t](const Point& x) {
    if (x.is_infinity()) return x;
    return Point::finite(pathcore::transition_eval(*g, s, t, x.coords()));
  };
  const auto cert = certify::estimate_distortion(
      slice, sampling::Sampler::sphere(2, 150, 19),
      certify::Metric::spherical);
  CHECK(cert.L_lower <= chi_bound + 1e-9);
  CHECK(cert.max_disp <= tb.disp + 1e-9);
}

TEST_CASE("conjugation by the identity changes nothing") {
  const auto f = diffeo::make_twist(0.3, 2);
  certify::MapUnderTest mut = certify::map_under_test(f);
  const auto sampler = sampling::Sampler::sphere(2, 80, 23);
  const auto direct = certify::estimate_distortion(
      mut, sampler, certify::Metric::spherical);
  const auto report = certify::conjugation_check(
      geom::MobiusMap::identity(2), mut, sampler);
  CHECK(report.certificate.L_lower ==
        doctest::Approx(direct.L_lower).epsilon(1e-12));
  CHECK(report.certificate.max_disp ==
        doctest::Approx(direct.max_disp).epsilon(1e-12));
  CHECK(report.isometry_deviation == 0.0);
  CHECK(report.affine_deviation == 0.0);
}

TEST_CASE("conjugation by a rotation is a spherical isometry") {
  const auto f = diffeo::make_twist(0.3, 2);
  certify::MapUnderTest mut = certify::map_under_test(f);
  const auto rot = geom::rotation_fixing(Point::finite(2.0 * unit_axis(2, 0)),
                                         0.8);
  const auto sampler = sampling::Sampler::sphere(2, 80, 23);
  const auto report = certify::conjugation_check(
      geom::MobiusMap::rotation(rot), mut, sampler);
  CHECK(report.isometry_deviation <= 1e-10);

  // Certify the conjugate against the original on the rotated point set:
  // the spherical certificate is unchanged.
  std::vector<Point> rotated;
  for (const auto& p : sampler.points()) rotated.push_back(rot.apply(p));
  certify::MapUnderTest conj;
  conj.dim = 2;
  conj.eval = [f, rot](const Point& x) {
    return rot.apply(f.apply(rot.inverse().apply(x)));
  };
  const auto direct = certify::estimate_distortion(
      mut, sampler, certify::Metric::spherical);
  const auto moved = certify::estimate_distortion(
      conj, rotated, certify::Metric::spherical, sampler.seed());
  CHECK(moved.L_lower == doctest::Approx(direct.L_lower).epsilon(1e-6));
  CHECK(moved.max_disp == doctest::Approx(direct.max_disp).epsilon(1e-6));

  // Same sampler without the rotation: values agree within sampling noise.
  const auto same_seed = certify::estimate_distortion(
      conj, sampler, certify::Metric::spherical);
  CHECK(std::abs(same_seed.L_lower - direct.L_lower) <= 0.15);
}

TEST_CASE("similarity conjugation scales euclidean displacement exactly") {
  const auto f = diffeo::make_twist(0.3, 2);
  const double lam = 3.0;
  const auto g = geom::MobiusMap::similarity(2, lam, Vec::Zero(2));
  Rng rng(29);
  for (int i = 0; i < 100; ++i) {
    const Vec x = rng.in_ball(Vec::Zero(2), 2.0);
    const Vec inner = x / lam;
    const double base_disp = (f.eval(inner) - inner).norm();
    const Vec conj = lam * f.eval(inner);
    const double conj_disp = (conj - x).norm();
    CHECK(conj_disp == doctest::Approx(lam * base_disp).epsilon(1e-10));
  }
  // The primitive check sees the exact scale.
  const auto report = certify::conjugation_check(
      g, certify::map_under_test(f), sampling::Sampler::sphere(2, 60, 31));
  CHECK(report.affine_scale == doctest::Approx(lam));
  CHECK(report.affine_deviation <= 1e-10);
}

TEST_CASE("conjugation by a full normalizer word checks both primitives") {
  const geom::SphericalBall ball(Point::finite(Vec::Constant(2, 0.7)), 0.3);
  const auto g = geom::ball_normalizer(ball);
  REQUIRE(g.is_isometry_after_affine());
  const auto f = diffeo::make_twist(0.25, 2);
  const auto report = certify::conjugation_check(
      g, certify::map_under_test(f), sampling::Sampler::sphere(2, 60, 37));
  CHECK(report.isometry_deviation <= 1e-10);
  CHECK(report.affine_deviation <= 1e-10);
  CHECK(report.affine_scale ==
        doctest::Approx(3.0 * geom::chi_ball_euclid_radius(ball.radius)));
  CHECK(report.certificate.metric == certify::Metric::spherical);
  CHECK(report.certificate.L_lower >= 1.0);
}

TEST_CASE("certificate json serialization carries every field") {
  certify::DistortionCertificate cert;
  cert.metric = certify::Metric::spherical;
  cert.L_lower = 1.25;
  cert.L_upper = 1.5;
  cert.max_disp = 0.01;
  cert.disp_upper = 0.05;
  cert.point_count = 10;
  cert.pair_count = 45;
  cert.seed = 99;
  const auto j = certify::to_json(cert);
  CHECK(j["metric"] == "spherical");
  CHECK(j["L_lower"] == 1.25);
  CHECK(j["L_upper"] == 1.5);
  CHECK(j["disp_upper"] == 0.05);
  CHECK(j["seed"] == 99);
}

}  // TEST_SUITE
