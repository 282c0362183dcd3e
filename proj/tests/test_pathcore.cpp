#include "bilip/pathcore.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace bilip;

namespace {

// Points spread over the engaged balls, the gaps and the far region.
std::vector<Vec> path_sample(int n, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> pts;
  for (int i = 0; i < count; ++i) {
    if (i % 3 == 0)
      pts.push_back(rng.in_ball(Vec::Zero(n), 1.0 / 3.0));
    else if (i % 3 == 1)
      pts.push_back(rng.in_ball(unit_axis(n, 0), 1.0 / 3.0));
    else
      pts.push_back(rng.in_ball(Vec::Zero(n), 3.0));
  }
  return pts;
}

}  // namespace

TEST_SUITE("pathcore") {

TEST_CASE("propagation case analysis") {
  const auto f = diffeo::make_twist(0.3, 2);
  const auto g = pathcore::propagate(f);

  // Gap between the base ball and the first translated ball.
  Vec gap = 0.5 * unit_axis(2, 0);
  CHECK(g.ball_index(gap) == -1);
  CHECK((g.eval(gap) - gap).norm() == 0.0);

  // The base ball itself is untouched: m starts at 1.
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Vec x = rng.in_ball(Vec::Zero(2), 1.0 / 3.0);
    CHECK((g.eval(x) - x).norm() == 0.0);
  }

  // On B_1 the map is the translated conjugate of the base map.
  for (int i = 0; i < 50; ++i) {
    const Vec x = rng.in_ball(unit_axis(2, 0), 1.0 / 3.0);
    CHECK(g.ball_index(x) == 1);
    Vec local = x;
    local(0) -= 1.0;
    Vec expect = f.eval(local);
    expect(0) += 1.0;
    CHECK((g.eval(x) - expect).norm() == 0.0);
  }

  // Far balls engage as well.
  Vec far = 7.0 * unit_axis(2, 0) + 0.1 * unit_axis(2, 1);
  CHECK(g.ball_index(far) == 7);

  CHECK(g.apply(geom::Point::infinity(2)).is_infinity());
}

TEST_CASE("propagation rejects maps not supported in the base ball") {
  const auto shifted =
      diffeo::translate(diffeo::make_twist(0.3, 2), unit_axis(2, 0));
  CHECK_THROWS_AS(pathcore::propagate(shifted), std::invalid_argument);
}

TEST_CASE("propagated inverse and jacobians") {
  for (bool exact : {true, false}) {
    const auto f = exact
                       ? diffeo::make_twist(0.3, 2)
                       : diffeo::make_bump_push(unit_axis(2, 1), 0.1);
    const auto g = pathcore::propagate(f);
    Rng rng(7);
    for (int i = 0; i < 60; ++i) {
      const Vec x = rng.in_ball(unit_axis(2, 0), 0.5);
      const Vec y = g.eval(x);
      CHECK((g.eval_inverse(y) - x).norm() <= 1e-10);
      // D g^{-1} at y is the inverse of D g at x.
      const Mat ji = g.jacobian_inverse(y);
      CHECK((ji - g.jacobian(x).inverse()).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("bounds for the identity and the twist") {
  const auto grid =
      sampling::Sampler::euclid_ball(Vec::Zero(2), 1.0 / 3.0, 48, 11);

  const auto id = pathcore::propagate(diffeo::make_identity(2));
  const auto bid = pathcore::bounds(id, grid);
  CHECK(bid.T == 1.0);
  CHECK(bid.eta_slope == 0.0);
  CHECK(bid.eta_hat(1.0) == 0.0);

  const auto f = diffeo::make_twist(0.3, 2);
  const auto g = pathcore::propagate(f);
  const auto b = pathcore::bounds(g, grid);
  CHECK(b.T == f.analytic_T);
  CHECK(b.sampled_sup_dg <= b.T);
  CHECK(b.sampled_sup_dg_inverse <= b.T);
  CHECK(b.sampled_sup_dg > 1.0);  // the twist does stretch

  // Sampled modulus stays below the analytic slope line.
  for (const auto& [delta, value] : b.eta_table) {
    CHECK(value <= b.eta(delta) + 1e-12);
  }
  CHECK(b.eta_table.front().second == 0.0);
  for (std::size_t i = 1; i < b.eta_table.size(); ++i)
    CHECK(b.eta_table[i].second >= b.eta_table[i - 1].second);
}

TEST_CASE("path endpoints") {
  for (int n : {2, 3}) {
    for (bool exact : {true, false}) {
      const auto f = exact ? diffeo::make_twist(0.3, n)
                           : diffeo::make_bump_push(unit_axis(n, 1), 0.1);
      const auto g = pathcore::propagate(f);
      double worst0 = 0.0, worst1 = 0.0;
      for (const auto& x : path_sample(n, 120, 13)) {
        worst0 = std::max(worst0, (pathcore::h_eval(g, 0.0, x) - x).norm());
        worst1 = std::max(worst1,
                          (pathcore::h_eval(g, 1.0, x) - f.eval(x)).norm());
      }
      CHECK(worst0 <= 1e-9);
      CHECK(worst1 <= 1e-9);
    }
  }
  // Infinity stays fixed along the path.
  const auto g = pathcore::propagate(diffeo::make_twist(0.3, 2));
  CHECK(pathcore::h_eval(g, 0.7, geom::Point::infinity(2)).is_infinity());
}

TEST_CASE("transitions at equal times are the identity") {
  const auto g = pathcore::propagate(diffeo::make_twist(0.3, 2));
  for (const auto& x : path_sample(2, 40, 17)) {
    CHECK((pathcore::transition_eval(g, 0.4, 0.4, x) - x).norm() <= 1e-12);
    const Mat j = pathcore::transition_jacobian(g, 0.4, 0.4, x);
    CHECK((j - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("transition consistency with the path") {
  const auto g = pathcore::propagate(diffeo::make_twist(0.3, 2));
  Rng rng(19);
  for (int i = 0; i < 40; ++i) {
    const double s = rng.uniform01(), t = rng.uniform01();
    const Vec x = rng.in_ball(Vec::Zero(2), 2.0);
    const Vec via = pathcore::transition_eval(g, s, t,
                                              pathcore::h_eval(g, t, x));
    const Vec direct = pathcore::h_eval(g, s, x);
    CHECK((via - direct).norm() <= 1e-9);
  }
}

TEST_CASE("transition jacobian matches central differences") {
  for (bool exact : {true, false}) {
    const auto f = exact ? diffeo::make_twist(0.3, 2)
                         : diffeo::make_bump_push(unit_axis(2, 1), 0.1);
    const auto g = pathcore::propagate(f);
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
      const double s = rng.uniform01(), t = rng.uniform01();
      const Vec x = rng.in_ball(0.5 * unit_axis(2, 0), 1.2);
      const Mat j = pathcore::transition_jacobian(g, s, t, x);
      const Mat fd = oracles::central_difference_jacobian(
          [&](const Vec& v) { return pathcore::transition_eval(g, s, t, v); },
          x);
      CHECK((j - fd).cwiseAbs().maxCoeff() <= 1e-5);
    }
  }
}

TEST_CASE("transitions compose like a groupoid") {
  const auto g = pathcore::propagate(diffeo::make_twist(0.3, 2));
  Rng rng(29);
  for (int i = 0; i < 30; ++i) {
    const double s = rng.uniform01(), u = rng.uniform01(), t = rng.uniform01();
    const Vec x = rng.in_ball(Vec::Zero(2), 2.0);
    const Vec chained = pathcore::transition_eval(
        g, s, u, pathcore::transition_eval(g, u, t, x));
    const Vec direct = pathcore::transition_eval(g, s, t, x);
    CHECK((chained - direct).norm() <= 1e-8);
  }
}

TEST_CASE("theoretical bounds degenerate cases") {
  pathcore::PathBounds trivial;
  trivial.T = 1.0;
  trivial.eta_slope = 0.0;
  const auto tb = pathcore::theoretical_bounds(trivial, 0.9, 0.1);
  CHECK(tb.disp == 0.0);
  CHECK(tb.deriv == 0.0);

  pathcore::PathBounds b;
  b.T = 2.0;
  b.eta_slope = 3.0;
  const auto same = pathcore::theoretical_bounds(b, 0.37, 0.37);
  CHECK(same.disp == 0.0);
  CHECK(same.deriv == 0.0);
}

TEST_CASE("displacement inequality on a sampled sweep") {
  const auto f = diffeo::make_twist(0.3, 2);
  const auto g = pathcore::propagate(f);
  const auto b = pathcore::bounds(
      g, sampling::Sampler::euclid_ball(Vec::Zero(2), 1.0 / 3.0, 48, 31));

  const auto pts = path_sample(2, 40, 37);
  Rng rng(41);
  for (int i = 0; i < 60; ++i) {
    const double t = rng.uniform01();
    const double s = std::clamp(t + 0.01 * (rng.uniform01() - 0.5), 0.0, 1.0);
    const auto tb = pathcore::theoretical_bounds(b, s, t);
    for (const auto& x : pts) {
      const double disp = (pathcore::transition_eval(g, s, t, x) - x).norm();
      CHECK(disp <= tb.disp + 1e-9);
      const Mat j = pathcore::transition_jacobian(g, s, t, x);
      CHECK(spectral_norm(j - Mat::Identity(2, 2)) <= tb.deriv + 1e-8);
    }
  }
}

TEST_CASE("index base regression: including the base ball breaks h_1") {
  const auto f = diffeo::make_twist(0.3, 2);
  const auto wrong =
      pathcore::propagate(f, pathcore::Indexing::from_zero_variant);

  Rng rng(43);
  double dist_to_identity = 0.0, dist_to_f = 0.0;
  for (int i = 0; i < 80; ++i) {
    const Vec x = rng.in_ball(Vec::Zero(2), 1.0 / 3.0);
    const Vec h1 = pathcore::h_eval(wrong, 1.0, x);
    dist_to_identity = std::max(dist_to_identity, (h1 - x).norm());
    dist_to_f = std::max(dist_to_f, (h1 - f.eval(x)).norm());
  }
  // The variant collapses the path endpoint to the identity instead of f.
  CHECK(dist_to_identity <= 1e-9);
  CHECK(dist_to_f > 0.01);
}

TEST_CASE("transition csv table") {
  const auto g = pathcore::propagate(diffeo::make_twist(0.3, 2));
  const auto b = pathcore::bounds(
      g, sampling::Sampler::euclid_ball(Vec::Zero(2), 1.0 / 3.0, 32, 47));
  std::ostringstream out;
  pathcore::write_transition_csv(
      out, g, b, {{0.1, 0.12}, {0.5, 0.51}},
      sampling::Sampler::euclid_ball(Vec::Zero(2), 2.0, 16, 47));
  const std::string text = out.str();
  CHECK(text.find("s,t,sampled_max_disp,disp_bound") == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

}  // TEST_SUITE
