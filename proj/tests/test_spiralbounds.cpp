#include "bilip/spiralbounds.hpp"

#include "bilip/diffeo.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>

using namespace bilip;

TEST_SUITE("spiralbounds") {

TEST_CASE("bound report for the reference spiral") {
  const auto r = spiralbounds::spiral_bound(1.5, 1.1);
  CHECK(r.L == doctest::Approx(2.0).epsilon(1e-14));
  // Direct evaluation of |k| (alpha^2 - 1)^{-1/2}.
  const double direct = 1.5 / std::sqrt(1.1 * 1.1 - 1.0);
  CHECK(r.lower_bound_N == doctest::Approx(direct).epsilon(1e-15));
  CHECK(r.lower_bound_N == doctest::Approx(3.273268).epsilon(1e-6));
  CHECK(r.lower_bound_N_ceil == 4);
  // Interval peeling count for L = 2 at alpha = 1.1.
  CHECK(r.onedim_upper_N ==
        static_cast<int>(std::ceil(std::log(2.0) / std::log(1.1))));
}

TEST_CASE("small twist rate limit") {
  const auto r = spiralbounds::spiral_bound(1e-9, 1.1);
  CHECK(r.L == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.lower_bound_N <= 1e-8);
}

TEST_CASE("distortion relation round trip") {
  for (double k : {0.25, 1.5, 3.75}) {
    const double L = spiralbounds::spiral_bound(k, 2.0).L;
    CHECK(std::abs((L - 1.0 / L) - k) <= 1e-12);
  }
}

TEST_CASE("scan recovers the closed-form distortion") {
  CHECK(spiralbounds::spiral_distortion_scan(0.0, 0.5, 2.0, 100) == 1.0);

  const double est15 = spiralbounds::spiral_distortion_scan(1.5, 0.5, 2.0, 400);
  CHECK(est15 >= 1.99);
  CHECK(est15 <= 2.01);

  // k = 3.75 solves to L = 4 exactly.
  const double L = diffeo::SpiralParams{3.75}.distortion();
  CHECK(L == doctest::Approx(4.0).epsilon(1e-14));
  const double est375 =
      spiralbounds::spiral_distortion_scan(3.75, 0.5, 2.0, 400);
  CHECK(std::abs(est375 - 4.0) <= 0.02);
}

TEST_CASE("scan is a monotone lower estimate") {
  const double L = diffeo::SpiralParams{1.5}.distortion();
  const auto table =
      spiralbounds::spiral_scan_table(1.5, 0.5, 2.0, {16, 32, 64, 128, 256});
  double prev = 0.0;
  for (const auto& [res, est] : table) {
    CHECK(est <= L + 1e-9);
    CHECK(est >= prev);  // refinement never loses ground
    prev = est;
  }
}

TEST_CASE("lower bound scale consistency") {
  const double alpha = 1.3;
  // Halving sqrt(alpha^2 - 1) doubles the bound.
  const double alpha2 = std::sqrt(1.0 + (alpha * alpha - 1.0) / 4.0);
  const auto a = spiralbounds::spiral_bound(1.5, alpha);
  const auto b = spiralbounds::spiral_bound(1.5, alpha2);
  CHECK(b.lower_bound_N ==
        doctest::Approx(2.0 * a.lower_bound_N).epsilon(1e-12));
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(spiralbounds::spiral_bound(1.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(spiralbounds::spiral_bound(0.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(spiralbounds::spiral_distortion_scan(1.5, 0.0, 2.0, 10),
                  std::invalid_argument);
}

}  // TEST_SUITE
