// Explicit interval factorization: an L-bi-Lipschitz map of an interval
// splits as f2 o f1 with f1(x) the integral of |f'|^lambda from a fixed
// basepoint, lambda = log_L(alpha); peeling repeatedly yields fewer than
// log_alpha(L) + 1 factors of distortion at most alpha.
#pragma once

#include "bilip/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bilip::onedim {

// Increasing C1 interval map with a certified bi-Lipschitz constant:
// 1/L <= f' <= L on [a, b].
struct IntervalMap {
  double a = 0.0;
  double b = 1.0;
  std::function<double(double)> eval;
  std::function<double(double)> derivative;
  double L = 1.0;
  std::string name;
};

IntervalMap identity_map();
IntervalMap linear_map(double slope);           // slope * x on [0,1]
IntervalMap quadratic_map();                    // x^2/2 + x on [0,1], L = 2
IntervalMap sine_map(double c);                 // x + c sin(pi x), c < 1/pi

// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& fn, double a,
                        double b, double tol = 1e-10);

// One peeling step: returns (f1, f2) with f1 certified alpha-bi-Lipschitz,
// f2 = f o f1^{-1} certified (L/alpha)-bi-Lipschitz. The basepoint defaults
// to the left endpoint. Maps with L = 1 split as (f shifted, identity).
std::pair<IntervalMap, IntervalMap> factor_once(const IntervalMap& f,
                                                double alpha,
                                                std::optional<double> x0 = {});

// Peels alpha-factors until the remainder is alpha-bi-Lipschitz. Factors
// are returned in application order (first factor applied first).
std::vector<IntervalMap> factor_full(const IntervalMap& f, double alpha);

}  // namespace bilip::onedim
