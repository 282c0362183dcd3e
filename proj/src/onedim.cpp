#include "bilip/onedim.hpp"

#include <cmath>
#include <memory>
#include <optional>

namespace bilip::onedim {

IntervalMap identity_map() {
  IntervalMap f;
  f.eval = [](double x) { return x; };
  f.derivative = [](double) { return 1.0; };
  f.L = 1.0;
  f.name = "identity";
  return f;
}

IntervalMap linear_map(double slope) {
  if (!(slope > 0.0)) throw std::invalid_argument("slope must be positive");
  IntervalMap f;
  f.eval = [slope](double x) { return slope * x; };
  f.derivative = [slope](double) { return slope; };
  f.L = std::max(slope, 1.0 / slope);
  f.name = "linear";
  return f;
}

IntervalMap quadratic_map() {
  IntervalMap f;
  f.eval = [](double x) { return x * x / 2.0 + x; };
  f.derivative = [](double x) { return x + 1.0; };
  f.L = 2.0;
  f.name = "quadratic";
  return f;
}

IntervalMap sine_map(double c) {
  if (!(std::abs(c) < 1.0 / M_PI))
    throw std::invalid_argument("sine map needs |c| < 1/pi");
  IntervalMap f;
  f.eval = [c](double x) { return x + c * std::sin(M_PI * x); };
  f.derivative = [c](double x) { return 1.0 + c * M_PI * std::cos(M_PI * x); };
  f.L = std::max(1.0 + std::abs(c) * M_PI, 1.0 / (1.0 - std::abs(c) * M_PI));
  f.name = "sine";
  return f;
}

namespace {

double simpson_rec(const std::function<double(double)>& fn, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  const double m = (a + b) / 2.0;
  const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
  const double flm = fn(lm), frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(fn, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(fn, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& fn, double a,
                        double b, double tol) {
  if (a == b) return 0.0;
  const double fa = fn(a), fb = fn(b), fm = fn((a + b) / 2.0);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(fn, a, b, fa, fm, fb, whole, tol, 40);
}

namespace {

// Monotone bisection bracket followed by Newton polish.
double invert_increasing(const std::function<double(double)>& fn,
                         const std::function<double(double)>& dfn, double lo,
                         double hi, double y) {
  double flo = fn(lo), fhi = fn(hi);
  if (y <= flo) return lo;
  if (y >= fhi) return hi;
  double a = lo, b = hi;
  for (int i = 0; i < 40 && (b - a) > 1e-9 * (hi - lo); ++i) {
    const double m = (a + b) / 2.0;
    if (fn(m) < y)
      a = m;
    else
      b = m;
  }
  double x = (a + b) / 2.0;
  for (int i = 0; i < 8; ++i) {
    const double r = fn(x) - y;
    if (std::abs(r) < 1e-14 * std::max(1.0, std::abs(y))) break;
    const double d = dfn(x);
    if (d <= 0.0) break;
    x = std::clamp(x - r / d, lo, hi);
  }
  return x;
}

}  // namespace

std::pair<IntervalMap, IntervalMap> factor_once(const IntervalMap& f,
                                                double alpha,
                                                std::optional<double> x0_opt) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  const double x0 = x0_opt.value_or(f.a);
  if (x0 < f.a || x0 > f.b)
    throw std::invalid_argument("basepoint outside the domain");

  const bool isometry = f.L <= 1.0 + 1e-9;
  if (alpha > f.L && !isometry)
    throw std::invalid_argument("alpha exceeds the map's distortion");
  // For an isometry log_L(alpha) degenerates; lambda = 1 makes f1 the map
  // itself (shifted to vanish at the basepoint) and f2 a pure translation.
  const double lambda = isometry ? 1.0 : std::log(alpha) / std::log(f.L);

  auto fd = f.derivative;
  auto density = std::make_shared<std::function<double(double)>>(
      [fd, lambda](double t) { return std::pow(std::abs(fd(t)), lambda); });

  auto f1_eval = [density, x0](double x) {
    return adaptive_simpson(*density, x0, x, 1e-10);
  };
  auto f1_deriv = [density](double x) { return (*density)(x); };

  IntervalMap f1;
  f1.a = f.a;
  f1.b = f.b;
  f1.eval = f1_eval;
  f1.derivative = f1_deriv;
  // f' in [1/L, L] puts f1' = f'^lambda in [1/alpha, alpha] exactly.
  f1.L = isometry ? f.L : alpha;
  f1.name = f.name + "_peel";

  const double dom_a = f.a, dom_b = f.b;
  auto f1_inverse = [f1_eval, f1_deriv, dom_a, dom_b](double y) {
    return invert_increasing(f1_eval, f1_deriv, dom_a, dom_b, y);
  };

  IntervalMap f2;
  f2.a = f1_eval(f.a);
  f2.b = f1_eval(f.b);
  auto feval = f.eval;
  f2.eval = [feval, f1_inverse](double y) { return feval(f1_inverse(y)); };
  f2.derivative = [fd, f1_inverse, lambda](double y) {
    const double x = f1_inverse(y);
    return std::pow(std::abs(fd(x)), 1.0 - lambda);
  };
  f2.L = isometry ? 1.0 : f.L / alpha;
  f2.name = f.name + "_rest";

  return {f1, f2};
}

std::vector<IntervalMap> factor_full(const IntervalMap& f, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  std::vector<IntervalMap> factors;
  IntervalMap cur = f;
  while (cur.L > alpha * (1.0 + 1e-12)) {
    auto [head, rest] = factor_once(cur, alpha);
    factors.push_back(std::move(head));
    cur = std::move(rest);
  }
  factors.push_back(std::move(cur));
  return factors;
}

}  // namespace bilip::onedim
