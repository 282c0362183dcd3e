#include "bilip/spiralbounds.hpp"

#include "bilip/diffeo.hpp"
#include "bilip/sampling.hpp"

#include <cmath>

namespace bilip::spiralbounds {

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json j;
  j["k"] = r.k;
  j["L"] = r.L;
  j["alpha"] = r.alpha;
  j["lower_bound_N"] = r.lower_bound_N;
  j["lower_bound_N_ceil"] = r.lower_bound_N_ceil;
  j["onedim_upper_N"] = r.onedim_upper_N;
  j["notes"] = r.notes;
  return j;
}

BoundReport spiral_bound(double k, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  if (k == 0.0) throw std::invalid_argument("k must be nonzero");
  BoundReport r;
  r.k = k;
  r.alpha = alpha;
  r.L = diffeo::SpiralParams{k}.distortion();
  r.lower_bound_N = std::abs(k) / std::sqrt(alpha * alpha - 1.0);
  r.lower_bound_N_ceil = static_cast<int>(std::ceil(r.lower_bound_N - 1e-12));
  r.onedim_upper_N =
      static_cast<int>(std::ceil(std::log(r.L) / std::log(alpha) - 1e-12));
  r.notes = "lower bound applies to factorizations of the spiral; the upper "
            "count is the interval peeling bound for the same L";
  return r;
}

double spiral_distortion_scan(double k, double r_inner, double r_outer,
                              int samples, std::uint64_t seed) {
  if (!(0.0 < r_inner && r_inner < r_outer))
    throw std::invalid_argument("annulus must exclude the origin");
  if (k == 0.0) return 1.0;
  const auto spiral = diffeo::make_spiral(k);
  const auto pts =
      sampling::Sampler::annulus(r_inner, r_outer, samples, seed)
          .finite_points();

  const double step = 1e-6 * r_inner;
  double best = 1.0;
  for (const auto& x : pts) {
    // Pair ratios at a small step in a few fixed directions.
    const Vec fx = spiral.eval(x);
    for (int d = 0; d < 4; ++d) {
      const double a = d * M_PI / 4.0;
      Vec u(2);
      u << std::cos(a), std::sin(a);
      const Vec y = x + step * u;
      const double ratio = (spiral.eval(y) - fx).norm() / step;
      best = std::max(best, std::max(ratio, 1.0 / ratio));
    }
    // Exact-Jacobian singular values at the sample point.
    const Mat j = spiral.jacobian(x);
    best = std::max(best, std::max(spectral_norm(j), 1.0 / sigma_min(j)));
  }
  return best;
}

std::vector<std::pair<int, double>> spiral_scan_table(
    double k, double r_inner, double r_outer,
    const std::vector<int>& resolutions, std::uint64_t seed) {
  std::vector<std::pair<int, double>> rows;
  rows.reserve(resolutions.size());
  for (int res : resolutions)
    rows.emplace_back(res,
                      spiral_distortion_scan(k, r_inner, r_outer, res, seed));
  return rows;
}

}  // namespace bilip::spiralbounds
