// Quantitative harness for the logarithmic spiral: its isometric
// distortion L solves |k| = L - 1/L, and factoring it into
// alpha-bi-Lipschitz pieces needs at least |k| (alpha^2 - 1)^{-1/2} of them.
#pragma once

#include "bilip/common.hpp"

#include "json.hpp"

#include <vector>

namespace bilip::spiralbounds {

struct BoundReport {
  double k = 0.0;
  double L = 1.0;                 // (|k| + sqrt(k^2+4)) / 2
  double alpha = 1.0;
  double lower_bound_N = 0.0;     // |k| (alpha^2-1)^{-1/2}
  int lower_bound_N_ceil = 0;
  int onedim_upper_N = 0;         // ceil(log_alpha L), the interval count
  std::string notes;
};

nlohmann::json to_json(const BoundReport& r);

BoundReport spiral_bound(double k, double alpha);

// Distortion estimate of the spiral over an annulus, from pair ratios at a
// small step plus singular values of the exact Jacobian at sample points.
// Both routes are lower estimates, so the scan approaches L from below and
// refinement is monotone.
double spiral_distortion_scan(double k, double r_inner, double r_outer,
                              int samples, std::uint64_t seed = 19);

// (resolution, estimate) rows for the refinement table.
std::vector<std::pair<int, double>> spiral_scan_table(
    double k, double r_inner, double r_outer,
    const std::vector<int>& resolutions, std::uint64_t seed = 19);

}  // namespace bilip::spiralbounds
