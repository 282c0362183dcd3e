// Distortion and displacement certification in the Euclidean and spherical
// metrics, and the Euclidean-to-spherical transfer of certified constants.
//
// Two estimation routes are kept strictly apart: sampled pair ratios are
// lower bounds (diagnostics), derivative grids with Lipschitz slack and the
// closed-form transfer are upper bounds (certificates).
#pragma once

#include "bilip/diffeo.hpp"
#include "bilip/geometry.hpp"
#include "bilip/sampling.hpp"

#include "json.hpp"

#include <functional>
#include <optional>

namespace bilip::certify {

enum class Metric { euclidean, spherical };

struct DistortionCertificate {
  Metric metric = Metric::spherical;
  double L_lower = 1.0;                 // sampled max pair ratio
  std::optional<double> L_upper;        // certified bound, when available
  double max_disp = 0.0;                // sampled sup distance(f(x), x)
  std::optional<double> disp_upper;     // certified displacement bound
  int point_count = 0;
  long pair_count = 0;
  int skipped_pairs = 0;
  std::uint64_t seed = 0;

  bool passes(double eps) const {
    const double bound = L_upper.value_or(L_lower);
    const double disp = disp_upper.value_or(max_disp);
    return bound <= 1.0 + eps + 1e-12 && disp <= eps + 1e-12 &&
           L_lower <= bound + 1e-9 && max_disp <= disp + 1e-9;
  }
};

nlohmann::json to_json(const DistortionCertificate& c);

// Map handle for certification: sphere evaluation plus the optional pieces
// that unlock the derivative-based certificate.
struct MapUnderTest {
  int dim = 0;
  std::function<geom::Point(const geom::Point&)> eval;
  std::function<Mat(const Vec&)> jacobian;               // may be empty
  std::optional<geom::EuclidBall> convex_support;        // for the grid bound
  double deriv_lipschitz = 0.0;                          // grid slack constant
};

MapUnderTest map_under_test(const diffeo::SmoothMap& f);
MapUnderTest map_under_test(const geom::MobiusMap& g);
MapUnderTest map_under_test(const geom::Rotation& r);

// Sampled lower bound over all pairs of the sampler's points, plus, in the
// Euclidean metric with a convex support and a Jacobian, a certified upper
// bound from singular values on a covering grid with Lipschitz slack.
DistortionCertificate estimate_distortion(const MapUnderTest& f,
                                          const sampling::Sampler& domain,
                                          Metric metric);
DistortionCertificate estimate_distortion(const MapUnderTest& f,
                                          const std::vector<geom::Point>& pts,
                                          Metric metric, std::uint64_t seed);

// Transfer constants for a map that is (1+eps)-bi-Lipschitz for the
// Euclidean metric, moves points at most eps, and fixes infinity:
//   eps_prime = sup_{r>=0} eps(2r+eps)/(1+r^2),  attained at
//   r* = (sqrt(eps^2+4) - eps)/2,
// and the map is (1+xi)-bi-Lipschitz for the spherical metric with
//   xi = (1+eps)(1+eps_prime) - 1.
double eps_prime(double eps);
double xi(double eps);

struct ConjugationReport {
  DistortionCertificate certificate;     // of g o slice o g^{-1}, spherical
  double isometry_deviation = 0.0;       // rotation primitives preserve chi
  double affine_deviation = 0.0;         // similarities scale d exactly
  double affine_scale = 1.0;
};

// Certifies the conjugated slice directly in the spherical metric and
// checks the word's primitives: rotations act as chi-isometries and the
// affine part scales Euclidean distances by a single factor.
ConjugationReport conjugation_check(const geom::MobiusMap& g,
                                    const MapUnderTest& slice,
                                    const sampling::Sampler& samples);

}  // namespace bilip::certify
