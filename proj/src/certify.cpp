#include "bilip/certify.hpp"

#include <algorithm>
#include <cmath>

namespace bilip::certify {

nlohmann::json to_json(const DistortionCertificate& c) {
  nlohmann::json j;
  j["metric"] = c.metric == Metric::euclidean ? "euclidean" : "spherical";
  j["L_lower"] = c.L_lower;
  if (c.L_upper) j["L_upper"] = *c.L_upper;
  j["max_disp"] = c.max_disp;
  if (c.disp_upper) j["disp_upper"] = *c.disp_upper;
  j["point_count"] = c.point_count;
  j["pair_count"] = c.pair_count;
  j["skipped_pairs"] = c.skipped_pairs;
  j["seed"] = c.seed;
  return j;
}

MapUnderTest map_under_test(const diffeo::SmoothMap& f) {
  MapUnderTest m;
  m.dim = f.dim;
  m.eval = [f](const geom::Point& x) { return f.apply(x); };
  m.jacobian = f.jacobian;
  m.convex_support = f.support_ball();
  m.deriv_lipschitz = f.analytic_eta_slope;
  return m;
}

MapUnderTest map_under_test(const geom::MobiusMap& g) {
  MapUnderTest m;
  m.dim = g.chart_dim();
  m.eval = [g](const geom::Point& x) { return g.apply(x); };
  m.jacobian = [g](const Vec& x) {
    const auto j = g.jacobian(geom::Point::finite(x));
    if (j.sphere_model)
      throw std::runtime_error("chart Jacobian crosses a pole");
    return j.matrix;
  };
  return m;
}

MapUnderTest map_under_test(const geom::Rotation& r) {
  MapUnderTest m;
  m.dim = r.chart_dim();
  m.eval = [r](const geom::Point& x) { return r.apply(x); };
  return m;
}

namespace {

double metric_dist(Metric metric, const geom::Point& a, const geom::Point& b) {
  if (metric == Metric::spherical) return geom::chi_dist(a, b);
  if (a.is_infinity() || b.is_infinity())
    throw std::invalid_argument("euclidean metric needs finite points");
  return (a.coords() - b.coords()).norm();
}

// Certified upper bound on max(sup sigma_max, sup 1/sigma_min) over a
// convex Euclidean region: lattice grid with covering radius slack.
std::optional<double> derivative_upper_bound(const MapUnderTest& f) {
  if (!f.jacobian || !f.convex_support) return std::nullopt;
  const auto& ball = *f.convex_support;
  if (ball.radius == 0.0) return 1.0;

  const int n = f.dim;
  const int per_axis = n <= 2 ? 41 : 17;
  const double h = 2.0 * ball.radius / (per_axis - 1);
  const double covering = h * std::sqrt(static_cast<double>(n)) / 2.0;
  const double slack = f.deriv_lipschitz * covering;

  double sup_max = 1.0;  // identity outside the support
  double inf_min = 1.0;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec x = ball.center;
    for (int d = 0; d < n; ++d) x(d) += -ball.radius + idx[d] * h;
    if ((x - ball.center).norm() <= ball.radius + covering) {
      const Mat j = f.jacobian(x);
      sup_max = std::max(sup_max, spectral_norm(j));
      inf_min = std::min(inf_min, sigma_min(j));
    }
    int d = 0;
    while (d < n && ++idx[d] == per_axis) idx[d++] = 0;
    if (d == n) break;
  }
  const double lo = inf_min - slack;
  if (lo <= 0.0) return std::nullopt;
  return std::max(sup_max + slack, 1.0 / lo);
}

}  // namespace

DistortionCertificate estimate_distortion(const MapUnderTest& f,
                                          const std::vector<geom::Point>& pts,
                                          Metric metric, std::uint64_t seed) {
  DistortionCertificate cert;
  cert.metric = metric;
  cert.seed = seed;
  cert.point_count = static_cast<int>(pts.size());

  std::vector<geom::Point> usable;
  usable.reserve(pts.size());
  for (const auto& p : pts) {
    if (metric == Metric::euclidean && p.is_infinity()) continue;
    usable.push_back(p);
  }
  // Pair evaluation is embarrassingly parallel; the max reduction is
  // order-independent, so the result does not depend on the thread count.
  const long n_pts = static_cast<long>(usable.size());
  std::vector<geom::Point> images(usable.begin(), usable.end());
  parallel_max(n_pts, [&](long i) {
    images[i] = f.eval(usable[i]);
    return 0.0;
  });

  cert.max_disp = std::max(0.0, parallel_max(n_pts, [&](long i) {
    return metric_dist(metric, images[i], usable[i]);
  }));

  for (long i = 0; i < n_pts; ++i)
    for (long j = i + 1; j < n_pts; ++j) {
      if (metric_dist(metric, usable[i], usable[j]) < 1e-13)
        ++cert.skipped_pairs;
      else
        ++cert.pair_count;
    }

  const double pair_max = parallel_max(n_pts, [&](long i) {
    double best = 1.0;
    for (long j = i + 1; j < n_pts; ++j) {
      const double den = metric_dist(metric, usable[i], usable[j]);
      if (den < 1e-13) continue;
      const double num = metric_dist(metric, images[i], images[j]);
      const double ratio = num / den;
      best = std::max(best, std::max(ratio, 1.0 / ratio));
    }
    return best;
  });
  cert.L_lower = std::max(cert.L_lower, std::max(pair_max, 1.0));

  if (metric == Metric::euclidean) cert.L_upper = derivative_upper_bound(f);
  return cert;
}

DistortionCertificate estimate_distortion(const MapUnderTest& f,
                                          const sampling::Sampler& domain,
                                          Metric metric) {
  return estimate_distortion(f, domain.points(), metric, domain.seed());
}

double eps_prime(double eps) {
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  if (eps == 0.0) return 0.0;
  const double r = (std::sqrt(eps * eps + 4.0) - eps) / 2.0;
  return eps * (2.0 * r + eps) / (1.0 + r * r);
}

double xi(double eps) { return (1.0 + eps) * (1.0 + eps_prime(eps)) - 1.0; }

ConjugationReport conjugation_check(const geom::MobiusMap& g,
                                    const MapUnderTest& slice,
                                    const sampling::Sampler& samples) {
  ConjugationReport report;
  report.affine_scale = g.similarity_scale();

  const auto pts = samples.points();

  // Primitive checks on the word.
  for (const auto& prim : g.word()) {
    if (const auto* r = std::get_if<geom::Rotation>(&prim)) {
      for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
        const double before = geom::chi_dist(pts[i], pts[i + 1]);
        const double after =
            geom::chi_dist(r->apply(pts[i]), r->apply(pts[i + 1]));
        report.isometry_deviation =
            std::max(report.isometry_deviation, std::abs(after - before));
      }
    } else {
      const auto& s = std::get<geom::Similarity>(prim);
      for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
        if (pts[i].is_infinity() || pts[i + 1].is_infinity()) continue;
        const double before = (pts[i].coords() - pts[i + 1].coords()).norm();
        if (before < 1e-13) continue;
        const double after =
            (s.apply(pts[i].coords()) - s.apply(pts[i + 1].coords())).norm();
        report.affine_deviation = std::max(
            report.affine_deviation, std::abs(after / before - s.scale));
      }
    }
  }

  // Spherical certificate of the conjugated slice.
  MapUnderTest conj;
  conj.dim = slice.dim;
  auto inner = slice.eval;
  conj.eval = [g, inner](const geom::Point& x) {
    return g.apply(inner(g.apply_inverse(x)));
  };
  report.certificate = estimate_distortion(conj, pts, Metric::spherical,
                                           samples.seed());
  return report;
}

}  // namespace bilip::certify
