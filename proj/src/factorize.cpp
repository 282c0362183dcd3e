#include "bilip/factorize.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace bilip::factorize {

SphereMap SphereMap::identity(int dim) {
  SphereMap m;
  m.dim_ = dim;
  return m;
}

SphereMap SphereMap::from_term(Term t) {
  SphereMap m;
  if (const auto* f = std::get_if<diffeo::SmoothMap>(&t))
    m.dim_ = f->dim;
  else if (const auto* r = std::get_if<geom::Rotation>(&t))
    m.dim_ = r->chart_dim();
  else
    m.dim_ = std::get<geom::MobiusMap>(t).chart_dim();
  m.word_.push_back(std::move(t));
  return m;
}

SphereMap SphereMap::from_word(int dim, std::vector<Term> word) {
  SphereMap m;
  m.dim_ = dim;
  m.word_ = std::move(word);
  return m;
}

geom::Point SphereMap::apply(const geom::Point& x) const {
  geom::Point y = x;
  for (const auto& term : word_) {
    if (const auto* f = std::get_if<diffeo::SmoothMap>(&term))
      y = f->apply(y);
    else if (const auto* r = std::get_if<geom::Rotation>(&term))
      y = r->apply(y);
    else
      y = std::get<geom::MobiusMap>(term).apply(y);
  }
  return y;
}

Mat SphereMap::chart_jacobian(const Vec& x) const {
  Mat j = Mat::Identity(dim_, dim_);
  geom::Point p = geom::Point::finite(x);
  for (const auto& term : word_) {
    if (p.is_infinity())
      throw std::runtime_error("chart Jacobian crosses infinity");
    if (const auto* f = std::get_if<diffeo::SmoothMap>(&term)) {
      j = f->jacobian(p.coords()) * j;
      p = f->apply(p);
    } else if (const auto* r = std::get_if<geom::Rotation>(&term)) {
      const auto cj = geom::MobiusMap::rotation(*r).jacobian(p);
      if (cj.sphere_model)
        throw std::runtime_error("chart Jacobian crosses a pole");
      j = cj.matrix * j;
      p = r->apply(p);
    } else {
      const auto& g = std::get<geom::MobiusMap>(term);
      const auto cj = g.jacobian(p);
      if (cj.sphere_model)
        throw std::runtime_error("chart Jacobian crosses a pole");
      j = cj.matrix * j;
      p = g.apply(p);
    }
  }
  return j;
}

SphereMap SphereMap::compose(const SphereMap& other) const {
  SphereMap m;
  m.dim_ = dim_;
  m.word_ = other.word_;
  m.word_.insert(m.word_.end(), word_.begin(), word_.end());
  return m;
}

geom::Point FactorStep::apply(const geom::Point& x, double newton_tol) const {
  if (kind == Kind::rotation_slice) return rotation->apply(x);
  const geom::Point pre = conjugator.apply_inverse(x);
  const geom::Point mid = pre.is_infinity()
                              ? pre
                              : geom::Point::finite(pathcore::transition_eval(
                                    *propagated, t1, t0, pre.coords(),
                                    newton_tol));
  return conjugator.apply(mid);
}

geom::Point Factorization::apply(const geom::Point& x) const {
  geom::Point y = x;
  for (const auto& step : steps) y = step.apply(y);
  return y;
}

nlohmann::json to_json(const Factorization& f) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : f.steps) {
    nlohmann::json js;
    js["kind"] = s.kind == FactorStep::Kind::path_slice ? "path_slice"
                                                        : "rotation_slice";
    js["leg"] = s.leg;
    if (s.kind == FactorStep::Kind::path_slice) {
      js["t0"] = s.t0;
      js["t1"] = s.t1;
      js["conjugator_scale"] = s.conjugator.similarity_scale();
    }
    js["certificate"] = certify::to_json(s.certificate);
    steps.push_back(std::move(js));
  }
  nlohmann::json j;
  j["eps"] = f.eps;
  j["dim"] = f.dim;
  j["factor_count"] = f.factor_count();
  j["j1"] = f.j_rotation;
  j["j2"] = f.j_p1;
  j["j3"] = f.j_p2;
  j["residual"] = f.residual;
  j["steps"] = std::move(steps);
  return j;
}

namespace {

std::vector<geom::Point> probe_points(int dim, std::uint64_t seed, int count) {
  std::vector<geom::Point> probes;
  probes.push_back(geom::Point::infinity(dim));
  probes.push_back(geom::Point::origin(dim));
  for (int i = 0; i < dim; ++i) {
    probes.push_back(geom::Point::finite(unit_axis(dim, i)));
    probes.push_back(geom::Point::finite(-2.0 * unit_axis(dim, i)));
  }
  Rng rng(seed);
  while (static_cast<int>(probes.size()) < count)
    probes.push_back(geom::project_chart(rng.unit_vec(dim + 1)));
  return probes;
}

double fixed_point_defect(const SphereMap& f, const geom::Point& p) {
  return geom::chi_dist(f.apply(p), p);
}

}  // namespace

std::optional<geom::Point> find_fixed_point(const SphereMap& f, double tol,
                                            std::uint64_t seed) {
  const int dim = f.dim();
  auto probes = probe_points(dim, seed, 64);

  std::vector<std::pair<double, geom::Point>> ranked;
  ranked.reserve(probes.size());
  for (const auto& p : probes) ranked.emplace_back(fixed_point_defect(f, p), p);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (ranked.front().first <= tol) return ranked.front().second;

  // Damped Newton descent on f(x) - x from the best finite probes.
  for (std::size_t c = 0; c < ranked.size() && c < 8; ++c) {
    geom::Point start = ranked[c].second;
    if (start.is_infinity() || start.coords().norm() > 1e3) continue;
    Vec x = start.coords();
    double defect = ranked[c].first;
    for (int iter = 0; iter < 60 && defect > tol; ++iter) {
      const geom::Point fx = f.apply(geom::Point::finite(x));
      if (fx.is_infinity()) break;
      Mat j;
      try {
        j = f.chart_jacobian(x) - Mat::Identity(dim, dim);
      } catch (const std::exception&) {
        break;
      }
      Eigen::FullPivLU<Mat> lu(j);
      if (!lu.isInvertible()) break;
      const Vec dx = lu.solve(x - fx.coords());
      double step = 1.0;
      bool improved = false;
      for (int halve = 0; halve < 30; ++halve) {
        const Vec cand = x + step * dx;
        const double cand_defect =
            fixed_point_defect(f, geom::Point::finite(cand));
        if (cand_defect < defect) {
          x = cand;
          defect = cand_defect;
          improved = true;
          break;
        }
        step /= 2.0;
      }
      if (!improved) break;
    }
    if (defect <= tol) return geom::Point::finite(x);
  }
  return std::nullopt;
}

geom::Rotation fixing_rotation(const SphereMap& f, std::uint64_t seed) {
  if (find_fixed_point(f, 1e-9, seed)) return geom::Rotation::identity(f.dim());
  // Deterministic probe with the largest defect gives a well-conditioned
  // rotation plane.
  auto probes = probe_points(f.dim(), seed, 64);
  geom::Point best = probes.front();
  double best_defect = -1.0;
  for (const auto& p : probes) {
    const double d = fixed_point_defect(f, p);
    if (d > best_defect) {
      best_defect = d;
      best = p;
    }
  }
  return geom::rotation_from_points(best, f.apply(best)).rotation;
}

namespace {

struct PlaneComponent {
  Vec a, b;      // orthonormal plane basis in R^{n+1}
  double angle;  // rotation angle of A in this plane
};

// Invariant-plane decomposition of an orthogonal matrix with det +1. The
// real Schur form of a normal matrix is block diagonal: 2x2 blocks are the
// rotation planes, -1 pairs are paired into half-turn planes.
std::vector<PlaneComponent> rotation_planes(const geom::Rotation& A) {
  const Mat& m = A.matrix();
  const int k = static_cast<int>(m.rows());
  Eigen::RealSchur<Mat> schur(m);
  const Mat t = schur.matrixT();
  const Mat u = schur.matrixU();

  std::vector<PlaneComponent> planes;
  std::vector<int> flips;
  int i = 0;
  while (i < k) {
    const bool block2 = i + 1 < k && std::abs(t(i + 1, i)) > 1e-12;
    if (block2) {
      const double angle = std::atan2(t(i + 1, i), t(i, i));
      if (std::abs(angle) > 1e-12)
        planes.push_back({u.col(i), u.col(i + 1), angle});
      i += 2;
    } else {
      if (t(i, i) < 0.0) flips.push_back(i);
      i += 1;
    }
  }
  for (std::size_t p = 0; p + 1 < flips.size(); p += 2)
    planes.push_back({u.col(flips[p]), u.col(flips[p + 1]), M_PI});
  return planes;
}

certify::DistortionCertificate isometry_certificate(
    const geom::Rotation& slice, double angle, int dim,
    const PipelineOptions& opt) {
  auto cert = certify::estimate_distortion(
      certify::map_under_test(slice),
      sampling::Sampler::sphere(dim, opt.certificate_samples, opt.seed),
      certify::Metric::spherical);
  cert.L_upper = 1.0 + 1e-10;  // exact isometry, floating slack
  cert.disp_upper = std::abs(std::sin(angle / 2.0));
  return cert;
}

}  // namespace

std::vector<FactorStep> rotation_factors(const geom::Rotation& A, double eps,
                                         const PipelineOptions& opt) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  std::vector<FactorStep> steps;
  const int dim = A.chart_dim();
  for (const auto& plane : rotation_planes(A)) {
    const int slices =
        static_cast<int>(std::ceil(std::abs(plane.angle) / (2.0 * eps)));
    // The path ends at A^{-1}: slice the opposite angle.
    const double per = -plane.angle / slices;
    const geom::Rotation slice = geom::Rotation::plane(plane.a, plane.b, per);
    for (int s = 0; s < slices; ++s) {
      FactorStep step;
      step.kind = FactorStep::Kind::rotation_slice;
      step.rotation = slice;
      step.leg = 0;
      step.certificate = isometry_certificate(slice, per, dim, opt);
      steps.push_back(std::move(step));
    }
  }
  return steps;
}

SplitResult split_supported(const SphereMap& f, const geom::Point& fixed) {
  (void)fixed;  // the split is structural; the fixed point documents intent
  const int dim = f.dim();
  std::vector<const diffeo::SmoothMap*> terms;
  for (const auto& term : f.word()) {
    const auto* sm = std::get_if<diffeo::SmoothMap>(&term);
    if (!sm)
      throw OutOfScopeError("split_supported",
                            "word contains non-chart terms; peel rotations "
                            "before splitting");
    if (sm->is_identity_map()) continue;
    terms.push_back(sm);
  }

  auto ball_of = [](const diffeo::SmoothMap& m) {
    const auto b = m.support_ball();
    if (!b)
      throw OutOfScopeError("split_supported",
                            "map is not supported on a ball; requires the "
                            "interpolation construction, out of scope");
    return *b;
  };

  SplitResult out{
      {diffeo::make_identity(dim), geom::EuclidBall{Vec::Zero(dim), 0.0}},
      {diffeo::make_identity(dim), geom::EuclidBall{Vec::Zero(dim), 0.0}},
      true};

  if (terms.empty()) return out;

  if (terms.size() == 2) {
    const auto b1 = ball_of(*terms[0]);
    const auto b2 = ball_of(*terms[1]);
    if ((b1.center - b2.center).norm() >= b1.radius + b2.radius) {
      out.f1 = {*terms[0], b1};
      out.f2 = {*terms[1], b2};
      out.f2_trivial = false;
      return out;
    }
  }

  // General case: fold everything into one ball-supported factor.
  diffeo::SmoothMap combined = *terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i)
    combined = diffeo::compose(*terms[i], combined);
  out.f1 = {combined, ball_of(combined)};
  return out;
}

namespace {

certify::DistortionCertificate slice_certificate(
    const pathcore::PropagatedMap& g, const geom::MobiusMap& conj, double t0,
    double t1, double cert_L, double disp_bound, const PipelineOptions& opt) {
  certify::MapUnderTest slice;
  slice.dim = g.dim();
  const double tol = opt.newton_tol;
  const pathcore::PropagatedMap* gp = &g;
  slice.eval = [gp, t0, t1, tol](const geom::Point& x) {
    if (x.is_infinity()) return x;
    return geom::Point::finite(
        pathcore::transition_eval(*gp, t1, t0, x.coords(), tol));
  };
  auto report = certify::conjugation_check(
      conj, slice,
      sampling::Sampler::sphere(g.dim(), opt.certificate_samples, opt.seed));
  auto cert = report.certificate;
  cert.L_upper = cert_L;
  cert.disp_upper = disp_bound;
  return cert;
}

}  // namespace

std::vector<FactorStep> partition_path(
    std::shared_ptr<const pathcore::PropagatedMap> g,
    const geom::MobiusMap& conjugator, double eps, int leg,
    const PipelineOptions& opt) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!conjugator.is_isometry_after_affine())
    throw std::invalid_argument(
        "conjugator must factor as isometry after affine");

  std::vector<FactorStep> steps;
  if (g->base().is_identity_map()) return steps;

  const auto b = pathcore::bounds(
      *g, sampling::Sampler::euclid_ball(Vec::Zero(g->dim()), 1.0 / 3.0, 48,
                                         opt.seed));
  const double T = b.T;
  const double C = b.eta_slope;
  const double alpha = conjugator.similarity_scale();

  // Certified chi-distortion and displacement of the conjugated slice over
  // a step dt, by the derivative bound, the affine scaling and the
  // euclidean-to-spherical transfer.
  auto certify_step = [&](double dt, double* cert_L, double* disp_chi) {
    const auto tb = pathcore::theoretical_bounds(b, dt, 0.0);
    if (tb.deriv >= 1.0) return false;
    const double eps_dist = tb.deriv / (1.0 - tb.deriv);
    const double disp_euclid = alpha * tb.disp;
    const double eps_e = std::max(eps_dist, disp_euclid);
    const double bound = 1.0 + certify::xi(eps_e);
    const double disp = std::min(disp_euclid, 1.0);
    *cert_L = bound;
    *disp_chi = disp;
    return bound <= 1.0 + eps + 1e-12 && disp <= eps + 1e-12;
  };

  double dt_seed = eps / (T * (T + 1.0));
  if (C > 0.0)
    dt_seed = std::min(dt_seed,
                       eps / (C * (T * T * T + T * (T + 1.0))));
  double dt = std::min(dt_seed, 1.0);

  double t = 0.0;
  while (t < 1.0 - 1e-15) {
    dt = std::min(dt, 1.0 - t);
    // A step below the floor is only legitimate as the final sliver of the
    // interval; otherwise the bounds cannot reach the requested eps.
    if (dt < opt.min_step && 1.0 - t > opt.min_step)
      throw std::runtime_error(
          "partition step underflow: certified bounds cannot reach the "
          "requested eps");
    double cert_L = 0.0, disp_chi = 0.0;
    if (!certify_step(dt, &cert_L, &disp_chi)) {
      dt /= 2.0;
      continue;
    }
    FactorStep step;
    step.kind = FactorStep::Kind::path_slice;
    step.propagated = g;
    step.conjugator = conjugator;
    step.t0 = t;
    step.t1 = std::min(t + dt, 1.0);
    step.leg = leg;
    step.certificate =
        slice_certificate(*g, conjugator, step.t0, step.t1, cert_L, disp_chi, opt);
    steps.push_back(std::move(step));
    t += dt;
    dt *= 1.5;
  }
  return steps;
}

Factorization factorize_diffeo(const SphereMap& f, double eps,
                               const PipelineOptions& opt) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const int dim = f.dim();

  // Peel trailing rotation terms into the fixing rotation A = (product)^{-1},
  // so the remaining word is the supported part and A o f equals it.
  const auto& word = f.word();
  int last_supported = -1;
  for (int i = 0; i < static_cast<int>(word.size()); ++i)
    if (!std::holds_alternative<geom::Rotation>(word[i])) last_supported = i;

  geom::Rotation peeled = geom::Rotation::identity(dim);
  std::vector<SphereMap::Term> rest;
  for (int i = 0; i < static_cast<int>(word.size()); ++i) {
    if (i <= last_supported) {
      if (std::holds_alternative<geom::Rotation>(word[i]))
        throw OutOfScopeError("factorize",
                              "rotations applied before supported terms are "
                              "out of the pipeline's input class");
      rest.push_back(word[i]);
    } else {
      peeled = std::get<geom::Rotation>(word[i]).compose(peeled);
    }
  }
  const geom::Rotation fixing = peeled.inverse();
  const SphereMap supported = SphereMap::from_word(dim, std::move(rest));

  const auto fixed = find_fixed_point(supported, 1e-9, opt.seed);
  if (!fixed)
    throw OutOfScopeError("factorize",
                          "no fixed point found for the supported part");

  const auto split = split_supported(supported, *fixed);

  Factorization fac;
  fac.eps = eps;
  fac.dim = dim;

  auto emit_leg = [&](const SupportedPiece& piece, int leg) {
    if (piece.map.is_identity_map()) return;
    const auto normalizer = geom::euclid_ball_normalizer(piece.ball);
    auto base = diffeo::conjugate_by_similarity(
        piece.map, 3.0 * piece.ball.radius, piece.ball.center);
    auto prop = std::make_shared<const pathcore::PropagatedMap>(
        pathcore::propagate(std::move(base)));
    auto slices = partition_path(prop, normalizer, eps, leg, opt);
    if (leg == 1)
      fac.j_p1 = static_cast<int>(slices.size());
    else
      fac.j_p2 = static_cast<int>(slices.size());
    for (auto& s : slices) fac.steps.push_back(std::move(s));
  };

  emit_leg(split.f1, 1);
  if (!split.f2_trivial) emit_leg(split.f2, 2);

  auto rot_steps = rotation_factors(fixing, eps, opt);
  fac.j_rotation = static_cast<int>(rot_steps.size());
  for (auto& s : rot_steps) fac.steps.push_back(std::move(s));

  fac.residual =
      verify_factorization(f, fac, opt.verify_samples, opt.seed).max_deviation;
  return fac;
}

VerifyReport verify_factorization(const SphereMap& f, const Factorization& fac,
                                  int samples, std::uint64_t seed) {
  VerifyReport report;
  const auto pts =
      sampling::Sampler::sphere(fac.dim, samples, seed).points();
  for (const auto& x : pts) {
    const geom::Point composed = fac.apply(x);
    const geom::Point direct = f.apply(x);
    report.max_deviation =
        std::max(report.max_deviation, geom::chi_dist(composed, direct));
  }
  for (const auto& step : fac.steps) {
    if (!step.certificate.passes(fac.eps)) {
      report.certificates_ok = false;
      ++report.failed_certificates;
    }
  }
  return report;
}

}  // namespace bilip::factorize
