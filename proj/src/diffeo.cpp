#include "bilip/diffeo.hpp"

#include <cmath>

namespace bilip::diffeo {

namespace {

// Rotation of coordinates 0,1 by angle phi, identity elsewhere.
Vec rotate_first_plane(const Vec& x, double phi) {
  Vec y = x;
  const double c = std::cos(phi), s = std::sin(phi);
  y(0) = c * x(0) - s * x(1);
  y(1) = s * x(0) + c * x(1);
  return y;
}

Mat plane_rotation_matrix(int n, double phi) {
  Mat m = Mat::Identity(n, n);
  const double c = std::cos(phi), s = std::sin(phi);
  m(0, 0) = c;
  m(0, 1) = -s;
  m(1, 0) = s;
  m(1, 1) = c;
  return m;
}

geom::EuclidBall merged_ball(const geom::EuclidBall& a,
                             const geom::EuclidBall& b) {
  const Vec d = b.center - a.center;
  const double dist = d.norm();
  if (dist + b.radius <= a.radius) return a;
  if (dist + a.radius <= b.radius) return b;
  const double r = (a.radius + b.radius + dist) / 2.0;
  Vec c = a.center;
  if (dist > 1e-15) c += ((r - a.radius) / dist) * d;
  return geom::EuclidBall{c, r};
}

}  // namespace

bool SmoothMap::is_identity_map() const {
  if (const auto* b = std::get_if<geom::EuclidBall>(&support))
    return b->radius == 0.0;
  return false;
}

bool SmoothMap::in_support(const Vec& x) const {
  if (const auto* b = std::get_if<geom::EuclidBall>(&support))
    return (x - b->center).norm() <= b->radius;
  if (const auto* s = std::get_if<geom::SphericalBall>(&support))
    return geom::chi_dist(geom::Point::finite(x), s->center) <= s->radius;
  return true;
}

std::optional<geom::EuclidBall> SmoothMap::support_ball() const {
  if (const auto* b = std::get_if<geom::EuclidBall>(&support)) return *b;
  if (const auto* s = std::get_if<geom::SphericalBall>(&support))
    return geom::chi_ball_to_euclid(*s);
  return std::nullopt;
}

double BumpProfile::value(double r) const {
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  const double u = (r - inner) / width();
  const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
  return 1.0 - s;
}

double BumpProfile::slope(double r) const {
  if (r <= inner || r >= outer) return 0.0;
  const double u = (r - inner) / width();
  const double ds = 30.0 * u * u * (u - 1.0) * (u - 1.0);
  return -ds / width();
}

double BumpProfile::curvature(double r) const {
  if (r <= inner || r >= outer) return 0.0;
  const double u = (r - inner) / width();
  const double dds = 60.0 * u * (2.0 * u - 1.0) * (u - 1.0);
  return -dds / (width() * width());
}

SmoothMap make_identity(int dim) {
  SmoothMap f;
  f.dim = dim;
  f.eval = [](const Vec& x) { return x; };
  f.jacobian = [dim](const Vec&) -> Mat { return Mat::Identity(dim, dim); };
  f.exact_inverse = [](const Vec& x) { return x; };
  f.support = geom::EuclidBall{Vec::Zero(dim), 0.0};
  f.analytic_T = 1.0;
  f.analytic_eta_slope = 0.0;
  f.name = "identity";
  return f;
}

SmoothMap make_twist(double amplitude, double inner, double outer, int dim) {
  if (dim < 2) throw std::invalid_argument("twist needs dimension >= 2");
  if (!(0.0 < inner && inner < outer && outer <= 1.0 / 3.0))
    throw std::invalid_argument("twist requires 0 < inner < outer <= 1/3");
  if (amplitude == 0.0) return make_identity(dim);

  const BumpProfile beta{inner, outer};
  const double a = amplitude;
  const double s1 = beta.sup_abs_slope();
  const double grad_lip = beta.gradient_lipschitz();

  SmoothMap f;
  f.dim = dim;
  f.eval = [beta, a](const Vec& x) {
    const double r = x.norm();
    if (r >= beta.outer) return x;
    return rotate_first_plane(x, a * beta.value(r));
  };
  f.jacobian = [beta, a, dim](const Vec& x) -> Mat {
    const double r = x.norm();
    if (r >= beta.outer) return Mat::Identity(dim, dim);
    const double phi = a * beta.value(r);
    Mat j = plane_rotation_matrix(dim, phi);
    const double db = beta.slope(r);
    if (db != 0.0 && r > 0.0) {
      const Vec y = rotate_first_plane(x, phi);
      Vec jy = Vec::Zero(dim);  // generator applied to the rotated point
      jy(0) = -y(1);
      jy(1) = y(0);
      j += (a * db / r) * jy * x.transpose();
    }
    return j;
  };
  f.exact_inverse = [beta, a](const Vec& x) {
    const double r = x.norm();
    if (r >= beta.outer) return x;
    return rotate_first_plane(x, -a * beta.value(r));
  };
  f.support = geom::EuclidBall{Vec::Zero(dim), outer};

  // sup ||Df|| <= 1 + |a| sup|beta'| r on the support; the inverse is the
  // opposite twist, so the same bound covers it.
  const double t_bound = 1.0 + std::abs(a) * s1 * outer;
  f.analytic_T = t_bound;
  // Lipschitz constant of x -> Df(x), from the rotation factor plus the
  // rank-one term bounded by the product rule on the support ball.
  f.analytic_eta_slope =
      std::abs(a) * s1 + std::abs(a) * (t_bound * s1 + outer * grad_lip);
  f.name = "twist";
  return f;
}

SmoothMap make_twist(double amplitude, int dim) {
  return make_twist(amplitude, 1.0 / 12.0, 1.0 / 3.0, dim);
}

SmoothMap make_bump_push(const Vec& direction, double amplitude, double outer) {
  const int dim = static_cast<int>(direction.size());
  if (dim < 1) throw std::invalid_argument("empty direction");
  if (!(outer > 0.0 && outer <= 1.0 / 3.0))
    throw std::invalid_argument("bump push requires 0 < outer <= 1/3");
  if (std::abs(direction.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("direction must be a unit vector");
  if (amplitude == 0.0) return make_identity(dim);

  const BumpProfile beta{outer / 4.0, outer};
  const double a = amplitude;
  const double s = std::abs(a) * beta.sup_abs_slope();
  if (!(s < 1.0))
    throw std::invalid_argument(
        "bump push rejected: |amplitude| * sup|beta'| must stay below 1");

  SmoothMap f;
  f.dim = dim;
  const Vec u = direction;
  f.eval = [beta, a, u](const Vec& x) -> Vec {
    const double r = x.norm();
    if (r >= beta.outer) return x;
    return x + (a * beta.value(r)) * u;
  };
  f.jacobian = [beta, a, u, dim](const Vec& x) -> Mat {
    const double r = x.norm();
    Mat j = Mat::Identity(dim, dim);
    if (r >= beta.outer || r <= beta.inner || r == 0.0) return j;
    j += (a * beta.slope(r) / r) * u * x.transpose();
    return j;
  };
  f.support = geom::EuclidBall{Vec::Zero(dim), outer};

  const double t_bound = 1.0 / (1.0 - s);
  f.analytic_T = std::max(1.0 + s, t_bound);
  const double eta_forward = std::abs(a) * beta.gradient_lipschitz();
  // The inverse derivative field D(f^{-1}) = (Df o f^{-1})^{-1} inherits a
  // Lipschitz constant inflated by T^3.
  f.analytic_eta_slope = eta_forward * t_bound * t_bound * t_bound;
  f.name = "bump_push";
  return f;
}

SmoothMap make_bump_push(const Vec& direction, double amplitude) {
  return make_bump_push(direction, amplitude, 1.0 / 3.0);
}

SmoothMap make_spiral(double k) {
  SmoothMap f;
  f.dim = 2;
  f.eval = [k](const Vec& x) -> Vec {
    const double r = x.norm();
    if (r == 0.0) return x;  // continuous extension
    return rotate_first_plane(x, k * std::log(r));
  };
  f.jacobian = [k](const Vec& x) -> Mat {
    const double r = x.norm();
    if (r == 0.0)
      throw std::invalid_argument("spiral Jacobian undefined at the origin");
    const double phi = k * std::log(r);
    Mat j = plane_rotation_matrix(2, phi);
    const Vec y = rotate_first_plane(x, phi);
    Vec jy(2);
    jy << -y(1), y(0);
    j += (k / (r * r)) * jy * x.transpose();
    return j;
  };
  f.exact_inverse = [k](const Vec& x) -> Vec {
    const double r = x.norm();
    if (r == 0.0) return x;
    return rotate_first_plane(x, -k * std::log(r));
  };
  f.support = GlobalSupport{};
  f.analytic_T = SpiralParams{k}.distortion();
  f.analytic_eta_slope = std::numeric_limits<double>::infinity();
  f.name = "spiral";
  return f;
}

SmoothMap compose(const SmoothMap& f, const SmoothMap& g) {
  if (f.dim != g.dim) throw std::invalid_argument("dimension mismatch");
  SmoothMap h;
  h.dim = f.dim;
  auto fe = f.eval, ge = g.eval;
  h.eval = [fe, ge](const Vec& x) { return fe(ge(x)); };
  auto fj = f.jacobian, gj = g.jacobian;
  h.jacobian = [fe, ge, fj, gj](const Vec& x) -> Mat {
    return fj(ge(x)) * gj(x);
  };
  if (f.has_exact_inverse() && g.has_exact_inverse()) {
    auto fi = f.exact_inverse, gi = g.exact_inverse;
    h.exact_inverse = [fi, gi](const Vec& y) { return gi(fi(y)); };
  }

  if (f.is_identity_map()) {
    h.support = g.support;
  } else if (g.is_identity_map()) {
    h.support = f.support;
  } else {
    const auto fb = f.support_ball();
    const auto gb = g.support_ball();
    if (fb && gb)
      h.support = merged_ball(*fb, *gb);
    else
      h.support = GlobalSupport{};
  }

  h.analytic_T = f.analytic_T * g.analytic_T;
  const double cf = f.analytic_eta_slope, cg = g.analytic_eta_slope;
  const double tf = f.analytic_T, tg = g.analytic_T;
  h.analytic_eta_slope =
      std::max(cf * tg * tg + tf * cg, cg * tf * tf + tg * cf);
  h.name = f.name + "." + g.name;
  return h;
}

SmoothMap translate(const SmoothMap& f, const Vec& offset) {
  SmoothMap h;
  h.dim = f.dim;
  auto fe = f.eval;
  const Vec b = offset;
  h.eval = [fe, b](const Vec& x) -> Vec { return fe(x - b) + b; };
  auto fj = f.jacobian;
  h.jacobian = [fj, b](const Vec& x) { return fj(x - b); };
  if (f.has_exact_inverse()) {
    auto fi = f.exact_inverse;
    h.exact_inverse = [fi, b](const Vec& y) -> Vec { return fi(y - b) + b; };
  }
  if (const auto sb = f.support_ball())
    h.support = geom::EuclidBall{sb->center + b, sb->radius};
  else
    h.support = f.support;
  h.analytic_T = f.analytic_T;
  h.analytic_eta_slope = f.analytic_eta_slope;
  h.name = f.name + "+shift";
  return h;
}

SmoothMap conjugate_by_similarity(const SmoothMap& f, double scale,
                                  const Vec& offset) {
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  SmoothMap h;
  h.dim = f.dim;
  auto fe = f.eval;
  const double lam = scale;
  const Vec b = offset;
  h.eval = [fe, lam, b](const Vec& x) -> Vec {
    return (fe(lam * x + b) - b) / lam;
  };
  auto fj = f.jacobian;
  h.jacobian = [fj, lam, b](const Vec& x) { return fj(lam * x + b); };
  if (f.has_exact_inverse()) {
    auto fi = f.exact_inverse;
    h.exact_inverse = [fi, lam, b](const Vec& y) -> Vec {
      return (fi(lam * y + b) - b) / lam;
    };
  }
  if (const auto sb = f.support_ball())
    h.support = geom::EuclidBall{(sb->center - b) / lam, sb->radius / lam};
  else
    h.support = f.support;
  h.analytic_T = f.analytic_T;
  h.analytic_eta_slope = f.analytic_eta_slope * lam;
  h.name = f.name + "~";
  return h;
}

Vec newton_invert(const SmoothMap& f, const Vec& y, double tol, int max_iter,
                  NewtonStats* stats) {
  Vec x = y;
  double res = (f.eval(x) - y).norm();
  double best_res = res;
  Vec best_x = x;
  int iter = 0;
  int reseeds = 0;
  int stall = 0;

  // Deterministic reseed candidates on the support ball.
  std::vector<Vec> seeds;
  if (const auto sb = f.support_ball()) {
    seeds.push_back(sb->center);
    Rng rng(271828);
    for (int i = 0; i < 2 * f.dim + 4; ++i)
      seeds.push_back(rng.in_ball(sb->center, sb->radius));
  }
  std::size_t next_seed = 0;

  while (res > tol && iter < max_iter) {
    ++iter;
    Mat j = f.jacobian(x);
    Eigen::FullPivLU<Mat> lu(j);
    bool stepped = false;
    if (lu.isInvertible()) {
      const Vec dx = lu.solve(y - f.eval(x));
      double step = 1.0;
      for (int halve = 0; halve < 40; ++halve) {
        const Vec cand = x + step * dx;
        const double cand_res = (f.eval(cand) - y).norm();
        if (cand_res < res) {
          x = cand;
          res = cand_res;
          stepped = true;
          break;
        }
        step /= 2.0;
      }
    }
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (!stepped) {
      ++stall;
      if (next_seed < seeds.size()) {
        x = seeds[next_seed++];
        res = (f.eval(x) - y).norm();
        ++reseeds;
      } else if (stall > 2) {
        break;
      }
    }
  }

  if (stats) {
    stats->iterations = iter;
    stats->residual = std::min(res, best_res);
    stats->reseeds = reseeds;
  }
  if (best_res > tol)
    throw NewtonError("newton inversion did not reach tolerance (best residual " +
                          std::to_string(best_res) + ")",
                      best_res);
  return res <= tol ? x : best_x;
}

Vec invert(const SmoothMap& f, const Vec& y, double tol, NewtonStats* stats) {
  if (f.has_exact_inverse()) {
    if (stats) *stats = NewtonStats{};
    return f.exact_inverse(y);
  }
  return newton_invert(f, y, tol, 60, stats);
}

JacobianValidation validate_jacobian(const SmoothMap& f, int samples,
                                     std::uint64_t seed, double h,
                                     double threshold) {
  JacobianValidation report;
  report.threshold = threshold;
  Rng rng(seed);
  const auto sb = f.support_ball();
  const Vec center = sb ? sb->center : Vec::Zero(f.dim);
  const double radius = sb && sb->radius > 0.0 ? sb->radius * 1.1 : 1.0;

  for (int i = 0; i < samples; ++i) {
    const Vec x = rng.in_ball(center, radius);
    const Mat ja = f.jacobian(x);
    Mat jfd(f.dim, f.dim);
    for (int c = 0; c < f.dim; ++c) {
      Vec xp = x, xm = x;
      xp(c) += h;
      xm(c) -= h;
      jfd.col(c) = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
    }
    report.max_deviation =
        std::max(report.max_deviation, (ja - jfd).cwiseAbs().maxCoeff());
    report.sampled_sup_norm =
        std::max(report.sampled_sup_norm, spectral_norm(ja));
  }
  report.deviation_ok = report.max_deviation <= threshold;
  report.bound_ok = report.sampled_sup_norm <= f.analytic_T + 1e-12;
  return report;
}

}  // namespace bilip::diffeo
