#include "bilip/pathcore.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace bilip::pathcore {

namespace {
constexpr double kBallRadius = 1.0 / 3.0;

Vec shift1(const Vec& x, double t) {
  Vec y = x;
  y(0) += t;
  return y;
}
}  // namespace

PropagatedMap::PropagatedMap(diffeo::SmoothMap base, Indexing indexing)
    : base_(std::move(base)),
      indexing_(indexing),
      min_index_(indexing == Indexing::from_one ? 1 : 0) {
  const auto ball = base_.support_ball();
  if (!ball)
    throw std::invalid_argument("propagation requires a ball-supported map");
  if (ball->center.norm() + ball->radius > kBallRadius + 1e-12)
    throw std::invalid_argument("propagation requires support in B_d(0, 1/3)");
}

long PropagatedMap::ball_index(const Vec& x) const {
  const long m = std::llround(x(0));
  if (m < min_index_) return -1;
  Vec rel = x;
  rel(0) -= static_cast<double>(m);
  if (rel.norm() > kBallRadius) return -1;
  return m;
}

Vec PropagatedMap::eval(const Vec& x) const {
  const long m = ball_index(x);
  if (m < 0) return x;
  return shift1(base_.eval(shift1(x, -static_cast<double>(m))),
                static_cast<double>(m));
}

Mat PropagatedMap::jacobian(const Vec& x) const {
  const long m = ball_index(x);
  if (m < 0) return Mat::Identity(dim(), dim());
  return base_.jacobian(shift1(x, -static_cast<double>(m)));
}

Vec PropagatedMap::eval_inverse(const Vec& y, double newton_tol) const {
  // A diffeomorphism supported in a ball maps the ball onto itself, so the
  // engaged index agrees for g and g^{-1}.
  const long m = ball_index(y);
  if (m < 0) return y;
  const Vec local = shift1(y, -static_cast<double>(m));
  return shift1(diffeo::invert(base_, local, newton_tol),
                static_cast<double>(m));
}

Mat PropagatedMap::jacobian_inverse(const Vec& y, double newton_tol) const {
  const long m = ball_index(y);
  if (m < 0) return Mat::Identity(dim(), dim());
  const Vec x = eval_inverse(y, newton_tol);
  const Mat j = jacobian(x);
  return j.inverse();
}

PropagatedMap propagate(diffeo::SmoothMap f, Indexing indexing) {
  return PropagatedMap(std::move(f), indexing);
}

double PathBounds::eta_hat(double delta) const {
  double best = 0.0;
  for (const auto& [d, v] : eta_table) {
    if (d > delta) break;
    best = v;
  }
  return best;
}

PathBounds bounds(const PropagatedMap& g, const sampling::Sampler& grid) {
  PathBounds b;
  const auto& f = g.base();
  b.T = std::max(f.analytic_T, 1.0);
  b.eta_slope = f.analytic_eta_slope;

  // Sampled diagnostics on the base ball; propagation preserves the
  // constants, so sampling B_0 translates to every ball.
  const auto pts = grid.finite_points();
  std::vector<Mat> jacs;
  jacs.reserve(pts.size());
  for (const auto& x : pts) jacs.push_back(f.jacobian(x));

  for (std::size_t i = 0; i < pts.size(); ++i) {
    b.sampled_sup_dg = std::max(b.sampled_sup_dg, spectral_norm(jacs[i]));
    if (f.has_exact_inverse()) {
      b.sampled_sup_dg_inverse = std::max(
          b.sampled_sup_dg_inverse, spectral_norm(f.jacobian(f.exact_inverse(pts[i])).inverse()));
    } else {
      b.sampled_sup_dg_inverse =
          std::max(b.sampled_sup_dg_inverse, spectral_norm(jacs[i].inverse()));
    }
  }

  // Bucketed modulus table, forced monotone.
  std::map<double, double> buckets;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = (pts[i] - pts[j]).norm();
      if (d < 1e-14) continue;
      const double v = spectral_norm(jacs[i] - jacs[j]);
      const double key = std::ceil(d * 64.0) / 64.0;
      auto [it, fresh] = buckets.emplace(key, v);
      if (!fresh) it->second = std::max(it->second, v);
    }
  double running = 0.0;
  b.eta_table.emplace_back(0.0, 0.0);
  for (const auto& [d, v] : buckets) {
    running = std::max(running, v);
    b.eta_table.emplace_back(d, running);
  }
  return b;
}

Vec h_eval(const PropagatedMap& g, double t, const Vec& x, double newton_tol) {
  const Vec y = g.eval(shift1(x, t));
  return g.eval_inverse(shift1(y, -t), newton_tol);
}

geom::Point h_eval(const PropagatedMap& g, double t, const geom::Point& x,
                   double newton_tol) {
  if (x.is_infinity()) return x;
  return geom::Point::finite(h_eval(g, t, x.coords(), newton_tol));
}

Vec transition_eval(const PropagatedMap& g, double s, double t, const Vec& x,
                    double newton_tol) {
  Vec y = g.eval(x);                      // g
  y = shift1(y, t);                       // A_t
  y = g.eval_inverse(y, newton_tol);      // g^{-1}
  y = shift1(y, s - t);                   // A_s o A_t^{-1}
  y = g.eval(y);                          // g
  y = shift1(y, -s);                      // A_s^{-1}
  return g.eval_inverse(y, newton_tol);   // g^{-1}
}

Mat transition_jacobian(const PropagatedMap& g, double s, double t,
                        const Vec& x, double newton_tol) {
  Vec y = g.eval(x);
  Mat j = g.jacobian(x);
  y = shift1(y, t);
  j = g.jacobian_inverse(y, newton_tol) * j;
  y = g.eval_inverse(y, newton_tol);
  y = shift1(y, s - t);
  j = g.jacobian(y) * j;
  y = g.eval(y);
  y = shift1(y, -s);
  j = g.jacobian_inverse(y, newton_tol) * j;
  return j;
}

TransitionBounds theoretical_bounds(const PathBounds& b, double s, double t) {
  const double dt = std::abs(s - t);
  // eta identically zero forces Dg constant, hence g = id and h_t = id;
  // the bounds collapse exactly in that degenerate class.
  if (b.eta_slope == 0.0) return {0.0, 0.0};
  const double T = b.T;
  const double disp = T * (T + 1.0) * dt;
  const double deriv = T * T * T * b.eta(dt) + T * b.eta((T + 1.0) * dt);
  return {disp, deriv};
}

void write_transition_csv(std::ostream& out, const PropagatedMap& g,
                          const PathBounds& b,
                          const std::vector<std::pair<double, double>>& st_pairs,
                          const sampling::Sampler& points) {
  const auto pts = points.finite_points();
  out << "s,t,sampled_max_disp,disp_bound,sampled_max_deriv,deriv_bound\n";
  out.precision(17);
  for (const auto& [s, t] : st_pairs) {
    double max_disp = 0.0, max_deriv = 0.0;
    for (const auto& x : pts) {
      max_disp = std::max(max_disp, (transition_eval(g, s, t, x) - x).norm());
      const Mat j = transition_jacobian(g, s, t, x);
      max_deriv = std::max(
          max_deriv, spectral_norm(j - Mat::Identity(g.dim(), g.dim())));
    }
    const auto tb = theoretical_bounds(b, s, t);
    out << s << ',' << t << ',' << max_disp << ',' << tb.disp << ','
        << max_deriv << ',' << tb.deriv << '\n';
  }
}

}  // namespace bilip::pathcore
