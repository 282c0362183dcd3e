// Propagated maps and the path h_t = g^{-1} o A_t^{-1} o g o A_t, together
// with certified displacement and derivative bounds for its transitions.
//
// Given f supported in B_d(0,1/3), the propagated map g equals the
// translated conjugate A_m o f o A_m^{-1} on each ball B_m = B_d(m e1, 1/3)
// for integer m >= 1 and is the identity elsewhere (in particular on B_0
// itself, which is what makes h_1 = f). A_t translates the first
// coordinate by t.
#pragma once

#include "bilip/diffeo.hpp"
#include "bilip/sampling.hpp"

#include <iosfwd>
#include <vector>

namespace bilip::pathcore {

// Index convention for the propagated union of balls. Including m = 0 is a
// deliberately wrong variant kept for regression tests: it makes g equal f
// on B_0 and collapses h_1 to the identity.
enum class Indexing { from_one, from_zero_variant };

class PropagatedMap {
 public:
  PropagatedMap(diffeo::SmoothMap base, Indexing indexing = Indexing::from_one);

  int dim() const { return base_.dim; }
  const diffeo::SmoothMap& base() const { return base_; }
  Indexing indexing() const { return indexing_; }

  // Ball index engaged at x, or -1 when x lies in no translated ball.
  long ball_index(const Vec& x) const;

  Vec eval(const Vec& x) const;
  Mat jacobian(const Vec& x) const;
  Vec eval_inverse(const Vec& y, double newton_tol = 1e-12) const;
  // D_y g^{-1} computed as the matrix inverse of D_x g at x = g^{-1}(y).
  Mat jacobian_inverse(const Vec& y, double newton_tol = 1e-12) const;

  geom::Point apply(const geom::Point& x) const {
    return x.is_infinity() ? x : geom::Point::finite(eval(x.coords()));
  }

 private:
  diffeo::SmoothMap base_;
  Indexing indexing_;
  long min_index_;
};

PropagatedMap propagate(diffeo::SmoothMap f,
                        Indexing indexing = Indexing::from_one);

// Certified path constants: T bounds sup||Dg|| for g and g^{-1}; the
// analytic modulus of continuity is eta(delta) = eta_slope * delta. The
// sampled table eta_hat is diagnostic only (a sampled supremum
// underestimates the true modulus and must not back a certificate).
struct PathBounds {
  double T = 1.0;
  double eta_slope = 0.0;
  std::vector<std::pair<double, double>> eta_table;  // monotone (delta, eta_hat)
  double sampled_sup_dg = 0.0;
  double sampled_sup_dg_inverse = 0.0;

  double eta(double delta) const { return eta_slope * delta; }
  double eta_hat(double delta) const;
};

PathBounds bounds(const PropagatedMap& g, const sampling::Sampler& grid);

Vec h_eval(const PropagatedMap& g, double t, const Vec& x,
           double newton_tol = 1e-12);
geom::Point h_eval(const PropagatedMap& g, double t, const geom::Point& x,
                   double newton_tol = 1e-12);

// h_s o h_t^{-1}, evaluated through the eight-fold composition
// g^{-1} A_s^{-1} g A_s A_t^{-1} g^{-1} A_t g with two inversions of g;
// h_t is never inverted wholesale.
Vec transition_eval(const PropagatedMap& g, double s, double t, const Vec& x,
                    double newton_tol = 1e-12);
Mat transition_jacobian(const PropagatedMap& g, double s, double t,
                        const Vec& x, double newton_tol = 1e-12);

struct TransitionBounds {
  double disp;   // sup_x d(h_s o h_t^{-1}(x), x)  <=  T(T+1)|s-t|
  double deriv;  // sup_x ||D(h_s o h_t^{-1}) - I||
                 //   <=  T^3 eta(|s-t|) + T eta((T+1)|s-t|)
};

TransitionBounds theoretical_bounds(const PathBounds& b, double s, double t);

// CSV table of sampled transition displacements against the certified
// bound, for plotting: columns s,t,sampled_max_disp,disp_bound.
void write_transition_csv(std::ostream& out, const PropagatedMap& g,
                          const PathBounds& b,
                          const std::vector<std::pair<double, double>>& st_pairs,
                          const sampling::Sampler& points);

}  // namespace bilip::pathcore
