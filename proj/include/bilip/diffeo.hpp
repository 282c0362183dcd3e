// C1 diffeomorphism calculus: evaluation, analytic Jacobians, Newton
// inversion, composition, and a catalog of compactly supported test maps
// with certified derivative bounds.
#pragma once

#include "bilip/common.hpp"
#include "bilip/geometry.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace bilip::diffeo {

struct GlobalSupport {};
using Support = std::variant<geom::EuclidBall, geom::SphericalBall, GlobalSupport>;

// A C1 diffeomorphism of the chart, extended to the sphere by fixing
// infinity. Jacobians are closed forms; finite differences appear only in
// validation. analytic_T bounds sup ||D.|| of the map and of its inverse;
// analytic_eta_slope is a certified Lipschitz constant of both derivative
// fields, so ||D_x - D_y|| <= analytic_eta_slope * |x - y| either way.
struct SmoothMap {
  int dim = 0;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;
  std::function<Vec(const Vec&)> exact_inverse;  // empty: invert by Newton
  Support support = GlobalSupport{};
  double analytic_T = 1.0;
  double analytic_eta_slope = 0.0;
  std::string name;

  Vec operator()(const Vec& x) const { return eval(x); }
  geom::Point apply(const geom::Point& x) const {
    return x.is_infinity() ? x : geom::Point::finite(eval(x.coords()));
  }
  bool has_exact_inverse() const { return static_cast<bool>(exact_inverse); }
  bool is_identity_map() const;
  bool in_support(const Vec& x) const;
  // Chart ball containing the support, when one exists.
  std::optional<geom::EuclidBall> support_ball() const;
};

// Quintic smoothstep profile: 1 on [0, inner], 0 on [outer, inf), C2 in
// between, with closed-form derivative bounds.
struct BumpProfile {
  double inner;
  double outer;

  double width() const { return outer - inner; }
  double value(double r) const;
  double slope(double r) const;
  double curvature(double r) const;
  double sup_abs_slope() const { return 1.875 / width(); }
  double sup_abs_curvature() const {
    return (10.0 * std::sqrt(3.0) / 3.0) / (width() * width());
  }
  // Lipschitz constant of the gradient field of beta(|x|).
  double gradient_lipschitz() const {
    return std::max(sup_abs_curvature(), sup_abs_slope() / inner);
  }
};

SmoothMap make_identity(int dim);

// Rotates the first two chart coordinates by amplitude * beta(|x|).
// Supported in B_d(0, outer); the inverse is the twist with opposite
// amplitude, so the certified bounds cover both directions by symmetry.
SmoothMap make_twist(double amplitude, double inner, double outer, int dim);
SmoothMap make_twist(double amplitude, int dim);  // inner 1/12, outer 1/3

// x -> x + amplitude * beta(|x|) * direction. Requires
// |amplitude| * sup|beta'| < 1 so the Jacobian stays nonsingular.
SmoothMap make_bump_push(const Vec& direction, double amplitude, double outer);
SmoothMap make_bump_push(const Vec& direction, double amplitude);

// Logarithmic spiral z -> z e^{i k log|z|} of the plane. Fixes 0, infinity
// and the unit circle; not compactly supported.
SmoothMap make_spiral(double k);

struct SpiralParams {
  double k;
  // The spiral's isometric distortion: the larger root of L - 1/L = |k|.
  double distortion() const {
    return (std::abs(k) + std::sqrt(k * k + 4.0)) / 2.0;
  }
};

// f after g. Derivative bounds combine by the chain and product rules and
// cover both composition orders of the inverses.
SmoothMap compose(const SmoothMap& f, const SmoothMap& g);

// Conjugation by the translation x -> x + offset; bounds are unchanged.
SmoothMap translate(const SmoothMap& f, const Vec& offset);

// g^{-1} o f o g for the similarity g(x) = scale*x + offset. analytic_T is
// unchanged and the derivative Lipschitz constant scales by |scale|.
SmoothMap conjugate_by_similarity(const SmoothMap& f, double scale,
                                  const Vec& offset);

struct NewtonStats {
  int iterations = 0;
  double residual = 0.0;
  int reseeds = 0;
};

// Damped Newton solve of f(x) = y: initial guess y, step halving on
// residual increase, multistart reseeding on the support ball if stalled.
Vec newton_invert(const SmoothMap& f, const Vec& y, double tol, int max_iter,
                  NewtonStats* stats = nullptr);

// Exact inverse when the map carries one, Newton otherwise.
Vec invert(const SmoothMap& f, const Vec& y, double tol = 1e-12,
           NewtonStats* stats = nullptr);

struct JacobianValidation {
  double max_deviation = 0.0;       // analytic vs central differences
  double sampled_sup_norm = 0.0;    // max sampled ||Df||
  double threshold = 0.0;
  bool deviation_ok = false;
  bool bound_ok = false;            // sampled sup <= analytic_T
  bool passed() const { return deviation_ok && bound_ok; }
};

JacobianValidation validate_jacobian(const SmoothMap& f, int samples,
                                     std::uint64_t seed = 11,
                                     double h = 1e-5,
                                     double threshold = 1e-6);

}  // namespace bilip::diffeo
