#include "bilip/geometry.hpp"

#include <cmath>

namespace bilip::geom {

namespace {
constexpr double kPoleTol = 1e-15;

// Ambient derivative of the embedding at a finite chart point, (n+1) x n.
Mat embed_derivative(const Vec& x) {
  const int n = static_cast<int>(x.size());
  const double s = 1.0 + x.squaredNorm();
  Mat d(n + 1, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i)
      d(i, j) = 2.0 * ((i == j ? 1.0 : 0.0) / s - 2.0 * x(i) * x(j) / (s * s));
    d(n, j) = 4.0 * x(j) / (s * s);
  }
  return d;
}

// Ambient derivative of the chart projection at a sphere point away from
// the north pole, n x (n+1).
Mat project_derivative(const Vec& v) {
  const int n = static_cast<int>(v.size()) - 1;
  const double denom = 1.0 - v(n);
  Mat d = Mat::Zero(n, n + 1);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 1.0 / denom;
    d(i, n) = v(i) / (denom * denom);
  }
  return d;
}

// Chart Jacobian of one rotation primitive at a finite chart point whose
// image is finite.
Mat rotation_chart_jacobian(const Rotation& r, const Vec& x) {
  const Vec v = embed_unit_sphere(Point::finite(x));
  const Vec w = r.matrix() * v;
  return project_derivative(w) * r.matrix() * embed_derivative(x);
}

}  // namespace

double chi_dist(const Vec& x, const Vec& y) {
  return (x - y).norm() /
         (std::sqrt(1.0 + x.squaredNorm()) * std::sqrt(1.0 + y.squaredNorm()));
}

double chi_dist(const Point& x, const Point& y) {
  if (x.is_infinity() && y.is_infinity()) return 0.0;
  if (x.is_infinity()) return 1.0 / std::sqrt(1.0 + y.coords().squaredNorm());
  if (y.is_infinity()) return 1.0 / std::sqrt(1.0 + x.coords().squaredNorm());
  return chi_dist(x.coords(), y.coords());
}

Vec embed_unit_sphere(const Point& x) {
  const int n = x.dim();
  Vec v = Vec::Zero(n + 1);
  if (x.is_infinity()) {
    v(n) = 1.0;
    return v;
  }
  const double s = 1.0 + x.coords().squaredNorm();
  v.head(n) = (2.0 / s) * x.coords();
  v(n) = 1.0 - 2.0 / s;
  return v;
}

Point project_chart(const Vec& v) {
  const int n = static_cast<int>(v.size()) - 1;
  const double head2 = v.head(n).squaredNorm();
  if (head2 < kPoleTol * kPoleTol)
    return v(n) > 0.0 ? Point::infinity(n) : Point::origin(n);
  // Two algebraically equal forms; pick the one whose denominator does not
  // cancel in the current hemisphere.
  if (v(n) < 0.0) return Point::finite(v.head(n) / (1.0 - v(n)));
  return Point::finite(v.head(n) * ((1.0 + v(n)) / head2));
}

double chi_ball_euclid_radius(double r) {
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("chordal radius must lie in (0,1)");
  return r / std::sqrt(1.0 - r * r);
}

Rotation::Rotation(Mat m) : matrix_(std::move(m)) {
  const int k = static_cast<int>(matrix_.rows());
  if (matrix_.cols() != k || k < 2)
    throw std::invalid_argument("rotation matrix must be square");
  const double ortho = (matrix_.transpose() * matrix_ - Mat::Identity(k, k))
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-10)
    throw std::invalid_argument("rotation matrix is not orthogonal");
  if (matrix_.determinant() < 0.0)
    throw std::invalid_argument("rotation matrix must have det +1");
}

Rotation Rotation::identity(int chart_dim) {
  return Rotation(Mat::Identity(chart_dim + 1, chart_dim + 1));
}

Rotation Rotation::plane(const Vec& a, const Vec& b, double angle) {
  const int k = static_cast<int>(a.size());
  const double c = std::cos(angle), s = std::sin(angle);
  Mat m = Mat::Identity(k, k);
  m += (c - 1.0) * (a * a.transpose() + b * b.transpose());
  m += s * (b * a.transpose() - a * b.transpose());
  return Rotation(std::move(m));
}

Point Rotation::apply(const Point& x) const {
  Vec v = matrix_ * embed_unit_sphere(x);
  v /= v.norm();
  return project_chart(v);
}

bool Rotation::is_identity(double tol) const {
  const int k = static_cast<int>(matrix_.rows());
  return (matrix_ - Mat::Identity(k, k)).cwiseAbs().maxCoeff() <= tol;
}

RotationFromPoints rotation_from_points(const Point& p, const Point& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("dimension mismatch");
  const int n = p.dim();
  const Vec u = embed_unit_sphere(q);
  const Vec v = embed_unit_sphere(p);
  const double c = u.dot(v);

  RotationFromPoints out{Rotation::identity(n)};
  if (c > 1.0 - 1e-15) {
    out.degenerate = true;
    return out;
  }
  if (c < -1.0 + 1e-12) {
    // Antipodal: the plane is not unique. Complete with the lowest-index
    // coordinate axis not parallel to the embedding of p.
    for (int i = 0; i <= n; ++i) {
      Vec w = unit_axis(n + 1, i) - u(i) * u;
      const double nn = w.norm();
      if (nn > 1e-6) {
        out.rotation = Rotation::plane(u, w / nn, M_PI);
        out.completion_axis = i;
        return out;
      }
    }
    throw std::logic_error("no completion axis found");
  }
  Vec w = v - c * u;
  const double s = w.norm();
  w /= s;
  // Plane rotation with cos = c, sin = s maps u onto v exactly.
  Mat m = Mat::Identity(n + 1, n + 1);
  m += (c - 1.0) * (u * u.transpose() + w * w.transpose());
  m += s * (w * u.transpose() - u * w.transpose());
  out.rotation = Rotation(std::move(m));
  return out;
}

Rotation rotation_fixing(const Point& p, double angle) {
  const int n = p.dim();
  const Vec u = embed_unit_sphere(p);
  std::vector<Vec> basis;
  for (int i = 0; i <= n && basis.size() < 2; ++i) {
    Vec w = unit_axis(n + 1, i) - u(i) * u;
    for (const Vec& b : basis) w -= b.dot(w) * b;
    const double nn = w.norm();
    if (nn > 1e-6) basis.push_back(w / nn);
  }
  return Rotation::plane(basis[0], basis[1], angle);
}

MobiusMap::MobiusMap(int dim, std::vector<Primitive> word)
    : dim_(dim), word_(std::move(word)) {
  inverse_word_.reserve(word_.size());
  for (auto it = word_.rbegin(); it != word_.rend(); ++it) {
    if (const auto* r = std::get_if<Rotation>(&*it))
      inverse_word_.push_back(r->inverse());
    else
      inverse_word_.push_back(std::get<Similarity>(*it).inverse());
  }
}

MobiusMap MobiusMap::identity(int chart_dim) {
  return MobiusMap(chart_dim, {});
}

MobiusMap MobiusMap::from_word(int chart_dim, std::vector<Primitive> word) {
  return MobiusMap(chart_dim, std::move(word));
}

MobiusMap MobiusMap::similarity(int chart_dim, double scale, Vec offset) {
  std::vector<Primitive> word;
  word.emplace_back(Similarity(scale, std::move(offset)));
  return MobiusMap(chart_dim, std::move(word));
}

MobiusMap MobiusMap::rotation(const Rotation& r) {
  std::vector<Primitive> word;
  word.emplace_back(r);
  return MobiusMap(r.chart_dim(), std::move(word));
}

namespace {
Point apply_word(const std::vector<MobiusMap::Primitive>& word, Point x) {
  for (const auto& prim : word) {
    if (const auto* r = std::get_if<Rotation>(&prim)) {
      x = r->apply(x);
    } else {
      const auto& s = std::get<Similarity>(prim);
      if (!x.is_infinity()) x = Point::finite(s.apply(x.coords()));
    }
  }
  return x;
}
}  // namespace

Point MobiusMap::apply(const Point& x) const { return apply_word(word_, x); }

Point MobiusMap::apply_inverse(const Point& x) const {
  return apply_word(inverse_word_, x);
}

MobiusMap MobiusMap::inverse() const { return MobiusMap(dim_, inverse_word_); }

MobiusMap MobiusMap::compose(const MobiusMap& other) const {
  std::vector<Primitive> word = other.word_;
  word.insert(word.end(), word_.begin(), word_.end());
  return MobiusMap(dim_, std::move(word));
}

ChartJacobian MobiusMap::jacobian(const Point& x0) const {
  if (!x0.is_infinity()) {
    Mat j = Mat::Identity(dim_, dim_);
    Point x = x0;
    bool chart_ok = true;
    for (const auto& prim : word_) {
      if (const auto* r = std::get_if<Rotation>(&prim)) {
        Point y = r->apply(x);
        if (y.is_infinity()) {
          chart_ok = false;
          break;
        }
        j = rotation_chart_jacobian(*r, x.coords()) * j;
        x = std::move(y);
      } else {
        const auto& s = std::get<Similarity>(prim);
        j *= s.scale;
        x = Point::finite(s.apply(x.coords()));
      }
    }
    if (chart_ok) return {std::move(j), false};
  }

  // Sphere-model tangent map, exact for every primitive.
  const int k = dim_ + 1;
  Mat t = Mat::Identity(k, k);
  Point x = x0;
  for (const auto& prim : word_) {
    if (const auto* r = std::get_if<Rotation>(&prim)) {
      t = r->matrix() * t;
      x = r->apply(x);
    } else {
      const auto& s = std::get<Similarity>(prim);
      if (x.is_infinity()) {
        // Fixed point at infinity: the tangent map there scales horizontal
        // directions by 1/scale.
        Vec north = Vec::Zero(k);
        north(dim_) = 1.0;
        Mat horiz = Mat::Identity(k, k) - north * north.transpose();
        t = (1.0 / s.scale) * horiz * t;
      } else {
        const Vec y = s.apply(x.coords());
        t = embed_derivative(y) * (s.scale * Mat::Identity(dim_, dim_)) *
            project_derivative(embed_unit_sphere(x)) * t;
        x = Point::finite(y);
      }
    }
  }
  return {std::move(t), true};
}

double MobiusMap::similarity_scale() const {
  double scale = 1.0;
  for (const auto& prim : word_)
    if (const auto* s = std::get_if<Similarity>(&prim)) scale *= s->scale;
  return scale;
}

bool MobiusMap::is_isometry_after_affine() const {
  bool seen_rotation = false;
  for (const auto& prim : word_) {
    if (std::holds_alternative<Rotation>(prim))
      seen_rotation = true;
    else if (seen_rotation)
      return false;
  }
  return true;
}

MobiusMap ball_normalizer(const SphericalBall& ball) {
  if (!(ball.radius < 1.0))
    throw std::invalid_argument("ball normalizer requires radius < 1");
  const int n = ball.center.dim();
  const double rho = chi_ball_euclid_radius(ball.radius);

  // Rotation taking the center to the chart origin; its inverse sends the
  // recentred ball back.
  const Rotation to_origin =
      rotation_from_points(Point::origin(n), ball.center).rotation;

  std::vector<MobiusMap::Primitive> word;
  word.emplace_back(Similarity(3.0 * rho, Vec::Zero(n)));
  if (!to_origin.is_identity()) word.emplace_back(to_origin.inverse());
  return MobiusMap::from_word(n, std::move(word));
}

MobiusMap euclid_ball_normalizer(const EuclidBall& ball) {
  if (!(ball.radius > 0.0))
    throw std::invalid_argument("euclidean ball radius must be positive");
  return MobiusMap::similarity(static_cast<int>(ball.center.size()),
                               3.0 * ball.radius, ball.center);
}

SphericalBall enclosing_chi_ball(const EuclidBall& ball) {
  // The chordal distance from the center is maximized on the boundary point
  // closest to (or past) the chart origin.
  const double c = ball.center.norm();
  const double t = c - ball.radius;
  const double r = ball.radius /
                   (std::sqrt(1.0 + c * c) * std::sqrt(1.0 + t * t));
  return SphericalBall(Point::finite(ball.center), std::min(r, 1.0 - 1e-12));
}

EuclidBall chi_ball_to_euclid(const SphericalBall& ball) {
  if (ball.center.is_infinity())
    throw OutOfScopeError("chi_ball_to_euclid",
                          "ball centred at infinity has no chart realization");
  const Vec& c = ball.center.coords();
  const double r = ball.radius;
  const double k = 1.0 - r * r * (1.0 + c.squaredNorm());
  if (!(k > 0.0))
    throw OutOfScopeError("chi_ball_to_euclid",
                          "ball contains infinity; not a chart ball");
  const double radius =
      r * (1.0 + c.squaredNorm()) * std::sqrt(1.0 - r * r) / k;
  return EuclidBall{c / k, radius};
}

}  // namespace bilip::geom
