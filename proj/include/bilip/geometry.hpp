// Points of the n-sphere (chart plus unit-sphere model), the chordal
// metric, rotations, and Moebius normalization of balls.
//
// The sphere is the Euclidean chart R^n together with a point at infinity.
// Points are carried in whichever representation keeps the operation exact:
// rotations act on the unit-sphere embedding, similarities act in the chart.
#pragma once

#include "bilip/common.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace bilip::geom {

class Point {
 public:
  static Point finite(Vec coords) { return Point(std::move(coords), false); }
  static Point infinity(int dim) { return Point(Vec::Zero(dim), true); }
  static Point origin(int dim) { return Point(Vec::Zero(dim), false); }

  bool is_infinity() const { return infinite_; }
  int dim() const { return static_cast<int>(coords_.size()); }

  const Vec& coords() const {
    if (infinite_) throw std::logic_error("coords() on the point at infinity");
    return coords_;
  }

 private:
  Point(Vec coords, bool infinite)
      : coords_(std::move(coords)), infinite_(infinite) {}
  Vec coords_;
  bool infinite_;
};

// Spherical (chordal) distance. Equals half the chordal distance of the
// unit-sphere embeddings; takes values in [0, 1].
double chi_dist(const Point& x, const Point& y);
double chi_dist(const Vec& x, const Vec& y);

// Stereographic embedding onto the unit sphere of R^{n+1}. The chart origin
// maps to the south pole (0,...,0,-1) and infinity to the north pole.
Vec embed_unit_sphere(const Point& x);
Point project_chart(const Vec& v);

// Closed chordal ball. Radius is restricted to (0,1): a ball of radius 1
// would be the whole sphere.
struct SphericalBall {
  Point center;
  double radius;

  SphericalBall(Point c, double r) : center(std::move(c)), radius(r) {
    if (!(r > 0.0 && r < 1.0))
      throw std::invalid_argument("spherical ball radius must lie in (0,1)");
  }
};

// Euclidean radius of the chordal ball of radius r centred at the chart
// origin: rho = r / sqrt(1 - r^2).
double chi_ball_euclid_radius(double r);

// Rotation of the sphere, stored as an orthogonal matrix with det +1 acting
// on the unit-sphere model.
class Rotation {
 public:
  explicit Rotation(Mat m);
  static Rotation identity(int chart_dim);
  // Rotation by `angle` in the plane spanned by the orthonormal vectors a, b
  // of R^{chart_dim+1}, identity on the orthogonal complement.
  static Rotation plane(const Vec& a, const Vec& b, double angle);

  int chart_dim() const { return static_cast<int>(matrix_.rows()) - 1; }
  const Mat& matrix() const { return matrix_; }

  Point apply(const Point& x) const;
  Rotation inverse() const { return Rotation(matrix_.transpose()); }
  Rotation compose(const Rotation& other) const {
    return Rotation(matrix_ * other.matrix_);
  }
  bool is_identity(double tol = 1e-14) const;

 private:
  Mat matrix_;
};

struct RotationFromPoints {
  Rotation rotation;
  bool degenerate = false;      // p and q coincide; identity returned
  int completion_axis = -1;     // axis index used for the antipodal tie-break
};

// Minimal rotation taking q to p in the plane spanned by their embeddings.
// Antipodal pairs rotate by pi in the plane completed by the lowest-index
// coordinate axis not parallel to the embedding of p.
RotationFromPoints rotation_from_points(const Point& p, const Point& q);

// Rotation by `angle` in a deterministically chosen plane orthogonal to the
// embedding of p; fixes p (and its antipode).
Rotation rotation_fixing(const Point& p, double angle);

// Orientation-preserving similarity of the chart, x -> scale*x + offset.
struct Similarity {
  double scale;
  Vec offset;

  Similarity(double s, Vec b) : scale(s), offset(std::move(b)) {
    if (!(s > 0.0)) throw std::invalid_argument("similarity scale must be positive");
  }
  Vec apply(const Vec& x) const { return scale * x + offset; }
  Similarity inverse() const { return Similarity(1.0 / scale, -offset / scale); }
};

// Chart Jacobian of a Moebius word. When an intermediate point passes
// through a chart pole the chart form does not exist; the differential is
// then evaluated in the unit-sphere model ((n+1)x(n+1) tangent map) and
// flagged as such.
struct ChartJacobian {
  Mat matrix;
  bool sphere_model = false;
};

// Word of primitive moves (rotations and similarities), applied first to
// last, with the inverse word cached.
class MobiusMap {
 public:
  using Primitive = std::variant<Rotation, Similarity>;

  static MobiusMap identity(int chart_dim);
  static MobiusMap from_word(int chart_dim, std::vector<Primitive> word);
  static MobiusMap similarity(int chart_dim, double scale, Vec offset);
  static MobiusMap rotation(const Rotation& r);

  int chart_dim() const { return dim_; }
  const std::vector<Primitive>& word() const { return word_; }

  Point apply(const Point& x) const;
  Point apply_inverse(const Point& x) const;
  MobiusMap inverse() const;
  MobiusMap compose(const MobiusMap& other) const;  // this after other

  ChartJacobian jacobian(const Point& x) const;

  // Product of the similarity scales in the word (the Euclidean scaling of
  // the affine part; rotations contribute 1).
  double similarity_scale() const;
  bool is_identity() const { return word_.empty(); }
  // True when every rotation primitive comes after every similarity, i.e.
  // the word is of the form (spherical isometry) after (affine map).
  bool is_isometry_after_affine() const;

 private:
  MobiusMap(int dim, std::vector<Primitive> word);
  int dim_;
  std::vector<Primitive> word_;
  std::vector<Primitive> inverse_word_;
};

// Moebius map g with g(B_d(0,1/3)) = B: a similarity by 3*rho followed by
// the rotation taking the chart origin to the ball's center, where rho is
// the Euclidean radius of the recentred chordal ball.
MobiusMap ball_normalizer(const SphericalBall& ball);

struct EuclidBall {
  Vec center;
  double radius;
};

// Affine normalizer for a Euclidean ball: x -> radius*3*x + center, so that
// B_d(0,1/3) maps onto the ball. Rotation-free, hence derivative bounds of
// conjugated maps transfer by pure scaling.
MobiusMap euclid_ball_normalizer(const EuclidBall& ball);

// Smallest chordal ball centred at the Euclidean center that contains the
// Euclidean ball.
SphericalBall enclosing_chi_ball(const EuclidBall& ball);

// Chart realization of a chordal ball that avoids infinity.
EuclidBall chi_ball_to_euclid(const SphericalBall& ball);

}  // namespace bilip::geom
