// End-to-end factorization of sphere diffeomorphisms into bi-Lipschitz
// factors of prescribed distortion: fixing rotation, supported split,
// normalization to B_d(0,1/3), propagated path partition, and verification.
#pragma once

#include "bilip/certify.hpp"
#include "bilip/diffeo.hpp"
#include "bilip/geometry.hpp"
#include "bilip/pathcore.hpp"

#include "json.hpp"

#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace bilip::factorize {

// Pipeline input: a word of chart diffeomorphisms, rotations and Moebius
// maps, applied first to last.
class SphereMap {
 public:
  using Term = std::variant<diffeo::SmoothMap, geom::Rotation, geom::MobiusMap>;

  static SphereMap identity(int dim);
  static SphereMap from_term(Term t);
  static SphereMap from_word(int dim, std::vector<Term> word);

  int dim() const { return dim_; }
  const std::vector<Term>& word() const { return word_; }

  geom::Point apply(const geom::Point& x) const;
  // Chart Jacobian; throws when an intermediate point crosses a pole.
  Mat chart_jacobian(const Vec& x) const;
  SphereMap compose(const SphereMap& other) const;  // this after other

 private:
  int dim_ = 0;
  std::vector<Term> word_;
};

struct FactorStep {
  enum class Kind { path_slice, rotation_slice };
  Kind kind = Kind::rotation_slice;

  // Path slice: g o (h_{t1} o h_{t0}^{-1}) o g^{-1} for the stored
  // propagated map and conjugating word.
  std::shared_ptr<const pathcore::PropagatedMap> propagated;
  geom::MobiusMap conjugator = geom::MobiusMap::identity(2);
  double t0 = 0.0, t1 = 0.0;
  int leg = 0;  // 1 or 2 for the supported pieces, 0 for the rotation leg

  std::optional<geom::Rotation> rotation;

  certify::DistortionCertificate certificate;

  geom::Point apply(const geom::Point& x, double newton_tol = 1e-12) const;
};

struct Factorization {
  std::vector<FactorStep> steps;  // application order
  double eps = 0.0;
  double residual = 0.0;          // sampled chi deviation of the composition
  int j_p1 = 0, j_p2 = 0, j_rotation = 0;
  int dim = 2;

  int factor_count() const { return static_cast<int>(steps.size()); }
  geom::Point apply(const geom::Point& x) const;
};

nlohmann::json to_json(const Factorization& f);

struct PipelineOptions {
  std::uint64_t seed = 7;
  int certificate_samples = 32;   // sphere points per slice certificate
  int verify_samples = 1000;
  double newton_tol = 1e-12;
  double min_step = 1e-6;
};

// Multistart probing plus damped Newton descent on chi(f(x), x); returns a
// point moved less than tol, or nothing.
std::optional<geom::Point> find_fixed_point(const SphereMap& f,
                                            double tol = 1e-9,
                                            std::uint64_t seed = 23);

// Identity when f already has a fixed point; otherwise the rotation taking
// f(p) back to a probe point p, so that A o f fixes p.
geom::Rotation fixing_rotation(const SphereMap& f, std::uint64_t seed = 23);

// Slices a rotation into ceil(|angle| / (2 eps)) equal pieces per invariant
// plane; each slice is a chi-isometry moving points at most eps. The
// emitted steps compose to the inverse of A (the path runs from the
// identity to A^{-1}).
std::vector<FactorStep> rotation_factors(const geom::Rotation& A, double eps,
                                         const PipelineOptions& opt = {});

struct SupportedPiece {
  diffeo::SmoothMap map;
  geom::EuclidBall ball;
};

struct SplitResult {
  SupportedPiece f1;
  SupportedPiece f2;  // identity with an empty ball when unused
  bool f2_trivial = true;
};

// Split into maps supported on balls. Ball-supported catalog words qualify;
// two disjointly supported terms split into the two factors; anything not
// recognizably ball-supported requires the interpolation construction that
// is out of scope here and is rejected.
SplitResult split_supported(const SphereMap& f, const geom::Point& fixed);

// Greedy partition of the path into certified slices: step sizes seeded by
// inverting the displacement and derivative bounds, halved on certification
// failure, grown on success.
std::vector<FactorStep> partition_path(
    std::shared_ptr<const pathcore::PropagatedMap> g,
    const geom::MobiusMap& conjugator, double eps, int leg,
    const PipelineOptions& opt = {});

Factorization factorize_diffeo(const SphereMap& f, double eps,
                               const PipelineOptions& opt = {});

struct VerifyReport {
  double max_deviation = 0.0;
  bool certificates_ok = true;
  int failed_certificates = 0;
  bool passed(double tol = 1e-6) const {
    return certificates_ok && max_deviation <= tol;
  }
};

VerifyReport verify_factorization(const SphereMap& f, const Factorization& fac,
                                  int samples, std::uint64_t seed = 29);

}  // namespace bilip::factorize
