// Deterministic point samplers. Streams are prefix-extendable: the first k
// points for a given seed do not depend on the requested count, so refined
// estimates are monotone.
#pragma once

#include "bilip/common.hpp"
#include "bilip/geometry.hpp"

#include <vector>

namespace bilip::sampling {

class Sampler {
 public:
  enum class Domain { sphere, euclid_ball, annulus };

  // Uniform sphere points preceded by fixed probes: infinity, the chart
  // origin, and far shells at |x| = 10 and |x| = 1000.
  static Sampler sphere(int dim, int count, std::uint64_t seed);
  static Sampler euclid_ball(Vec center, double radius, int count,
                             std::uint64_t seed);
  // Planar annulus r_inner <= |x| <= r_outer (excludes the origin).
  static Sampler annulus(double r_inner, double r_outer, int count,
                         std::uint64_t seed);

  Domain domain() const { return domain_; }
  int dim() const { return dim_; }
  int count() const { return count_; }
  std::uint64_t seed() const { return seed_; }

  Sampler with_count(int count) const {
    Sampler s = *this;
    s.count_ = count;
    return s;
  }

  std::vector<geom::Point> points() const;
  // Finite chart coordinates only; the infinity probe is skipped.
  std::vector<Vec> finite_points() const;

 private:
  Domain domain_ = Domain::sphere;
  int dim_ = 2;
  int count_ = 0;
  std::uint64_t seed_ = 0;
  Vec center_;
  double radius_ = 1.0;
  double r_inner_ = 0.5, r_outer_ = 2.0;
};

}  // namespace bilip::sampling
