#include "bilip/sampling.hpp"

namespace bilip::sampling {

Sampler Sampler::sphere(int dim, int count, std::uint64_t seed) {
  Sampler s;
  s.domain_ = Domain::sphere;
  s.dim_ = dim;
  s.count_ = count;
  s.seed_ = seed;
  return s;
}

Sampler Sampler::euclid_ball(Vec center, double radius, int count,
                             std::uint64_t seed) {
  Sampler s;
  s.domain_ = Domain::euclid_ball;
  s.dim_ = static_cast<int>(center.size());
  s.center_ = std::move(center);
  s.radius_ = radius;
  s.count_ = count;
  s.seed_ = seed;
  return s;
}

Sampler Sampler::annulus(double r_inner, double r_outer, int count,
                         std::uint64_t seed) {
  Sampler s;
  s.domain_ = Domain::annulus;
  s.dim_ = 2;
  s.r_inner_ = r_inner;
  s.r_outer_ = r_outer;
  s.count_ = count;
  s.seed_ = seed;
  return s;
}

std::vector<geom::Point> Sampler::points() const {
  std::vector<geom::Point> pts;
  pts.reserve(count_);
  Rng rng(seed_);

  if (domain_ == Domain::sphere) {
    // Fixed probes first so every spherical estimate exercises infinity and
    // the far shells.
    std::vector<geom::Point> probes;
    probes.push_back(geom::Point::infinity(dim_));
    probes.push_back(geom::Point::origin(dim_));
    for (double shell : {10.0, 1000.0}) {
      probes.push_back(geom::Point::finite(shell * unit_axis(dim_, 0)));
      probes.push_back(geom::Point::finite(-shell * unit_axis(dim_, 1 % dim_)));
    }
    for (const auto& p : probes) {
      if (static_cast<int>(pts.size()) >= count_) return pts;
      pts.push_back(p);
    }
    while (static_cast<int>(pts.size()) < count_) {
      Vec v = rng.unit_vec(dim_ + 1);
      pts.push_back(geom::project_chart(v));
    }
    return pts;
  }

  if (domain_ == Domain::euclid_ball) {
    while (static_cast<int>(pts.size()) < count_)
      pts.push_back(geom::Point::finite(rng.in_ball(center_, radius_)));
    return pts;
  }

  // Annulus: radius uniform in [r_inner, r_outer], angle uniform.
  while (static_cast<int>(pts.size()) < count_) {
    const double r = rng.uniform(r_inner_, r_outer_);
    const double a = rng.uniform(0.0, 2.0 * M_PI);
    Vec x(2);
    x << r * std::cos(a), r * std::sin(a);
    pts.push_back(geom::Point::finite(std::move(x)));
  }
  return pts;
}

std::vector<Vec> Sampler::finite_points() const {
  std::vector<Vec> out;
  for (const auto& p : points())
    if (!p.is_infinity()) out.push_back(p.coords());
  return out;
}

}  // namespace bilip::sampling
