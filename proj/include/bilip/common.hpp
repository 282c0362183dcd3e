// Shared aliases, deterministic random streams, error types and small
// numeric helpers used across the library.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bilip {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Thrown when damped Newton inversion fails to reach the requested residual.
class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

// Thrown when an input falls outside the supported pipeline class.
class OutOfScopeError : public std::runtime_error {
 public:
  OutOfScopeError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Deterministic random stream. Doubles are produced from raw 64-bit draws
// directly so sequences are identical across standard library
// implementations (distribution classes are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, spare value cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

  Vec gaussian_vec(int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Vec unit_vec(int n) {
    Vec v = gaussian_vec(n);
    double nn = v.norm();
    while (nn < 1e-12) {
      v = gaussian_vec(n);
      nn = v.norm();
    }
    return v / nn;
  }

  // Uniform in the Euclidean ball of given center and radius.
  Vec in_ball(const Vec& center, double radius) {
    const int n = static_cast<int>(center.size());
    const double u = uniform01();
    const double r = radius * std::pow(u, 1.0 / n);
    return center + r * unit_vec(n);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline double spectral_norm(const Mat& m) {
  return m.jacobiSvd().singularValues()(0);
}

inline double sigma_min(const Mat& m) {
  const auto sv = m.jacobiSvd().singularValues();
  return sv(sv.size() - 1);
}

inline Vec unit_axis(int n, int i) {
  Vec v = Vec::Zero(n);
  v(i) = 1.0;
  return v;
}

// Number of worker threads for sampling sweeps. Defaults to one; the
// BILIP_THREADS environment variable overrides.
int thread_count();

// Max-reduction of fn(i) over i in [0, count). The reduction is
// order-independent, so results do not depend on the thread count.
double parallel_max(long count, const std::function<double(long)>& fn);

}  // namespace bilip
