#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace cascade {

/**
 * Deterministic random source. Every draw is derived from mt19937_64 through
 * fixed arithmetic (no std::*_distribution), so a given seed produces the
 * same stream on every platform.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection sampling keeps it exactly uniform.
  std::size_t below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const std::uint64_t bound = n;
    const std::uint64_t limit =
        (std::numeric_limits<std::uint64_t>::max() / bound) * bound;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x < limit) return static_cast<std::size_t>(x % bound);
    }
  }

  // Standard normal via the Box-Muller transform.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Index drawn from an unnormalized nonnegative weight vector.
  int categorical(const Eigen::Ref<const Eigen::VectorXd>& weights) {
    const double total = weights.sum();
    if (!(total > 0.0))
      throw std::invalid_argument("Rng::categorical: weights must have positive mass");
    double u = next_double() * total;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      if (weights[i] < 0.0)
        throw std::invalid_argument("Rng::categorical: negative weight");
      u -= weights[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    // Rounding can leave u at ~0 after the loop; return the last positive bin.
    for (Eigen::Index i = weights.size() - 1; i >= 0; --i)
      if (weights[i] > 0.0) return static_cast<int>(i);
    return static_cast<int>(weights.size() - 1);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cascade
