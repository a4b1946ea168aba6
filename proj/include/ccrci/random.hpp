#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "ccrci/linops.hpp"

namespace ccrci {

/// Seedable generator whose draws are identical on every platform: the
/// mt19937_64 sequence is fixed by the standard, and the conversion to reals
/// is done here rather than by a library distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  Vector uniform_vector(const Vector& lo, const Vector& hi) {
    Vector v(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) v(i) = uniform(lo(i), hi(i));
    return v;
  }

  /// Uniform point of the probability simplex of dimension k.
  Vector simplex_weights(Eigen::Index k) {
    Vector w(k);
    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      w(i) = -std::log(1.0 - uniform());
      total += w(i);
    }
    return w / total;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ccrci
