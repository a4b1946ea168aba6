#pragma once

#include <cstdint>
#include <random>

#include "ccrci/linops.hpp"

namespace ccrci::testing {

/// Portable uniform draws for property tests (std distributions are not
/// reproducible across standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  int index(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = uniform(lo, hi);
    return a;
  }
  Vector vector(Eigen::Index n, double lo = -1.0, double hi = 1.0) { return matrix(n, 1, lo, hi); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ccrci::testing
