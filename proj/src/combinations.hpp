#pragma once

#include <cstdint>
#include <vector>

namespace ccrci::detail {

/// Lexicographic k-subsets of {0, ..., n-1}.
class Combinations {
 public:
  Combinations(int n, int k) : n_(n), k_(k), idx_(k) {
    for (int i = 0; i < k; ++i) idx_[i] = i;
    done_ = k > n || k < 0;
  }
  bool done() const { return done_; }
  const std::vector<int>& current() const { return idx_; }
  void next() {
    int i = k_ - 1;
    while (i >= 0 && idx_[i] == n_ - k_ + i) --i;
    if (i < 0) {
      done_ = true;
      return;
    }
    ++idx_[i];
    for (int j = i + 1; j < k_; ++j) idx_[j] = idx_[j - 1] + 1;
  }

 private:
  int n_, k_;
  std::vector<int> idx_;
  bool done_ = false;
};

/// Binomial coefficient saturating at UINT64_MAX.
inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = k < n - k ? k : n - k;
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (r > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace ccrci::detail
