#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace cacheopt {

/// Binomial coefficient as a double; zero outside 0 <= k <= n.
inline double binom(long n, long k) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (long i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Number of raw demand vectors N^K, as a double so huge values do not wrap.
inline double demand_space_size(std::size_t n_files, std::size_t n_users) {
  return std::pow(static_cast<double>(n_files), static_cast<double>(n_users));
}

using UserMask = std::uint32_t;

inline int popcount(UserMask m) { return std::popcount(m); }

/// Visits every count vector c (length n_bins, entries >= 0) summing to total,
/// in lexicographically decreasing order of c.
inline void for_each_composition(std::size_t n_bins, int total,
                                 const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> counts(n_bins, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t bin, int left) {
    if (bin + 1 == n_bins) {
      counts[bin] = left;
      visit(counts);
      return;
    }
    for (int c = left; c >= 0; --c) {
      counts[bin] = c;
      rec(bin + 1, left - c);
    }
    counts[bin] = 0;
  };
  if (n_bins == 0) return;
  rec(0, total);
}

/// Visits every subset of {0..n-1} with size in [min_size, max_size] as a sorted index list.
inline void for_each_subset(std::size_t n, std::size_t min_size, std::size_t max_size,
                            const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (chosen.size() >= min_size) visit(chosen);
    if (chosen.size() == max_size) return;
    for (std::size_t i = start; i < n; ++i) {
      chosen.push_back(i);
      rec(i + 1);
      chosen.pop_back();
    }
  };
  rec(0);
}

}  // namespace cacheopt
