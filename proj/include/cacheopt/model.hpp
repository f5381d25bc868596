#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cacheopt/combinatorics.hpp"
#include "cacheopt/error.hpp"

namespace cacheopt {

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kEntryTol = 1e-12;

/// Caching problem: N files indexed by decreasing popularity, K users with
/// cache size M each.  With uniform sizes every file has size 1 and M is in
/// files; otherwise sizes and M are in bits.
class Instance {
 public:
  Instance(std::size_t n_users, double cache_size, std::vector<double> popularity,
           std::vector<double> file_sizes = {})
      : n_users_(n_users),
        cache_size_(cache_size),
        popularity_(std::move(popularity)),
        file_sizes_(std::move(file_sizes)) {
    if (file_sizes_.empty()) {
      file_sizes_.assign(popularity_.size(), 1.0);
    }
    validate();
  }

  std::size_t n_files() const { return popularity_.size(); }
  std::size_t n_users() const { return n_users_; }
  double cache_size() const { return cache_size_; }
  const std::vector<double>& popularity() const { return popularity_; }
  const std::vector<double>& file_sizes() const { return file_sizes_; }
  double popularity(std::size_t n) const { return popularity_[n]; }
  double file_size(std::size_t n) const { return file_sizes_[n]; }

  bool uniform_sizes() const {
    return std::all_of(file_sizes_.begin(), file_sizes_.end(), [](double f) { return f == 1.0; });
  }

  double total_size() const { return std::accumulate(file_sizes_.begin(), file_sizes_.end(), 0.0); }

  Instance with_cache(double cache_size) const {
    return Instance(n_users_, cache_size, popularity_, file_sizes_);
  }

 private:
  void validate() const {
    if (popularity_.empty()) fail(ErrorKind::InvalidInput, "instance needs at least one file");
    if (n_users_ == 0) fail(ErrorKind::InvalidInput, "instance needs at least one user");
    if (n_users_ > 16) fail(ErrorKind::SizeGuard, "at most 16 users are supported");
    if (file_sizes_.size() != popularity_.size()) {
      fail(ErrorKind::InvalidInput, "sizes and popularity have different lengths");
    }
    double sum = 0.0;
    for (std::size_t n = 0; n < popularity_.size(); ++n) {
      if (!std::isfinite(popularity_[n]) || popularity_[n] < 0.0) {
        fail(ErrorKind::InvalidInput, "popularity entries must be finite and nonnegative");
      }
      if (n > 0 && popularity_[n] > popularity_[n - 1]) {
        fail(ErrorKind::InvalidInput, "popularity must be sorted nonincreasing");
      }
      if (!std::isfinite(file_sizes_[n]) || file_sizes_[n] <= 0.0) {
        fail(ErrorKind::InvalidInput, "file sizes must be positive");
      }
      sum += popularity_[n];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "popularity sums to " << sum << ", expected 1";
      fail(ErrorKind::InvalidInput, os.str());
    }
    if (!std::isfinite(cache_size_) || cache_size_ < 0.0 ||
        cache_size_ > total_size() + kFeasibilityTol) {
      fail(ErrorKind::InvalidInput, "cache size must lie in [0, total file size]");
    }
  }

  std::size_t n_users_;
  double cache_size_;
  std::vector<double> popularity_;
  std::vector<double> file_sizes_;
};

/// Popularity sorted nonincreasing together with the permutation applied.
/// order[i] is the caller's index of sorted file i.
struct SortedFiles {
  std::vector<double> popularity;
  std::vector<double> file_sizes;
  std::vector<std::size_t> order;
};

/// Sorts files by decreasing popularity (stable).  Input must sum to 1 within 1e-6;
/// the residual (typically rounding in hand-typed vectors) is renormalized away.
inline SortedFiles sort_by_popularity(const std::vector<double>& popularity,
                                      std::vector<double> file_sizes = {}) {
  if (popularity.empty()) fail(ErrorKind::InvalidInput, "empty popularity vector");
  if (file_sizes.empty()) file_sizes.assign(popularity.size(), 1.0);
  if (file_sizes.size() != popularity.size()) {
    fail(ErrorKind::InvalidInput, "sizes and popularity have different lengths");
  }
  SortedFiles out;
  out.order.resize(popularity.size());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t x, std::size_t y) { return popularity[x] > popularity[y]; });
  double sum = std::accumulate(popularity.begin(), popularity.end(), 0.0);
  if (!(std::abs(sum - 1.0) <= 1e-6)) fail(ErrorKind::InvalidInput, "popularity must sum to 1");
  for (std::size_t i : out.order) {
    out.popularity.push_back(popularity[i] / sum);
    out.file_sizes.push_back(file_sizes[i]);
  }
  return out;
}

/// Zipf law p_n proportional to n^-theta; generated already sorted.
inline std::vector<double> zipf_popularity(std::size_t n_files, double theta) {
  if (n_files == 0 || !(theta >= 0.0)) fail(ErrorKind::InvalidInput, "zipf needs N >= 1, theta >= 0");
  std::vector<double> p(n_files);
  double sum = 0.0;
  for (std::size_t n = 0; n < n_files; ++n) {
    p[n] = std::pow(static_cast<double>(n + 1), -theta);
    sum += p[n];
  }
  for (double& x : p) x /= sum;
  return p;
}

/// Twelve-file step distribution: one hot file, six warm, five cold.
inline std::vector<double> step_popularity() {
  std::vector<double> p;
  p.push_back(7.0 / 12.0);
  for (int i = 0; i < 6; ++i) p.push_back(1.0 / 18.0);
  for (int i = 0; i < 5; ++i) p.push_back(1.0 / 60.0);
  return p;
}

/// Per-subset-size subfile sizes (a_{n,0}, ..., a_{n,K}) for one file.
using PlacementVector = std::vector<double>;

/// Placement vectors for all N files; row n is file n in popularity order.
class Placement {
 public:
  Placement() = default;
  Placement(std::size_t n_files, std::size_t n_users)
      : n_users_(n_users), rows_(n_files, PlacementVector(n_users + 1, 0.0)) {}
  explicit Placement(std::vector<PlacementVector> rows) : rows_(std::move(rows)) {
    if (rows_.empty() || rows_.front().empty()) fail(ErrorKind::InvalidInput, "empty placement");
    n_users_ = rows_.front().size() - 1;
    for (const auto& r : rows_) {
      if (r.size() != n_users_ + 1) fail(ErrorKind::InvalidInput, "ragged placement matrix");
    }
  }

  /// Every file stored only at the server.
  static Placement server_only(const Instance& inst) {
    Placement a(inst.n_files(), inst.n_users());
    for (std::size_t n = 0; n < inst.n_files(); ++n) a(n, 0) = inst.file_size(n);
    return a;
  }

  std::size_t n_files() const { return rows_.size(); }
  std::size_t n_users() const { return n_users_; }

  double& operator()(std::size_t n, std::size_t l) { return rows_[n][l]; }
  double operator()(std::size_t n, std::size_t l) const { return rows_[n][l]; }

  const PlacementVector& row(std::size_t n) const { return rows_[n]; }
  PlacementVector& row(std::size_t n) { return rows_[n]; }
  const std::vector<PlacementVector>& rows() const { return rows_; }

  /// Sets tiny negative entries (numerical noise) to zero.
  void clamp_noise(double tol = kFeasibilityTol) {
    for (auto& r : rows_) {
      for (double& x : r) {
        if (x < 0.0 && x > -tol) x = 0.0;
      }
    }
  }

 private:
  std::size_t n_users_ = 0;
  std::vector<PlacementVector> rows_;
};

/// Sum_l C(K,l) a_{n,l}: the size of file n reassembled from its subfiles.
inline double partition_sum(const PlacementVector& v) {
  const long k = static_cast<long>(v.size()) - 1;
  double s = 0.0;
  for (long l = 0; l <= k; ++l) s += binom(k, l) * v[static_cast<std::size_t>(l)];
  return s;
}

/// Sum_l C(K-1,l-1) a_{n,l}: cache memory one user spends on file n.
inline double cache_share(const PlacementVector& v) {
  const long k = static_cast<long>(v.size()) - 1;
  double s = 0.0;
  for (long l = 1; l <= k; ++l) s += binom(k - 1, l - 1) * v[static_cast<std::size_t>(l)];
  return s;
}

inline double cache_usage(const Placement& a) {
  double s = 0.0;
  for (const auto& r : a.rows()) s += cache_share(r);
  return s;
}

/// Number of distinct placement vectors (file groups), rows compared entrywise at tol.
inline std::size_t count_file_groups(const Placement& a, double tol = kEntryTol) {
  std::vector<const PlacementVector*> reps;
  for (const auto& r : a.rows()) {
    bool found = false;
    for (const auto* q : reps) {
      bool same = true;
      for (std::size_t l = 0; l < r.size(); ++l) {
        if (std::abs(r[l] - (*q)[l]) > tol) {
          same = false;
          break;
        }
      }
      if (same) {
        found = true;
        break;
      }
    }
    if (!found) reps.push_back(&r);
  }
  return reps.size();
}

enum class ViolationKind { NegativeEntry, FilePartition, CacheBudget };

struct Violation {
  ViolationKind kind;
  std::optional<std::size_t> file;  // 0-based; empty for the cache budget
  double residual;                  // signed amount by which the constraint is missed
  std::string message;
};

/// Checks nonnegativity, file partition and cache budget; empty result means feasible.
inline std::vector<Violation> validate_placement(const Instance& inst, const Placement& a) {
  if (a.n_files() != inst.n_files() || a.n_users() != inst.n_users()) {
    fail(ErrorKind::InvalidInput, "placement dimensions do not match the instance");
  }
  std::vector<Violation> out;
  for (std::size_t n = 0; n < a.n_files(); ++n) {
    const auto& r = a.row(n);
    for (std::size_t l = 0; l < r.size(); ++l) {
      if (r[l] < -kFeasibilityTol) {
        std::ostringstream os;
        os << "a[" << n + 1 << "][" << l << "] = " << r[l] << " is negative";
        out.push_back({ViolationKind::NegativeEntry, n, r[l], os.str()});
      }
    }
    const double residual = partition_sum(r) - inst.file_size(n);
    if (std::abs(residual) > kFeasibilityTol) {
      std::ostringstream os;
      os << "file " << n + 1 << " partition sums to " << partition_sum(r) << ", expected "
         << inst.file_size(n);
      out.push_back({ViolationKind::FilePartition, n, residual, os.str()});
    }
  }
  const double over = cache_usage(a) - inst.cache_size();
  if (over > kFeasibilityTol) {
    std::ostringstream os;
    os << "cache usage " << cache_usage(a) << " exceeds M = " << inst.cache_size();
    out.push_back({ViolationKind::CacheBudget, std::nullopt, over, os.str()});
  }
  return out;
}

/// True iff a_{n,l} >= a_{n+1,l} for every l >= 1 (more popular files get more cache).
inline bool is_popularity_first(const Placement& a) {
  for (std::size_t n = 0; n + 1 < a.n_files(); ++n) {
    for (std::size_t l = 1; l <= a.n_users(); ++l) {
      if (a(n, l) < a(n + 1, l) - kEntryTol) return false;
    }
  }
  return true;
}

inline void require_popularity_first(const Placement& a) {
  if (!is_popularity_first(a)) {
    fail(ErrorKind::NotPopularityFirst, "placement is not popularity-first");
  }
}

/// One requested file per user (0-based file indices).
struct Demand {
  std::vector<std::size_t> requests;

  std::size_t n_users() const { return requests.size(); }
  std::size_t operator[](std::size_t k) const { return requests[k]; }
};

/// Sorted distinct file indices of a demand.
struct DistinctSet {
  std::vector<std::size_t> files;

  std::size_t size() const { return files.size(); }
  bool operator==(const DistinctSet&) const = default;
};

inline void validate_demand(const Demand& d, std::size_t n_files, std::size_t n_users) {
  if (d.requests.size() != n_users) {
    fail(ErrorKind::InvalidInput, "demand length must equal the number of users");
  }
  for (std::size_t f : d.requests) {
    if (f >= n_files) fail(ErrorKind::InvalidInput, "demand refers to a file that does not exist");
  }
}

}  // namespace cacheopt
