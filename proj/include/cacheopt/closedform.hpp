#pragma once

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "cacheopt/combinatorics.hpp"
#include "cacheopt/delivery.hpp"
#include "cacheopt/model.hpp"

namespace cacheopt {

/// P_{i,u,n}: probability that a demand has u distinct requests and the i-th
/// non-leader request (non-leader requests ranked most popular first, ties by
/// file index) is for file n.  Indices are 1-based in u and i, 0-based in n.
class RedundancyTable {
 public:
  RedundancyTable(std::size_t n_files, std::size_t n_users)
      : n_files_(n_files),
        n_users_(n_users),
        data_((n_users + 1) * (n_users + 1) * n_files, 0.0) {}

  std::size_t n_files() const { return n_files_; }
  std::size_t n_users() const { return n_users_; }

  double operator()(std::size_t i, std::size_t u, std::size_t n) const { return data_[index(i, u, n)]; }
  double& operator()(std::size_t i, std::size_t u, std::size_t n) { return data_[index(i, u, n)]; }

 private:
  std::size_t index(std::size_t i, std::size_t u, std::size_t n) const {
    return (u * (n_users_ + 1) + i) * n_files_ + n;
  }

  std::size_t n_files_;
  std::size_t n_users_;
  std::vector<double> data_;
};

inline RedundancyTable redundancy_probabilities(const Instance& inst) {
  RedundancyTable table(inst.n_files(), inst.n_users());
  for_each_demand_class(inst, [&](const DemandClass& c) {
    if (c.probability <= 0.0) return;
    // Non-leader requests: every copy of a file beyond the first, in file order.
    std::size_t i = 0;
    for (std::size_t n = 0; n < c.counts.size(); ++n) {
      for (int extra = 1; extra < c.counts[n]; ++extra) {
        ++i;
        table(i, c.n_distinct, n) += c.probability;
      }
    }
  });
  return table;
}

/// Linear coefficients of the average MCCS rate over popularity-first placements.
struct RateCoefficients {
  std::vector<std::vector<double>> g;      // g[n][l], MCCS
  std::vector<std::vector<double>> g_ccs;  // first term only: all messages, CCS
  RedundancyTable p_iun;

  double dot(const std::vector<std::vector<double>>& coef, const Placement& a) const {
    double s = 0.0;
    for (std::size_t n = 0; n < coef.size(); ++n) {
      for (std::size_t l = 0; l < coef[n].size(); ++l) s += coef[n][l] * a(n, l);
    }
    return s;
  }
};

namespace detail {

inline RateCoefficients compute_coefficients(const Instance& inst) {
  const std::size_t N = inst.n_files();
  const long K = static_cast<long>(inst.n_users());
  RateCoefficients rc{{}, {}, redundancy_probabilities(inst)};

  // tail[n] = sum_{n' >= n} p_{n'}
  std::vector<double> tail(N + 1, 0.0);
  for (std::size_t n = N; n-- > 0;) tail[n] = tail[n + 1] + inst.popularity(n);

  rc.g.assign(N, std::vector<double>(static_cast<std::size_t>(K) + 1, 0.0));
  rc.g_ccs = rc.g;
  const long max_u = std::min<long>(static_cast<long>(N), K);
  for (std::size_t n = 0; n < N; ++n) {
    for (long l = 0; l <= K; ++l) {
      const auto li = static_cast<std::size_t>(l);
      // Probability that file n is the most popular among l+1 independent requests.
      const double first = binom(K, l + 1) * (std::pow(tail[n], l + 1) - std::pow(tail[n + 1], l + 1));
      double redundant = 0.0;
      for (long u = 1; u <= max_u; ++u) {
        for (long i = 1; i <= K - u; ++i) {
          redundant += binom(K - u - i, l) *
                       rc.p_iun(static_cast<std::size_t>(i), static_cast<std::size_t>(u), n);
        }
      }
      rc.g_ccs[n][li] = first;
      rc.g[n][li] = first - redundant;
    }
  }
  return rc;
}

struct CoefficientKey {
  std::size_t n_users;
  std::vector<double> popularity;

  bool operator<(const CoefficientKey& o) const {
    if (n_users != o.n_users) return n_users < o.n_users;
    if (popularity.size() != o.popularity.size()) return popularity.size() < o.popularity.size();
    return std::memcmp(popularity.data(), o.popularity.data(), popularity.size() * sizeof(double)) < 0;
  }
};

}  // namespace detail

/// Coefficients depend only on (N, K, p); results are memoized per exact popularity bytes.
inline std::shared_ptr<const RateCoefficients> g_coefficients(const Instance& inst) {
  static std::mutex mu;
  static std::map<detail::CoefficientKey, std::shared_ptr<const RateCoefficients>> cache;
  detail::CoefficientKey key{inst.n_users(), inst.popularity()};
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto rc = std::make_shared<const RateCoefficients>(detail::compute_coefficients(inst));
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 256) cache.clear();
  return cache.emplace(std::move(key), rc).first->second;
}

namespace detail {

inline void check_closed_form_inputs(const Instance& inst, const Placement& a) {
  if (a.n_files() != inst.n_files() || a.n_users() != inst.n_users()) {
    fail(ErrorKind::InvalidInput, "placement dimensions do not match the instance");
  }
  require_popularity_first(a);
}

}  // namespace detail

/// Average MCCS rate sum_n g_n^T a_n, polynomial in N and K once g is known.
inline double avg_rate_closed(const Instance& inst, const Placement& a) {
  detail::check_closed_form_inputs(inst, a);
  const auto rc = g_coefficients(inst);
  return rc->dot(rc->g, a);
}

/// Average CCS rate: the same expression without the redundant-message correction.
inline double avg_rate_ccs_closed(const Instance& inst, const Placement& a) {
  detail::check_closed_form_inputs(inst, a);
  const auto rc = g_coefficients(inst);
  return rc->dot(rc->g_ccs, a);
}

}  // namespace cacheopt
