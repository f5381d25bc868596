#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

#include "cacheopt/combinatorics.hpp"
#include "cacheopt/error.hpp"
#include "cacheopt/model.hpp"

namespace cacheopt {

inline DistinctSet distinct_set(const Demand& d) {
  DistinctSet s{d.requests};
  std::sort(s.files.begin(), s.files.end());
  s.files.erase(std::unique(s.files.begin(), s.files.end()), s.files.end());
  return s;
}

/// Users holding one request per distinct file; ordered by the file they request.
struct LeaderGroup {
  std::vector<std::size_t> users;

  UserMask mask() const {
    UserMask m = 0;
    for (std::size_t u : users) m |= UserMask{1} << u;
    return m;
  }
};

/// Leader group picking the lowest-index user for every distinct file.
inline LeaderGroup leader_group(const Demand& d) {
  LeaderGroup g;
  for (std::size_t f : distinct_set(d).files) {
    for (std::size_t k = 0; k < d.n_users(); ++k) {
      if (d[k] == f) {
        g.users.push_back(k);
        break;
      }
    }
  }
  return g;
}

/// Size of the zero-padded XOR message for user subset S: max_{k in S} a_{d_k,|S|-1}.
inline double coded_message_size(UserMask subset, const Demand& d, const Placement& a) {
  if (subset == 0) fail(ErrorKind::InvalidInput, "coded message needs a nonempty user subset");
  const std::size_t l = static_cast<std::size_t>(popcount(subset)) - 1;
  double m = 0.0;
  for (std::size_t k = 0; k < d.n_users(); ++k) {
    if (subset & (UserMask{1} << k)) m = std::max(m, a(d[k], l));
  }
  return m;
}

inline double coded_message_size(const std::vector<std::size_t>& subset, const Demand& d,
                                 const Placement& a) {
  UserMask m = 0;
  for (std::size_t k : subset) m |= UserMask{1} << k;
  return coded_message_size(m, d, a);
}

namespace detail {

inline void check_rate_inputs(const Demand& d, const Placement& a) {
  if (a.n_users() > 16) fail(ErrorKind::SizeGuard, "at most 16 users are supported");
  validate_demand(d, a.n_files(), a.n_users());
}

}  // namespace detail

/// Delivery rate when only messages for subsets meeting `leaders` are sent.
inline double rate_with_leaders(const Demand& d, const Placement& a, UserMask leaders) {
  detail::check_rate_inputs(d, a);
  const UserMask full = (UserMask{1} << d.n_users()) - 1;
  double r = 0.0;
  for (UserMask s = 1; s <= full; ++s) {
    if (s & leaders) r += coded_message_size(s, d, a);
  }
  return r;
}

/// MCCS rate: total size of the non-redundant messages.
inline double rate_mccs(const Demand& d, const Placement& a) {
  return rate_with_leaders(d, a, leader_group(d).mask());
}

/// CCS rate: one message per nonempty user subset.
inline double rate_ccs(const Demand& d, const Placement& a) {
  return rate_with_leaders(d, a, (UserMask{1} << d.n_users()) - 1);
}

/// Redundant-request counts of a demand, with distinct files in popularity order.
struct RedundancyProfile {
  std::vector<std::size_t> order;       // phi(1..u): distinct files, most popular first
  std::vector<std::size_t> per_file;    // redundant requests for phi(i)
  std::vector<std::size_t> cumulative;  // hat_n[i] for i = 0..u, hat_n[0] = 0
};

inline RedundancyProfile redundancy_profile(const Demand& d) {
  RedundancyProfile p;
  // Files are indexed by decreasing popularity, so index order is popularity order.
  p.order = distinct_set(d).files;
  p.cumulative.push_back(0);
  for (std::size_t f : p.order) {
    const auto c = static_cast<std::size_t>(std::count(d.requests.begin(), d.requests.end(), f));
    p.per_file.push_back(c - 1);
    p.cumulative.push_back(p.cumulative.back() + c - 1);
  }
  return p;
}

/// MCCS rate through redundant-request counting; valid for popularity-first placements only.
inline double rate_mccs_lemma3(const Demand& d, const Placement& a) {
  detail::check_rate_inputs(d, a);
  require_popularity_first(a);
  const long K = static_cast<long>(d.n_users());
  const RedundancyProfile prof = redundancy_profile(d);
  const long u = static_cast<long>(prof.order.size());
  double r = 0.0;
  for (long l = 0; l <= K - 1; ++l) {
    for (long i = 1; i <= u; ++i) {
      const long before = static_cast<long>(prof.cumulative[static_cast<std::size_t>(i - 1)]);
      const long upto = static_cast<long>(prof.cumulative[static_cast<std::size_t>(i)]);
      double coef = 0.0;
      for (long j = i; j <= u; ++j) coef += binom(K - j - before, l);
      for (long j = i + 1; j <= u; ++j) coef -= binom(K - j - upto, l);
      r += coef * a(prof.order[static_cast<std::size_t>(i - 1)], static_cast<std::size_t>(l));
    }
  }
  return r;
}

/// All demand vectors sharing one multiset of requests.
struct DemandClass {
  std::vector<int> counts;  // requests per file
  Demand representative;    // sorted requests
  double probability = 0.0; // total probability of the class
  std::size_t n_distinct = 0;
};

inline constexpr double kEnumerationGuard = 1e7;

inline void check_enumerable(std::size_t n_files, std::size_t n_users) {
  if (demand_space_size(n_files, n_users) > kEnumerationGuard) {
    fail(ErrorKind::SizeGuard, "N^K exceeds the exact-enumeration guard of 1e7");
  }
}

/// Visits every demand multiset with its multinomial probability, in a fixed order.
inline void for_each_demand_class(const Instance& inst,
                                  const std::function<void(const DemandClass&)>& visit) {
  check_enumerable(inst.n_files(), inst.n_users());
  const int K = static_cast<int>(inst.n_users());
  const double k_fact = factorial(K);
  DemandClass cls;
  for_each_composition(inst.n_files(), K, [&](const std::vector<int>& counts) {
    cls.counts = counts;
    cls.representative.requests.clear();
    cls.n_distinct = 0;
    double prob = k_fact;
    for (std::size_t n = 0; n < counts.size(); ++n) {
      if (counts[n] == 0) continue;
      ++cls.n_distinct;
      prob *= std::pow(inst.popularity(n), counts[n]) / factorial(counts[n]);
      for (int c = 0; c < counts[n]; ++c) cls.representative.requests.push_back(n);
    }
    cls.probability = prob;
    visit(cls);
  });
}

enum class Scheme { Mccs, Ccs };

inline double rate(Scheme scheme, const Demand& d, const Placement& a) {
  return scheme == Scheme::Mccs ? rate_mccs(d, a) : rate_ccs(d, a);
}

/// Exact average rate over random demands.  Placements obeying the per-subset-size
/// symmetry make the rate depend only on the request multiset, so each class is
/// evaluated once.
inline double expected_rate(Scheme scheme, const Instance& inst, const Placement& a) {
  double total = 0.0;
  for_each_demand_class(inst, [&](const DemandClass& c) {
    if (c.probability > 0.0) total += c.probability * rate(scheme, c.representative, a);
  });
  return total;
}

/// Expectation of f over all-distinct demands under the renormalized product measure.
inline double conditional_expectation_distinct(const Instance& inst,
                                               const std::function<double(const Demand&)>& f) {
  if (inst.n_users() > inst.n_files()) {
    fail(ErrorKind::InvalidInput, "all-distinct demands need K <= N");
  }
  double mass = 0.0;
  double total = 0.0;
  for_each_demand_class(inst, [&](const DemandClass& c) {
    if (c.n_distinct != inst.n_users() || c.probability <= 0.0) return;
    mass += c.probability;
    total += c.probability * f(c.representative);
  });
  if (!(mass > 0.0)) fail(ErrorKind::InvalidInput, "all-distinct demands have zero probability");
  return total / mass;
}

inline double conditional_expected_rate_distinct(const Instance& inst, const Placement& a) {
  return conditional_expectation_distinct(inst, [&](const Demand& d) { return rate_mccs(d, a); });
}

}  // namespace cacheopt
