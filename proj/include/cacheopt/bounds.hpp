#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "cacheopt/combinatorics.hpp"
#include "cacheopt/delivery.hpp"
#include "cacheopt/error.hpp"
#include "cacheopt/lp.hpp"
#include "cacheopt/model.hpp"

namespace cacheopt {

inline constexpr std::size_t kMaxDistinctForPermutations = 10;

/// sum_l sum_i C(K-i, l) a_{order(i), l} for one ordering of the distinct files.
inline double rlb_ordered(const std::vector<std::size_t>& order, const Placement& a) {
  const long K = static_cast<long>(a.n_users());
  double s = 0.0;
  for (long l = 0; l <= K - 1; ++l) {
    for (std::size_t i = 1; i <= order.size(); ++i) {
      s += binom(K - static_cast<long>(i), l) * a(order[i - 1], static_cast<std::size_t>(l));
    }
  }
  return s;
}

/// Per-distinct-set lower bound: max over all orderings of D.
inline double rlb_general(const DistinctSet& D, const Placement& a) {
  if (D.size() > kMaxDistinctForPermutations) {
    fail(ErrorKind::SizeGuard, "distinct set too large to enumerate all orderings");
  }
  std::vector<std::size_t> order = D.files;
  std::sort(order.begin(), order.end());
  double best = 0.0;
  bool first = true;
  do {
    const double v = rlb_ordered(order, a);
    if (first || v > best) best = v;
    first = false;
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

/// Lower bound with D taken in decreasing popularity; equals rlb_general on popularity-first placements.
inline double rlb_popfirst(const DistinctSet& D, const Placement& a) {
  require_popularity_first(a);
  std::vector<std::size_t> order = D.files;
  std::sort(order.begin(), order.end());
  return rlb_ordered(order, a);
}

/// P(Unique(d) = D) by inclusion-exclusion over subsets of D.
inline double distinct_set_probability(const Instance& inst, const DistinctSet& D) {
  const std::size_t s = D.size();
  if (s == 0 || s > 30) fail(ErrorKind::InvalidInput, "distinct set size out of range");
  double total = 0.0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << s); ++mask) {
    double mass = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      if (mask & (std::uint64_t{1} << i)) mass += inst.popularity(D.files[i]);
    }
    const int sign = ((s - static_cast<std::size_t>(std::popcount(mask))) % 2 == 0) ? 1 : -1;
    total += sign * std::pow(mass, static_cast<double>(inst.n_users()));
  }
  return std::max(total, 0.0);
}

/// Every possible distinct set (size 1..min(N,K)) with its probability, in a fixed order.
struct WeightedDistinctSet {
  DistinctSet set;
  double probability;
};

inline std::vector<WeightedDistinctSet> all_distinct_sets(const Instance& inst) {
  std::vector<WeightedDistinctSet> out;
  const std::size_t max_size = std::min(inst.n_files(), inst.n_users());
  for_each_subset(inst.n_files(), 1, max_size, [&](const std::vector<std::size_t>& files) {
    DistinctSet D{files};
    out.push_back({D, distinct_set_probability(inst, D)});
  });
  return out;
}

enum class BoundKind { P1, P2, P5 };

inline const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::P1: return "P1";
    case BoundKind::P2: return "P2";
    case BoundKind::P5: return "P5";
  }
  return "?";
}

/// Average of the per-set bound at a fixed placement (the objective of P1/P2/P5).
inline double average_rlb(const Instance& inst, const Placement& a, bool popularity_first) {
  double s = 0.0;
  for (const auto& w : all_distinct_sets(inst)) {
    if (w.probability <= 0.0) continue;
    s += w.probability * (popularity_first ? rlb_popfirst(w.set, a) : rlb_general(w.set, a));
  }
  return s;
}

struct BoundResult {
  double value = 0.0;
  Placement placement;
  BoundKind which = BoundKind::P1;
  long lp_iterations = 0;
};

namespace detail {

/// Index of a_{n,l} among the LP variables.
inline std::size_t avar(std::size_t n, std::size_t l, std::size_t K) { return n * (K + 1) + l; }

/// Adds a_{n,l} variables with the partition equalities and the cache budget row.
inline void add_placement_block(lp::LpProblem& prob, const Instance& inst, bool cache_equality) {
  const std::size_t N = inst.n_files();
  const std::size_t K = inst.n_users();
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t l = 0; l <= K; ++l) {
      prob.add_variable("a_" + std::to_string(n + 1) + "_" + std::to_string(l));
    }
  }
  for (std::size_t n = 0; n < N; ++n) {
    std::vector<lp::Term> terms;
    for (std::size_t l = 0; l <= K; ++l) terms.push_back({avar(n, l, K), binom(static_cast<long>(K), static_cast<long>(l))});
    prob.add_eq(std::move(terms), inst.file_size(n));
  }
  std::vector<lp::Term> cache;
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t l = 1; l <= K; ++l) {
      cache.push_back({avar(n, l, K), binom(static_cast<long>(K) - 1, static_cast<long>(l) - 1)});
    }
  }
  if (cache_equality) {
    prob.add_eq(std::move(cache), inst.cache_size());
  } else {
    prob.add_le(std::move(cache), inst.cache_size());
  }
}

/// a_{n,l} >= a_{n+1,l} for l = 1..K.
inline void add_popularity_first_chain(lp::LpProblem& prob, const Instance& inst) {
  const std::size_t K = inst.n_users();
  for (std::size_t n = 0; n + 1 < inst.n_files(); ++n) {
    for (std::size_t l = 1; l <= K; ++l) {
      prob.add_le({{avar(n + 1, l, K), 1.0}, {avar(n, l, K), -1.0}}, 0.0);
    }
  }
}

inline Placement extract_placement(const Instance& inst, const std::vector<double>& x) {
  Placement a(inst.n_files(), inst.n_users());
  const std::size_t K = inst.n_users();
  for (std::size_t n = 0; n < inst.n_files(); ++n) {
    for (std::size_t l = 0; l <= K; ++l) a(n, l) = x[avar(n, l, K)];
  }
  a.clamp_noise();
  return a;
}

inline void require_optimal(const lp::LpSolution& sol, const char* what) {
  if (sol.status != lp::Status::Optimal) {
    fail(ErrorKind::Internal, std::string(what) + ": LP returned " + lp::to_string(sol.status));
  }
}

inline constexpr std::size_t kMaxEpigraphRows = 200000;

/// Epigraph LP over all orderings of every distinct set (P1, or P5 with file sizes).
inline lp::LpProblem build_epigraph_lp(const Instance& inst) {
  check_enumerable(inst.n_files(), inst.n_users());
  const std::size_t K = inst.n_users();
  const auto sets = all_distinct_sets(inst);
  double rows = 0.0;
  for (const auto& w : sets) rows += factorial(static_cast<int>(w.set.size()));
  if (rows > static_cast<double>(kMaxEpigraphRows)) {
    fail(ErrorKind::SizeGuard, "epigraph LP would exceed the row guard");
  }
  lp::LpProblem prob;
  add_placement_block(prob, inst, false);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto& w = sets[s];
    if (w.set.size() > kMaxDistinctForPermutations) fail(ErrorKind::SizeGuard, "distinct set too large");
    const std::size_t r = prob.add_variable("r_" + std::to_string(s), w.probability);
    std::vector<std::size_t> order = w.set.files;
    do {
      std::vector<lp::Term> terms;
      for (std::size_t l = 0; l + 1 <= K; ++l) {
        for (std::size_t i = 1; i <= order.size(); ++i) {
          const double c = binom(static_cast<long>(K - i), static_cast<long>(l));
          if (c != 0.0) terms.push_back({avar(order[i - 1], l, K), c});
        }
      }
      terms.push_back({r, -1.0});
      prob.add_le(std::move(terms), 0.0);
    } while (std::next_permutation(order.begin(), order.end()));
  }
  return prob;
}

}  // namespace detail

/// General uncoded-placement lower bound (P1).  With nonuniform sizes this is P5.
inline BoundResult lower_bound_p1(const Instance& inst, const lp::Solver& solver = lp::solve) {
  const lp::LpProblem prob = detail::build_epigraph_lp(inst);
  const lp::LpSolution sol = solver(prob);
  detail::require_optimal(sol, "lower bound");
  BoundResult out;
  out.value = sol.value;
  out.placement = detail::extract_placement(inst, sol.x);
  out.which = inst.uniform_sizes() ? BoundKind::P1 : BoundKind::P5;
  out.lp_iterations = sol.iterations;
  return out;
}

/// Nonuniform-size lower bound (P5): partition right-hand sides are the file sizes in bits.
inline BoundResult lower_bound_p5(const Instance& inst, const lp::Solver& solver = lp::solve) {
  BoundResult out = lower_bound_p1(inst, solver);
  out.which = BoundKind::P5;
  return out;
}

/// Popularity-first lower bound (P2): the ordering is fixed, so the LP needs no epigraph.
inline BoundResult lower_bound_p2(const Instance& inst, const lp::Solver& solver = lp::solve) {
  check_enumerable(inst.n_files(), inst.n_users());
  const std::size_t K = inst.n_users();
  lp::LpProblem prob;
  detail::add_placement_block(prob, inst, false);
  detail::add_popularity_first_chain(prob, inst);
  for (const auto& w : all_distinct_sets(inst)) {
    for (std::size_t l = 0; l + 1 <= K; ++l) {
      for (std::size_t i = 1; i <= w.set.size(); ++i) {
        const double c = binom(static_cast<long>(K - i), static_cast<long>(l));
        prob.objective[detail::avar(w.set.files[i - 1], l, K)] += w.probability * c;
      }
    }
  }
  const lp::LpSolution sol = solver(prob);
  detail::require_optimal(sol, "popularity-first lower bound");
  BoundResult out;
  out.value = sol.value;
  out.placement = detail::extract_placement(inst, sol.x);
  out.which = BoundKind::P2;
  out.lp_iterations = sol.iterations;
  return out;
}

}  // namespace cacheopt
