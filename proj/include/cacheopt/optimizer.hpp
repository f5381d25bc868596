#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cacheopt/bounds.hpp"
#include "cacheopt/closedform.hpp"
#include "cacheopt/combinatorics.hpp"
#include "cacheopt/delivery.hpp"
#include "cacheopt/error.hpp"
#include "cacheopt/lp.hpp"
#include "cacheopt/model.hpp"

namespace cacheopt {

enum class GroupingKind { OneGroup, TwoGroupCase1, Case2i, Case2ii };

inline const char* to_string(GroupingKind k) {
  switch (k) {
    case GroupingKind::OneGroup: return "one_group";
    case GroupingKind::TwoGroupCase1: return "case1";
    case GroupingKind::Case2i: return "case2i";
    case GroupingKind::Case2ii: return "case2ii";
  }
  return "?";
}

/// A placement built from the file-grouping structure of the optimum.
/// n_o and n_1 are file counts (1-based breakpoints): files 1..n_o form the
/// first group, n_o+1..n_1 the second, and the rest are served from the server.
struct GroupingCandidate {
  GroupingKind kind = GroupingKind::OneGroup;
  std::size_t n_o = 0;
  std::size_t n_1 = 0;
  std::size_t l_o = 0;
  std::size_t l_1 = 0;
  Placement placement;
  double rate = 0.0;
  std::size_t groups = 0;

  // Tie-break among equal rates: fewest groups, then simplest structure, then smallest indices.
  auto key() const { return std::make_tuple(groups, static_cast<int>(kind), n_o, n_1, l_o, l_1); }
};

namespace detail {

inline constexpr double kCandidateTol = 1e-12;

inline void require_uniform(const Instance& inst) {
  if (!inst.uniform_sizes()) {
    fail(ErrorKind::InvalidInput, "the grouping search needs uniform file sizes");
  }
}

/// Rows 0..n_o-1 get `first`, n_o..n_1-1 get `second`, the rest [1,0,...,0].
inline Placement assemble(const Instance& inst, std::size_t n_o, std::size_t n_1,
                          const PlacementVector& first, const PlacementVector& second) {
  Placement a = Placement::server_only(inst);
  for (std::size_t n = 0; n < n_o; ++n) a.row(n) = first;
  for (std::size_t n = n_o; n < n_1; ++n) a.row(n) = second;
  return a;
}

/// Snaps values within tol of [0,1] onto the interval; nullopt if outside.
inline std::optional<double> unit_fraction(double x) {
  if (x < -kCandidateTol || x > 1.0 + kCandidateTol) return std::nullopt;
  return std::clamp(x, 0.0, 1.0);
}

}  // namespace detail

/// Single group over files 1..n_o with v = MK/n_o; files beyond n_o stay at the server.
inline std::optional<GroupingCandidate> one_group_candidate(const Instance& inst, std::size_t n_o) {
  detail::require_uniform(inst);
  const std::size_t N = inst.n_files();
  const std::size_t K = inst.n_users();
  if (n_o < 1 || n_o > N) return std::nullopt;
  double v = inst.cache_size() * static_cast<double>(K) / static_cast<double>(n_o);
  if (v > static_cast<double>(K) + detail::kCandidateTol) return std::nullopt;
  if (std::abs(v - std::round(v)) <= detail::kCandidateTol) v = std::round(v);
  const auto lo = static_cast<std::size_t>(std::floor(v));
  PlacementVector row(K + 1, 0.0);
  const double frac = v - static_cast<double>(lo);
  row[lo] = (1.0 - frac) / binom(static_cast<long>(K), static_cast<long>(lo));
  if (lo < K) row[lo + 1] = frac / binom(static_cast<long>(K), static_cast<long>(lo + 1));
  GroupingCandidate c;
  c.kind = n_o == N ? GroupingKind::OneGroup : GroupingKind::TwoGroupCase1;
  c.n_o = n_o;
  c.n_1 = n_o;
  c.l_o = lo;
  c.l_1 = lo;
  c.placement = detail::assemble(inst, n_o, n_o, row, row);
  return c;
}

/// First group cached entirely at position l_o; files n_o+1..n_1 split between server and l_o.
/// n_o = 0 leaves only the split group (memory sharing between the server and a non-adjacent l_o).
inline std::optional<GroupingCandidate> two_group_case2i(const Instance& inst, std::size_t n_1,
                                                         std::size_t n_o, std::size_t l_o) {
  detail::require_uniform(inst);
  const std::size_t K = inst.n_users();
  if (n_1 > inst.n_files() || n_o >= n_1 || l_o < 1 || l_o > K) return std::nullopt;
  const double km = static_cast<double>(K) * inst.cache_size();
  const auto x = detail::unit_fraction((km / static_cast<double>(l_o) - static_cast<double>(n_o)) /
                                       static_cast<double>(n_1 - n_o));
  if (!x) return std::nullopt;
  const double b = binom(static_cast<long>(K), static_cast<long>(l_o));
  PlacementVector first(K + 1, 0.0), second(K + 1, 0.0);
  first[l_o] = 1.0 / b;
  second[0] = 1.0 - *x;
  second[l_o] = *x / b;
  GroupingCandidate c;
  c.kind = GroupingKind::Case2i;
  c.n_o = n_o;
  c.n_1 = n_1;
  c.l_o = l_o;
  c.l_1 = l_o;
  c.placement = detail::assemble(inst, n_o, n_1, first, second);
  return c;
}

/// First group split between positions l_o and l_1; second group between server and l_o.
inline std::optional<GroupingCandidate> two_group_case2ii(const Instance& inst, std::size_t n_1,
                                                          std::size_t n_o, std::size_t l_o,
                                                          std::size_t l_1) {
  detail::require_uniform(inst);
  const std::size_t K = inst.n_users();
  if (n_1 > inst.n_files() || n_o < 1 || n_o >= n_1) return std::nullopt;
  if (l_o < 1 || l_o > K || l_1 < 1 || l_1 > K || l_o == l_1) return std::nullopt;
  const double km = static_cast<double>(K) * inst.cache_size();
  const double lo = static_cast<double>(l_o), l1 = static_cast<double>(l_1);
  const double no = static_cast<double>(n_o), n1 = static_cast<double>(n_1);
  const bool above = lo > km / n1 && l1 < km / no;
  const bool below = lo < km / n1 && l1 > km / no;
  if (!above && !below) return std::nullopt;
  const double den = (lo / l1) * n1 - no;
  if (std::abs(den) < 1e-15) return std::nullopt;
  const auto y = detail::unit_fraction((km / l1 - no) / den);
  if (!y) return std::nullopt;
  const double bo = binom(static_cast<long>(K), static_cast<long>(l_o));
  PlacementVector first(K + 1, 0.0), second(K + 1, 0.0);
  first[l_o] = *y / bo;
  first[l_1] = (1.0 - *y) / binom(static_cast<long>(K), static_cast<long>(l_1));
  second[0] = 1.0 - *y;
  second[l_o] = *y / bo;
  GroupingCandidate c;
  c.kind = GroupingKind::Case2ii;
  c.n_o = n_o;
  c.n_1 = n_1;
  c.l_o = l_o;
  c.l_1 = l_1;
  c.placement = detail::assemble(inst, n_o, n_1, first, second);
  return c;
}

/// Two-group constructions on files 1..n_1 with files n_1+1..N at the server (n_1 < N).
inline std::optional<GroupingCandidate> three_group_candidate(const Instance& inst, std::size_t n_o,
                                                              std::size_t n_1, std::size_t l_o,
                                                              std::size_t l_1) {
  return l_o == l_1 ? two_group_case2i(inst, n_1, n_o, l_o)
                    : two_group_case2ii(inst, n_1, n_o, l_o, l_1);
}

/// Every structurally valid candidate, unscored, in a fixed order.
inline std::vector<GroupingCandidate> enumerate_candidates(const Instance& inst) {
  detail::require_uniform(inst);
  const std::size_t N = inst.n_files();
  const std::size_t K = inst.n_users();
  std::vector<GroupingCandidate> out;
  for (std::size_t n_o = 1; n_o <= N; ++n_o) {
    if (auto c = one_group_candidate(inst, n_o)) out.push_back(std::move(*c));
  }
  for (std::size_t n_1 = 1; n_1 <= N; ++n_1) {
    for (std::size_t n_o = 0; n_o < n_1; ++n_o) {
      for (std::size_t l_o = 1; l_o <= K; ++l_o) {
        for (std::size_t l_1 = 1; l_1 <= K; ++l_1) {
          if (auto c = three_group_candidate(inst, n_o, n_1, l_o, l_1)) out.push_back(std::move(*c));
        }
      }
    }
  }
  return out;
}

enum class RateObjective { Mccs, Ccs };

/// Scores every candidate and returns the minimizer under the deterministic tie-break.
inline GroupingCandidate best_grouping(const Instance& inst, RateObjective objective = RateObjective::Mccs) {
  const auto rc = g_coefficients(inst);
  const auto& coef = objective == RateObjective::Mccs ? rc->g : rc->g_ccs;
  std::optional<GroupingCandidate> best;
  for (auto& c : enumerate_candidates(inst)) {
    if (!is_popularity_first(c.placement) || !validate_placement(inst, c.placement).empty()) continue;
    c.rate = rc->dot(coef, c.placement);
    c.groups = count_file_groups(c.placement);
    if (!best || c.rate < best->rate - 1e-12 ||
        (c.rate <= best->rate + 1e-12 && c.key() < best->key())) {
      best = std::move(c);
    }
  }
  if (!best) fail(ErrorKind::Internal, "no feasible grouping candidate");
  return *best;
}

struct LpPlacement {
  Placement placement;
  double value = 0.0;
  long iterations = 0;
};

namespace detail {

inline LpPlacement finish_lp(const Instance& inst, const lp::LpSolution& sol, const char* what) {
  require_optimal(sol, what);
  return {extract_placement(inst, sol.x), sol.value, sol.iterations};
}

inline lp::LpProblem build_p3(const Instance& inst, RateObjective objective) {
  require_uniform(inst);
  const auto rc = g_coefficients(inst);
  const auto& coef = objective == RateObjective::Mccs ? rc->g : rc->g_ccs;
  lp::LpProblem prob;
  add_placement_block(prob, inst, true);
  add_popularity_first_chain(prob, inst);
  const std::size_t K = inst.n_users();
  for (std::size_t n = 0; n < inst.n_files(); ++n) {
    for (std::size_t l = 0; l <= K; ++l) prob.objective[avar(n, l, K)] = coef[n][l];
  }
  return prob;
}

}  // namespace detail

/// Popularity-first LP over the closed-form objective; certifies the grouping search.
inline LpPlacement solve_p3_lp(const Instance& inst, const lp::Solver& solver = lp::solve) {
  return detail::finish_lp(inst, solver(detail::build_p3(inst, RateObjective::Mccs)), "P3");
}

/// Best CCS rate over popularity-first placements.
inline LpPlacement solve_ccs_lp(const Instance& inst, const lp::Solver& solver = lp::solve) {
  return detail::finish_lp(inst, solver(detail::build_p3(inst, RateObjective::Ccs)), "CCS");
}

inline constexpr std::size_t kP4MaxUsers = 4;
inline constexpr std::size_t kP4MaxFiles = 7;

/// Unrestricted MCCS placement LP in bits: every demand class contributes its
/// non-redundant messages; each max over a set of two or more files gets one
/// epigraph variable shared by all classes.
inline lp::LpProblem build_p4(const Instance& inst) {
  const std::size_t N = inst.n_files();
  const std::size_t K = inst.n_users();
  if (K > kP4MaxUsers || N > kP4MaxFiles) {
    fail(ErrorKind::SizeGuard, "the unrestricted placement LP needs K <= 4 and N <= 7");
  }
  lp::LpProblem prob;
  detail::add_placement_block(prob, inst, false);
  std::map<std::pair<std::vector<std::size_t>, std::size_t>, double> weights;
  const UserMask full = (UserMask{1} << K) - 1;
  for_each_demand_class(inst, [&](const DemandClass& c) {
    if (c.probability <= 0.0) return;
    const Demand& d = c.representative;
    const UserMask leaders = leader_group(d).mask();
    for (UserMask s = 1; s <= full; ++s) {
      if (!(s & leaders)) continue;
      std::vector<std::size_t> files;
      for (std::size_t k = 0; k < K; ++k) {
        if (s & (UserMask{1} << k)) files.push_back(d[k]);
      }
      std::sort(files.begin(), files.end());
      files.erase(std::unique(files.begin(), files.end()), files.end());
      const auto l = static_cast<std::size_t>(popcount(s)) - 1;
      if (files.size() == 1) {
        prob.objective[detail::avar(files[0], l, K)] += c.probability;
      } else {
        weights[{files, l}] += c.probability;
      }
    }
  });
  for (const auto& [key, w] : weights) {
    const auto& [files, l] = key;
    std::string name = "t";
    for (std::size_t f : files) name += "_" + std::to_string(f + 1);
    const std::size_t t = prob.add_variable(name + "_l" + std::to_string(l), w);
    for (std::size_t f : files) prob.add_le({{detail::avar(f, l, K), 1.0}, {t, -1.0}}, 0.0);
  }
  return prob;
}

inline LpPlacement solve_p4_lp(const Instance& inst, const lp::Solver& solver = lp::solve) {
  return detail::finish_lp(inst, solver(build_p4(inst)), "P4");
}

struct OptimizeOptions {
  bool with_bounds = true;
  bool with_ccs = true;
  bool use_lp = false;  // solve P3 instead of the grouping search
  lp::Solver solver = lp::solve;
};

struct OptimizeReport {
  GroupingCandidate best;
  double rate_mccs = 0.0;
  std::optional<double> rate_ccs_opt;
  std::optional<double> lb_p1;
  std::optional<double> lb_p2;
  std::optional<double> gap;  // rate_mccs - lb_p1
};

inline OptimizeReport optimize_mccs(const Instance& inst, const OptimizeOptions& opt = {}) {
  detail::require_uniform(inst);
  OptimizeReport r;
  if (opt.use_lp) {
    const LpPlacement p3 = solve_p3_lp(inst, opt.solver);
    r.best.placement = p3.placement;
    r.best.rate = p3.value;
    r.best.groups = count_file_groups(p3.placement, 1e-6);
  } else {
    r.best = best_grouping(inst);
  }
  r.rate_mccs = r.best.rate;
  if (opt.with_ccs) r.rate_ccs_opt = solve_ccs_lp(inst, opt.solver).value;
  if (opt.with_bounds) {
    r.lb_p1 = lower_bound_p1(inst, opt.solver).value;
    r.lb_p2 = lower_bound_p2(inst, opt.solver).value;
    r.gap = r.rate_mccs - *r.lb_p1;
  }
  return r;
}

}  // namespace cacheopt
