#include <gtest/gtest.h>

#include <sstream>

#include "cacheopt.hpp"
#include "support.hpp"

using namespace cacheopt;
using lp::LpProblem;
using lp::Status;
namespace ts = testing_support;

namespace {

double dual_bound_gap(const LpProblem& p, const lp::LpSolution& s, double& worst_infeasibility) {
  // Lagrangian dual at the reported multipliers: b.y + h.z + sum_j l_j r_j with
  // r = c - A^T y - G^T z; feasibility needs z <= 0, r >= 0 (r = 0 on free columns).
  std::vector<double> r = p.objective;
  double bound = 0.0;
  worst_infeasibility = 0.0;
  for (std::size_t i = 0; i < p.eq_rows.size(); ++i) {
    bound += p.eq_rows[i].rhs * s.duals_eq[i];
    for (const auto& t : p.eq_rows[i].terms) r[t.var] -= t.coef * s.duals_eq[i];
  }
  for (std::size_t i = 0; i < p.le_rows.size(); ++i) {
    worst_infeasibility = std::max(worst_infeasibility, s.duals_le[i]);
    bound += p.le_rows[i].rhs * s.duals_le[i];
    for (const auto& t : p.le_rows[i].terms) r[t.var] -= t.coef * s.duals_le[i];
  }
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (p.lower_bounds[j] == -lp::kInfinity) {
      worst_infeasibility = std::max(worst_infeasibility, std::abs(r[j]));
    } else {
      worst_infeasibility = std::max(worst_infeasibility, -r[j]);
      bound += p.lower_bounds[j] * r[j];
    }
  }
  return s.value - bound;
}

LpProblem random_lp(std::mt19937_64& rng, bool boxed) {
  std::uniform_int_distribution<int> coef(-3, 3), small(0, 4);
  LpProblem p;
  const std::size_t n = 2 + rng() % 3;
  for (std::size_t j = 0; j < n; ++j) p.add_variable("x" + std::to_string(j), coef(rng));
  const std::size_t n_eq = rng() % 3, n_le = 1 + rng() % 3;
  auto row = [&] {
    std::vector<lp::Term> t;
    for (std::size_t j = 0; j < n; ++j) {
      const int c = coef(rng);
      if (c != 0) t.push_back({j, double(c)});
    }
    return t;
  };
  for (std::size_t i = 0; i < n_eq; ++i) p.add_eq(row(), small(rng));
  for (std::size_t i = 0; i < n_le; ++i) p.add_le(row(), coef(rng) + 2);
  if (boxed) {
    std::vector<lp::Term> all;
    for (std::size_t j = 0; j < n; ++j) all.push_back({j, 1.0});
    p.add_le(all, 10.0);
  }
  return p;
}

}  // namespace

TEST(Simplex, TrivialExamples) {
  LpProblem a;
  const auto x = a.add_variable("x", -1.0);
  a.add_le({{x, 1.0}}, 1.0);
  const auto sa = lp::solve(a);
  ASSERT_EQ(sa.status, Status::Optimal);
  EXPECT_NEAR(sa.x[0], 1.0, 1e-12);
  EXPECT_NEAR(sa.value, -1.0, 1e-12);

  LpProblem b;
  const auto u = b.add_variable("x", 1.0), v = b.add_variable("y", 1.0);
  b.add_eq({{u, 1.0}, {v, 1.0}}, 2.0);
  const auto sb = lp::solve(b);
  ASSERT_EQ(sb.status, Status::Optimal);
  EXPECT_NEAR(sb.value, 2.0, 1e-12);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  LpProblem a;
  const auto x = a.add_variable("x", 1.0);
  a.add_le({{x, 1.0}}, 1.0);
  a.add_ge({{x, 1.0}}, 2.0);
  EXPECT_EQ(lp::solve(a).status, Status::Infeasible);

  LpProblem b;
  const auto y = b.add_variable("y", -1.0);
  b.add_ge({{y, 1.0}}, 1.0);
  EXPECT_EQ(lp::solve(b).status, Status::Unbounded);

  LpProblem c;
  c.add_variable("z", 0.0);
  c.add_eq({{0, 1.0}}, -1.0);
  EXPECT_EQ(lp::solve(c).status, Status::Infeasible);
}

TEST(Simplex, FreeVariablesAndLowerBounds) {
  LpProblem p;
  const auto f = p.add_variable("f", 1.0, -lp::kInfinity);
  const auto g = p.add_variable("g", 1.0, 2.5);
  p.add_ge({{f, 1.0}, {g, -1.0}}, -4.0);  // f >= g - 4
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.x[1], 2.5, 1e-12);
  EXPECT_NEAR(s.x[0], -1.5, 1e-12);
  EXPECT_NEAR(s.value, 1.0, 1e-12);
}

TEST(Simplex, NegativeRightHandSides) {
  LpProblem p;
  const auto x = p.add_variable("x", 1.0), y = p.add_variable("y", 2.0);
  p.add_le({{x, -1.0}, {y, -1.0}}, -3.0);
  p.add_eq({{x, 1.0}, {y, -1.0}}, -1.0);
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.x[0], 1.0, 1e-12);
  EXPECT_NEAR(s.x[1], 2.0, 1e-12);
}

TEST(Simplex, DuplicateAndRedundantRows) {
  LpProblem p;
  const auto x = p.add_variable("x", 1.0), y = p.add_variable("y", 3.0);
  for (int k = 0; k < 3; ++k) p.add_eq({{x, 1.0}, {y, 1.0}}, 2.0);
  p.add_eq({{y, 2.0}, {x, 2.0}}, 4.0);  // linearly dependent, not an exact duplicate
  p.add_le({{y, 1.0}}, 5.0);
  p.add_le({{y, 1.0}}, 5.0);
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.value, 2.0, 1e-12);
  EXPECT_EQ(s.duals_eq.size(), 4u);
  EXPECT_EQ(s.duals_le.size(), 2u);
  double worst = 0.0;
  EXPECT_NEAR(dual_bound_gap(p, s, worst), 0.0, 1e-9);
  EXPECT_LE(worst, 1e-9);
}

TEST(Simplex, RejectsMalformedProblems) {
  LpProblem p;
  p.add_variable("x", std::nan(""));
  EXPECT_THROW(lp::solve(p), Error);
  LpProblem q;
  q.add_variable("x", 1.0);
  q.add_le({{3, 1.0}}, 1.0);
  EXPECT_THROW(lp::solve(q), Error);
}

TEST(Simplex, DegenerateCycleProneProblem) {
  // Beale's classic cycling example under the textbook rule.
  LpProblem p;
  const auto x4 = p.add_variable("x4", -0.75), x5 = p.add_variable("x5", 150.0);
  const auto x6 = p.add_variable("x6", -0.02), x7 = p.add_variable("x7", 6.0);
  p.add_le({{x4, 0.25}, {x5, -60.0}, {x6, -0.04}, {x7, 9.0}}, 0.0);
  p.add_le({{x4, 0.5}, {x5, -90.0}, {x6, -0.02}, {x7, 3.0}}, 0.0);
  p.add_le({{x6, 1.0}}, 1.0);
  const auto s = lp::solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.value, -0.05, 1e-12);
}

// Property: agrees with brute-force vertex enumeration; residuals and duals check out.
TEST(SimplexProperty, MatchesVertexEnumeration) {
  std::mt19937_64 rng(555);
  int optimal = 0, infeasible = 0;
  for (int t = 0; t < 400; ++t) {
    const LpProblem p = random_lp(rng, true);
    const auto s = lp::solve(p);
    const auto oracle = ts::vertex_oracle(p);
    if (!oracle.feasible) {
      EXPECT_EQ(s.status, Status::Infeasible) << "trial " << t;
      ++infeasible;
      continue;
    }
    ASSERT_EQ(s.status, Status::Optimal) << "trial " << t;
    ++optimal;
    EXPECT_NEAR(s.value, oracle.value, 1e-9) << "trial " << t;
    EXPECT_LE(ts::max_residual(p, s.x), 1e-9);
    double worst = 0.0;
    const double gap = dual_bound_gap(p, s, worst);
    EXPECT_GE(gap, -1e-9);
    EXPECT_LE(worst, 1e-9);
    EXPECT_NEAR(gap, 0.0, 1e-8);
  }
  EXPECT_GT(optimal, 100);
  EXPECT_GT(infeasible, 10);
}

TEST(SimplexProperty, UnboundedDetected) {
  std::mt19937_64 rng(556);
  int unbounded = 0;
  for (int t = 0; t < 300; ++t) {
    const LpProblem p = random_lp(rng, false);
    const auto s = lp::solve(p);
    LpProblem boxed = p;
    std::vector<lp::Term> all;
    for (std::size_t j = 0; j < p.n_vars(); ++j) all.push_back({j, 1.0});
    boxed.add_le(all, 1e4);
    const auto sb = lp::solve(boxed);
    if (s.status == Status::Unbounded) {
      ++unbounded;
      ASSERT_EQ(sb.status, Status::Optimal);
      EXPECT_LT(sb.value, -1.0);  // every objective coefficient is an integer: the box binds
    } else if (s.status == Status::Optimal) {
      ASSERT_EQ(sb.status, Status::Optimal);
      EXPECT_NEAR(s.value, sb.value, 1e-9);
    } else {
      EXPECT_EQ(s.status, Status::Infeasible);
      EXPECT_EQ(sb.status, Status::Infeasible);
    }
  }
  EXPECT_GT(unbounded, 10);
}

TEST(SimplexProperty, Deterministic) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 30; ++t) {
    const LpProblem p = random_lp(rng, true);
    const auto a = lp::solve(p), b = lp::solve(p);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(a.x, b.x);
  }
  const Instance inst(4, 2.0, zipf_popularity(7, 0.56));
  const auto p1 = detail::build_epigraph_lp(inst);
  const auto a = lp::solve(p1), b = lp::solve(p1);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.x, b.x);
}

TEST(Simplex, PlacementLpMatchesGroupingSearch) {
  const Instance inst(2, 1.0, {0.6, 0.4});
  const auto s = lp::solve(detail::build_p3(inst, RateObjective::Mccs));
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.value, best_grouping(inst).rate, 1e-12);
}

TEST(Simplex, PlacementLpResidualsAndDuals) {
  for (double M : {0.0, 0.7, 1.75, 2.0, 3.3, 7.0}) {
    const Instance inst(4, M, zipf_popularity(7, 0.56));
    for (const auto& p : {detail::build_p3(inst, RateObjective::Mccs), detail::build_epigraph_lp(inst)}) {
      const auto s = lp::solve(p);
      ASSERT_EQ(s.status, Status::Optimal);
      EXPECT_LE(ts::max_residual(p, s.x), 1e-9);
      double worst = 0.0;
      const double gap = dual_bound_gap(p, s, worst);
      EXPECT_LE(worst, 1e-9) << "M=" << M;
      EXPECT_NEAR(gap, 0.0, 1e-9) << "M=" << M;
    }
  }
}

TEST(Simplex, SolverHookIsUsed) {
  int calls = 0;
  lp::Solver counting = [&](const LpProblem& p) {
    ++calls;
    return lp::solve(p);
  };
  const Instance inst(2, 1.0, {0.6, 0.4});
  const auto r = lower_bound_p2(inst, counting);
  EXPECT_EQ(calls, 1);
  EXPECT_NEAR(r.value, lower_bound_p2(inst).value, 0.0);
}

TEST(LpFormat, WritesReadableDump) {
  LpProblem p;
  const auto x = p.add_variable("x", -1.0), y = p.add_variable("y free", 2.0, -lp::kInfinity);
  p.add_le({{x, 1.0}, {y, -1.0}}, 1.0);
  p.add_eq({{y, 1.0}}, 0.5);
  std::ostringstream os;
  lp::write_lp_format(os, p);
  const std::string text = os.str();
  EXPECT_NE(text.find("Minimize"), std::string::npos);
  EXPECT_NE(text.find("Subject To"), std::string::npos);
  EXPECT_NE(text.find("free"), std::string::npos);
  EXPECT_NE(text.find("End"), std::string::npos);
}
