#pragma once

// Independent oracles and random generators for the test suites.  Nothing here
// reuses the library's enumeration helpers: demands are walked with an odometer,
// user subsets with explicit index lists, and LPs are solved by brute-force
// vertex enumeration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "cacheopt.hpp"

namespace testing_support {

using namespace cacheopt;

inline double choose(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

/// Visits every demand vector in N^K (odometer order) with its product probability.
inline void for_each_raw_demand(const std::vector<double>& p, std::size_t K,
                                const std::function<void(const Demand&, double)>& visit) {
  const std::size_t N = p.size();
  Demand d{std::vector<std::size_t>(K, 0)};
  while (true) {
    double prob = 1.0;
    for (std::size_t f : d.requests) prob *= p[f];
    visit(d, prob);
    std::size_t k = 0;
    while (k < K && ++d.requests[k] == N) d.requests[k++] = 0;
    if (k == K) break;
  }
}

/// All nonempty user subsets as index lists.
inline std::vector<std::vector<std::size_t>> user_subsets(std::size_t K) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t mask = 1; mask < (std::size_t{1} << K); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t k = 0; k < K; ++k) {
      if (mask >> k & 1) s.push_back(k);
    }
    out.push_back(s);
  }
  return out;
}

/// Rate with an explicit leader set: sum of max-subfile sizes over subsets touching the leaders.
inline double naive_rate(const Demand& d, const Placement& a, const std::vector<std::size_t>& leaders,
                         bool all_subsets) {
  double r = 0.0;
  for (const auto& s : user_subsets(d.n_users())) {
    bool touches = all_subsets;
    for (std::size_t k : s) {
      if (std::find(leaders.begin(), leaders.end(), k) != leaders.end()) touches = true;
    }
    if (!touches) continue;
    double m = 0.0;
    for (std::size_t k : s) m = std::max(m, a(d[k], s.size() - 1));
    r += m;
  }
  return r;
}

/// Every valid leader group: one requesting user per distinct file.
inline std::vector<std::vector<std::size_t>> all_leader_groups(const Demand& d) {
  std::vector<std::size_t> files = d.requests;
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  std::vector<std::vector<std::size_t>> choices(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    for (std::size_t k = 0; k < d.n_users(); ++k) {
      if (d[k] == files[i]) choices[i].push_back(k);
    }
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == files.size()) {
      out.push_back(pick);
      return;
    }
    for (std::size_t k : choices[i]) {
      pick.push_back(k);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return out;
}

inline std::vector<std::size_t> lowest_index_leaders(const Demand& d) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < d.n_users(); ++k) {
    bool seen = false;
    for (std::size_t j = 0; j < k; ++j) seen = seen || d[j] == d[k];
    if (!seen) out.push_back(k);
  }
  return out;
}

/// Exact average over all N^K demands, using the naive subset oracle.
inline double brute_expected_rate(const Instance& inst, const Placement& a, bool ccs) {
  double total = 0.0;
  for_each_raw_demand(inst.popularity(), inst.n_users(), [&](const Demand& d, double prob) {
    total += prob * naive_rate(d, a, lowest_index_leaders(d), ccs);
  });
  return total;
}

// ---------------------------------------------------------------- generators

/// Random nonincreasing popularity summing to 1; occasionally with ties.
inline std::vector<double> random_popularity(std::mt19937_64& rng, std::size_t N) {
  std::exponential_distribution<double> ex(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(N);
  for (double& x : p) x = ex(rng) + 1e-3;
  std::sort(p.begin(), p.end(), std::greater<>());
  if (N > 2 && u(rng) < 0.2) p[N - 1] = p[N - 2];
  double s = 0.0;
  for (double x : p) s += x;
  for (double& x : p) x /= s;
  // Make the sum exact to the last bit by folding the residual into the head.
  double t = 0.0;
  for (std::size_t n = 1; n < N; ++n) t += p[n];
  p[0] = 1.0 - t;
  return p;
}

/// Random popularity-first placement: every column l >= 1 is a suffix sum of
/// sparse nonnegative increments, scaled so that no row exceeds one file.
inline Placement random_popfirst_placement(std::mt19937_64& rng, std::size_t N, std::size_t K) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> a(N, std::vector<double>(K + 1, 0.0));
  for (std::size_t l = 1; l <= K; ++l) {
    double acc = 0.0;
    for (std::size_t n = N; n-- > 0;) {
      if (u(rng) < 0.5) acc += u(rng);
      a[n][l] = acc;
    }
  }
  double worst = 0.0;
  for (const auto& r : a) {
    double s = 0.0;
    for (std::size_t l = 1; l <= K; ++l) s += choose(static_cast<int>(K), static_cast<int>(l)) * r[l];
    worst = std::max(worst, s);
  }
  const double scale = worst > 0.0 ? u(rng) / worst : 0.0;
  for (auto& r : a) {
    double s = 0.0;
    for (std::size_t l = 1; l <= K; ++l) {
      r[l] *= scale;
      s += choose(static_cast<int>(K), static_cast<int>(l)) * r[l];
    }
    r[0] = 1.0 - s;
  }
  return Placement(a);
}

/// Random feasible placement without the popularity-first ordering.
inline Placement random_placement(std::mt19937_64& rng, std::size_t N, std::size_t K) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> a(N, std::vector<double>(K + 1, 0.0));
  for (auto& r : a) {
    double s = 0.0;
    for (std::size_t l = 0; l <= K; ++l) {
      r[l] = u(rng) < 0.6 ? u(rng) : 0.0;
      s += choose(static_cast<int>(K), static_cast<int>(l)) * r[l];
    }
    if (s == 0.0) {
      r[0] = 1.0;
      s = 1.0;
    }
    for (double& x : r) x /= s;
  }
  return Placement(a);
}

inline double usage(const Placement& a) {
  double s = 0.0;
  const int K = static_cast<int>(a.n_users());
  for (const auto& r : a.rows()) {
    for (int l = 1; l <= K; ++l) s += choose(K - 1, l - 1) * r[static_cast<std::size_t>(l)];
  }
  return s;
}

// ---------------------------------------------------------------- LP oracle

/// Brute-force LP: min c.x, A x = b, G x <= h, x >= 0, by enumerating every
/// basis of the slack-augmented system.  Only for a handful of variables.
struct VertexResult {
  bool feasible = false;
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> x;
};

inline std::optional<std::vector<double>> gauss_solve(std::vector<std::vector<double>> M, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
    }
    if (std::abs(M[piv][c]) < 1e-11) return std::nullopt;
    std::swap(M[piv], M[c]);
    std::swap(rhs[piv], rhs[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = M[r][c] / M[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) M[r][k] -= f * M[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  for (std::size_t r = 0; r < n; ++r) rhs[r] /= M[r][r];
  return rhs;
}

inline VertexResult vertex_enumeration(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                                       const std::vector<double>& b, const std::vector<std::vector<double>>& G,
                                       const std::vector<double>& h) {
  const std::size_t n = c.size();
  const std::size_t m = A.size() + G.size();
  const std::size_t cols = n + G.size();
  std::vector<std::vector<double>> full(m, std::vector<double>(cols, 0.0));
  std::vector<double> rhs(m);
  for (std::size_t i = 0; i < A.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) full[i][j] = A[i][j];
    rhs[i] = b[i];
  }
  for (std::size_t i = 0; i < G.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) full[A.size() + i][j] = G[i][j];
    full[A.size() + i][n + i] = 1.0;
    rhs[A.size() + i] = h[i];
  }
  VertexResult best;
  std::vector<std::size_t> basis;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (basis.size() == m) {
      std::vector<std::vector<double>> B(m, std::vector<double>(m));
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < m; ++k) B[i][k] = full[i][basis[k]];
      }
      const auto xb = gauss_solve(B, rhs);
      if (!xb) return;
      for (double v : *xb) {
        if (v < -1e-9) return;
      }
      std::vector<double> x(n, 0.0);
      for (std::size_t k = 0; k < m; ++k) {
        if (basis[k] < n) x[basis[k]] = (*xb)[k];
      }
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v += c[j] * x[j];
      if (v < best.value) {
        best.feasible = true;
        best.value = v;
        best.x = x;
      }
      return;
    }
    for (std::size_t j = start; j < cols; ++j) {
      basis.push_back(j);
      rec(j + 1);
      basis.pop_back();
    }
  };
  rec(0);
  return best;
}

/// Densifies an LpProblem (all lower bounds must be zero) for the vertex oracle.
inline VertexResult vertex_oracle(const lp::LpProblem& p) {
  const std::size_t n = p.n_vars();
  auto dense = [&](const std::vector<lp::Row>& rows, std::vector<std::vector<double>>& M, std::vector<double>& r) {
    for (const auto& row : rows) {
      std::vector<double> v(n, 0.0);
      for (const auto& t : row.terms) v[t.var] += t.coef;
      M.push_back(v);
      r.push_back(row.rhs);
    }
  };
  std::vector<std::vector<double>> A, G;
  std::vector<double> b, h;
  dense(p.eq_rows, A, b);
  dense(p.le_rows, G, h);
  return vertex_enumeration(p.objective, A, b, G, h);
}

/// Max violation of the problem's constraints at x.
inline double max_residual(const lp::LpProblem& p, const std::vector<double>& x) {
  double worst = 0.0;
  auto lhs = [&](const lp::Row& r) {
    double s = 0.0;
    for (const auto& t : r.terms) s += t.coef * x[t.var];
    return s;
  };
  for (const auto& r : p.eq_rows) worst = std::max(worst, std::abs(lhs(r) - r.rhs));
  for (const auto& r : p.le_rows) worst = std::max(worst, lhs(r) - r.rhs);
  for (std::size_t j = 0; j < x.size(); ++j) worst = std::max(worst, p.lower_bounds[j] - x[j]);
  return worst;
}

}  // namespace testing_support
