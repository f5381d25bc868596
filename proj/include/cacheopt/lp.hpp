#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cacheopt/error.hpp"

namespace cacheopt::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kPivotTol = 1e-10;
inline constexpr double kFeasTol = 1e-9;
inline constexpr double kOptTol = 1e-10;
inline constexpr int kStallThreshold = 50;

struct Term {
  std::size_t var;
  double coef;
};

/// Sparse row: sum of terms compared with rhs.
struct Row {
  std::vector<Term> terms;
  double rhs = 0.0;
};

/// minimize c.x  subject to  A x = b,  G x <= h,  x >= lower (lower may be -inf).
struct LpProblem {
  std::vector<double> objective;
  std::vector<double> lower_bounds;
  std::vector<std::string> names;
  std::vector<Row> eq_rows;
  std::vector<Row> le_rows;

  std::size_t n_vars() const { return objective.size(); }

  std::size_t add_variable(std::string name, double cost = 0.0, double lower = 0.0) {
    objective.push_back(cost);
    lower_bounds.push_back(lower);
    names.push_back(std::move(name));
    return objective.size() - 1;
  }

  void add_eq(std::vector<Term> terms, double rhs) { eq_rows.push_back({std::move(terms), rhs}); }
  void add_le(std::vector<Term> terms, double rhs) { le_rows.push_back({std::move(terms), rhs}); }
  void add_ge(std::vector<Term> terms, double rhs) {
    for (auto& t : terms) t.coef = -t.coef;
    le_rows.push_back({std::move(terms), -rhs});
  }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

struct LpSolution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double value = 0.0;
  long iterations = 0;
  // Row multipliers at the final basis (zero for rows dropped as duplicates).
  std::vector<double> duals_eq;
  std::vector<double> duals_le;
};

/// Signature shared by the in-repo simplex and any external solver swapped in for cross-checks.
using Solver = std::function<LpSolution(const LpProblem&)>;

namespace detail {

inline Row canonical(const Row& r) {
  std::map<std::size_t, double> acc;
  for (const auto& t : r.terms) acc[t.var] += t.coef;
  Row out;
  out.rhs = r.rhs;
  for (const auto& [v, c] : acc) {
    if (c != 0.0) out.terms.push_back({v, c});
  }
  return out;
}

inline bool same_row(const Row& a, const Row& b) {
  if (a.rhs != b.rhs || a.terms.size() != b.terms.size()) return false;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    if (a.terms[i].var != b.terms[i].var || a.terms[i].coef != b.terms[i].coef) return false;
  }
  return true;
}

/// Canonicalizes rows and drops exact duplicates; keep[i] is the kept row index or -1.
inline std::vector<Row> dedupe(const std::vector<Row>& rows, std::vector<long>& kept_index) {
  std::vector<Row> out;
  std::map<std::pair<double, std::size_t>, std::vector<std::size_t>> buckets;
  kept_index.assign(rows.size(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Row c = canonical(rows[i]);
    auto& bucket = buckets[{c.rhs, c.terms.size()}];
    bool dup = false;
    for (std::size_t j : bucket) {
      if (same_row(out[j], c)) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    kept_index[i] = static_cast<long>(out.size());
    bucket.push_back(out.size());
    out.push_back(std::move(c));
  }
  return out;
}

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_(rows * (cols + 1), 0.0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return t_[i * (n_ + 1) + n_]; }
  double rhs(std::size_t i) const { return t_[i * (n_ + 1) + n_]; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  /// Pivots on (r, q); `cost` is the reduced-cost row (size cols+1, last entry -objective).
  void pivot(std::size_t r, std::size_t q, std::vector<double>& cost) {
    double* pr = &t_[r * (n_ + 1)];
    const double inv = 1.0 / pr[q];
    nz_.clear();
    for (std::size_t j = 0; j <= n_; ++j) {
      if (pr[j] != 0.0) {
        pr[j] *= inv;
        nz_.push_back(j);
      }
    }
    pr[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* pi = &t_[i * (n_ + 1)];
      const double f = pi[q];
      if (f == 0.0) continue;
      for (std::size_t j : nz_) pi[j] -= f * pr[j];
      pi[q] = 0.0;
    }
    const double f = cost[q];
    if (f != 0.0) {
      for (std::size_t j : nz_) cost[j] -= f * pr[j];
      cost[q] = 0.0;
    }
  }

 private:
  std::size_t m_, n_;
  std::vector<double> t_;
  std::vector<std::size_t> nz_;
};

enum class PhaseResult { Optimal, Unbounded, IterationLimit };

/// Primal simplex on a tableau whose basis is primal feasible.
inline PhaseResult run_phase(Tableau& tab, std::vector<double>& cost, std::vector<std::size_t>& basis,
                             const std::vector<char>& allowed, long& iterations, long max_iterations) {
  const std::size_t m = tab.rows();
  const std::size_t n = tab.cols();
  int degenerate_run = 0;
  bool bland = false;
  while (true) {
    if (iterations >= max_iterations) return PhaseResult::IterationLimit;
    // Pricing.
    std::size_t q = n;
    double best = -kOptTol;
    for (std::size_t j = 0; j < n; ++j) {
      if (!allowed[j]) continue;
      if (cost[j] < best) {
        q = j;
        if (bland) break;
        best = cost[j];
      }
    }
    if (q == n) return PhaseResult::Optimal;

    // Ratio test.
    std::size_t r = m;
    if (bland) {
      double min_ratio = kInfinity;
      for (std::size_t i = 0; i < m; ++i) {
        const double a = tab.at(i, q);
        if (a > kPivotTol) min_ratio = std::min(min_ratio, std::max(tab.rhs(i), 0.0) / a);
      }
      for (std::size_t i = 0; i < m; ++i) {
        const double a = tab.at(i, q);
        if (a <= kPivotTol || std::max(tab.rhs(i), 0.0) / a > min_ratio + 1e-15) continue;
        if (r == m || basis[i] < basis[r]) r = i;
      }
    } else {
      // Harris two-pass: bound the step with relaxed rhs, then take the largest pivot.
      double bound = kInfinity;
      for (std::size_t i = 0; i < m; ++i) {
        const double a = tab.at(i, q);
        if (a > kPivotTol) bound = std::min(bound, (std::max(tab.rhs(i), 0.0) + kFeasTol) / a);
      }
      double best_pivot = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double a = tab.at(i, q);
        if (a > kPivotTol && std::max(tab.rhs(i), 0.0) / a <= bound && a > best_pivot) {
          best_pivot = a;
          r = i;
        }
      }
    }
    if (r == m) return PhaseResult::Unbounded;

    const double step = std::max(tab.rhs(r), 0.0) / tab.at(r, q);
    tab.pivot(r, q, cost);
    basis[r] = q;
    ++iterations;
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.rhs(i) < 0.0) tab.rhs(i) = 0.0;
    }
    if (step <= 1e-12) {
      if (++degenerate_run >= kStallThreshold) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
  }
}

}  // namespace detail

/// Two-phase dense simplex.  Deterministic for identical input.
inline LpSolution solve(const LpProblem& prob) {
  const std::size_t n_orig = prob.n_vars();
  if (prob.lower_bounds.size() != n_orig) fail(ErrorKind::InvalidInput, "lp: lower bound count mismatch");
  for (double c : prob.objective) {
    if (!std::isfinite(c)) fail(ErrorKind::InvalidInput, "lp: non-finite objective coefficient");
  }
  auto check_rows = [&](const std::vector<Row>& rows) {
    for (const auto& r : rows) {
      if (!std::isfinite(r.rhs)) fail(ErrorKind::InvalidInput, "lp: non-finite right-hand side");
      for (const auto& t : r.terms) {
        if (t.var >= n_orig || !std::isfinite(t.coef)) fail(ErrorKind::InvalidInput, "lp: bad constraint term");
      }
    }
  };
  check_rows(prob.eq_rows);
  check_rows(prob.le_rows);

  std::vector<long> eq_keep, le_keep;
  const std::vector<Row> eq = detail::dedupe(prob.eq_rows, eq_keep);
  const std::vector<Row> le = detail::dedupe(prob.le_rows, le_keep);

  // Column map: x_j = lower_j + y_pos (finite lower) or y_pos - y_neg (free).
  std::vector<std::size_t> pos_col(n_orig), neg_col(n_orig, static_cast<std::size_t>(-1));
  std::size_t n_struct = 0;
  for (std::size_t j = 0; j < n_orig; ++j) {
    pos_col[j] = n_struct++;
    if (prob.lower_bounds[j] == -kInfinity) {
      neg_col[j] = n_struct++;
    } else if (!std::isfinite(prob.lower_bounds[j])) {
      fail(ErrorKind::InvalidInput, "lp: lower bound must be finite or -inf");
    }
  }
  const std::size_t m = eq.size() + le.size();
  const std::size_t n_slack = le.size();

  // Row data after shifting bounds and normalizing rhs >= 0.
  std::vector<double> row_sign(m, 1.0);
  std::vector<std::vector<Term>> row_terms(m);
  std::vector<double> row_rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Row& r = i < eq.size() ? eq[i] : le[i - eq.size()];
    double rhs = r.rhs;
    for (const auto& t : r.terms) {
      if (neg_col[t.var] == static_cast<std::size_t>(-1)) rhs -= t.coef * prob.lower_bounds[t.var];
    }
    row_terms[i] = r.terms;
    row_rhs[i] = rhs;
    if (rhs < 0.0) row_sign[i] = -1.0;
  }

  // Initial basis: slack where it enters with +1, artificial otherwise.
  std::vector<std::size_t> art_col(m, static_cast<std::size_t>(-1));
  std::size_t n_art = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const bool slack_ok = i >= eq.size() && row_sign[i] > 0.0;
    if (!slack_ok) art_col[i] = n_struct + n_slack + n_art++;
  }
  const std::size_t n_cols = n_struct + n_slack + n_art;
  detail::Tableau tab(m, n_cols);
  std::vector<std::size_t> basis(m);
  std::vector<std::size_t> init_col(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = row_sign[i];
    for (const auto& t : row_terms[i]) {
      tab.at(i, pos_col[t.var]) += s * t.coef;
      if (neg_col[t.var] != static_cast<std::size_t>(-1)) tab.at(i, neg_col[t.var]) -= s * t.coef;
    }
    if (i >= eq.size()) tab.at(i, n_struct + (i - eq.size())) = s;
    tab.rhs(i) = s * row_rhs[i];
    if (art_col[i] != static_cast<std::size_t>(-1)) {
      tab.at(i, art_col[i]) = 1.0;
      basis[i] = art_col[i];
    } else {
      basis[i] = n_struct + (i - eq.size());
    }
    init_col[i] = basis[i];
  }
  // Sparse copy of the normalized system, used to refine the final basic solution.
  std::vector<std::vector<std::pair<std::size_t, double>>> a_rows(m);
  std::vector<double> b_norm(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (tab.at(i, j) != 0.0) a_rows[i].emplace_back(j, tab.at(i, j));
    }
    b_norm[i] = tab.rhs(i);
  }

  std::vector<double> c_struct(n_cols, 0.0);
  for (std::size_t j = 0; j < n_orig; ++j) {
    c_struct[pos_col[j]] = prob.objective[j];
    if (neg_col[j] != static_cast<std::size_t>(-1)) c_struct[neg_col[j]] = -prob.objective[j];
  }

  LpSolution sol;
  const long max_iterations = 20000 + 20 * static_cast<long>(m + n_cols);
  std::vector<char> allowed(n_cols, 1);

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    std::vector<double> cost(n_cols + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (art_col[i] == static_cast<std::size_t>(-1)) continue;
      cost[art_col[i]] = 1.0;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (art_col[i] == static_cast<std::size_t>(-1)) continue;
      for (std::size_t j = 0; j <= n_cols; ++j) cost[j] -= (j == n_cols ? tab.rhs(i) : tab.at(i, j));
    }
    auto res = detail::run_phase(tab, cost, basis, allowed, sol.iterations, max_iterations);
    if (res == detail::PhaseResult::IterationLimit) {
      sol.status = Status::IterationLimit;
      return sol;
    }
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] >= n_struct + n_slack) infeas += tab.rhs(i);
    }
    double scale = 1.0;
    for (double b : row_rhs) scale = std::max(scale, std::abs(b));
    if (infeas > kFeasTol * scale) {
      sol.status = Status::Infeasible;
      return sol;
    }
    // Drive zero-level artificials out of the basis where a real column can replace them.
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < n_struct + n_slack) continue;
      std::size_t q = n_cols;
      double best = kPivotTol;
      for (std::size_t j = 0; j < n_struct + n_slack; ++j) {
        if (std::abs(tab.at(i, j)) > best) {
          best = std::abs(tab.at(i, j));
          q = j;
        }
      }
      if (q == n_cols) continue;  // redundant row: artificial stays basic at zero
      tab.rhs(i) = 0.0;
      tab.pivot(i, q, cost);
      basis[i] = q;
      ++sol.iterations;
    }
    for (std::size_t j = n_struct + n_slack; j < n_cols; ++j) allowed[j] = 0;
  }

  // Phase 2.
  std::vector<double> cost(n_cols + 1, 0.0);
  for (std::size_t j = 0; j < n_cols; ++j) cost[j] = c_struct[j];
  for (std::size_t i = 0; i < m; ++i) {
    const double cb = c_struct[basis[i]];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j < n_cols; ++j) cost[j] -= cb * tab.at(i, j);
    cost[n_cols] -= cb * tab.rhs(i);
  }
  auto res = detail::run_phase(tab, cost, basis, allowed, sol.iterations, max_iterations);
  if (res == detail::PhaseResult::Unbounded) {
    sol.status = Status::Unbounded;
    return sol;
  }
  if (res == detail::PhaseResult::IterationLimit) {
    sol.status = Status::IterationLimit;
    return sol;
  }

  std::vector<double> y(n_cols, 0.0);
  for (std::size_t i = 0; i < m; ++i) y[basis[i]] = tab.rhs(i);
  // Iterative refinement: the initial identity columns of the tableau hold B^-1.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> resid(m);
    for (std::size_t i = 0; i < m; ++i) {
      double r = b_norm[i];
      for (const auto& [j, v] : a_rows[i]) r -= v * y[j];
      resid[i] = r;
    }
    for (std::size_t k = 0; k < m; ++k) {
      double delta = 0.0;
      for (std::size_t i = 0; i < m; ++i) delta += tab.at(k, init_col[i]) * resid[i];
      y[basis[k]] += delta;
    }
  }
  for (double& v : y) {
    if (v < 0.0 && v > -kFeasTol) v = 0.0;
  }
  sol.x.assign(n_orig, 0.0);
  for (std::size_t j = 0; j < n_orig; ++j) {
    double v = y[pos_col[j]];
    if (neg_col[j] != static_cast<std::size_t>(-1)) {
      v -= y[neg_col[j]];
    } else {
      v += prob.lower_bounds[j];
    }
    sol.x[j] = v;
  }
  sol.value = 0.0;
  for (std::size_t j = 0; j < n_orig; ++j) sol.value += prob.objective[j] * sol.x[j];

  // Multipliers: d_j = c_j - y^T A_j on the initial identity columns (cost 0).
  std::vector<double> mult(m);
  for (std::size_t i = 0; i < m; ++i) mult[i] = -cost[init_col[i]] * row_sign[i];
  sol.duals_eq.assign(prob.eq_rows.size(), 0.0);
  sol.duals_le.assign(prob.le_rows.size(), 0.0);
  for (std::size_t i = 0; i < prob.eq_rows.size(); ++i) {
    if (eq_keep[i] >= 0) sol.duals_eq[i] = mult[static_cast<std::size_t>(eq_keep[i])];
  }
  for (std::size_t i = 0; i < prob.le_rows.size(); ++i) {
    if (le_keep[i] >= 0) sol.duals_le[i] = mult[eq.size() + static_cast<std::size_t>(le_keep[i])];
  }
  sol.status = Status::Optimal;
  return sol;
}

/// Writes the problem in CPLEX LP text layout (for debugging; variable names sanitized).
inline void write_lp_format(std::ostream& os, const LpProblem& prob) {
  auto name = [&](std::size_t j) {
    std::string s = j < prob.names.size() && !prob.names[j].empty() ? prob.names[j] : "x" + std::to_string(j);
    for (char& c : s) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) c = '_';
    }
    return s;
  };
  auto expr = [&](const std::vector<Term>& terms) {
    std::ostringstream e;
    e.precision(17);
    bool first = true;
    for (const auto& t : terms) {
      if (t.coef == 0.0) continue;
      e << (t.coef < 0 ? " - " : (first ? " " : " + ")) << std::abs(t.coef) << " " << name(t.var);
      first = false;
    }
    if (first) e << " 0 " << name(0);
    return e.str();
  };
  os.precision(17);
  std::vector<Term> obj;
  for (std::size_t j = 0; j < prob.n_vars(); ++j) obj.push_back({j, prob.objective[j]});
  os << "Minimize\n obj:" << expr(obj) << "\nSubject To\n";
  for (std::size_t i = 0; i < prob.eq_rows.size(); ++i) {
    os << " e" << i << ":" << expr(prob.eq_rows[i].terms) << " = " << prob.eq_rows[i].rhs << "\n";
  }
  for (std::size_t i = 0; i < prob.le_rows.size(); ++i) {
    os << " l" << i << ":" << expr(prob.le_rows[i].terms) << " <= " << prob.le_rows[i].rhs << "\n";
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < prob.n_vars(); ++j) {
    if (prob.lower_bounds[j] == -kInfinity) {
      os << " " << name(j) << " free\n";
    } else if (prob.lower_bounds[j] != 0.0) {
      os << " " << name(j) << " >= " << prob.lower_bounds[j] << "\n";
    }
  }
  os << "End\n";
}

}  // namespace cacheopt::lp
