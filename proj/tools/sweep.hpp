#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cacheopt.hpp"
#include "cli_io.hpp"

namespace cacheopt::sweep {

enum class Variable { Cache, Theta };

inline const std::vector<std::string>& known_outputs() {
  static const std::vector<std::string> names{"mccs_opt", "ccs_opt", "lb_p1", "lb_p2", "p4", "lb_p5"};
  return names;
}

struct Spec {
  Variable variable = Variable::Cache;
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
  std::vector<std::string> outputs;  // canonical order, subset of known_outputs()
  bool use_lp = false;
  io::InstanceSpec base;
};

inline std::vector<double> grid(double start, double stop, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) fail(ErrorKind::InvalidInput, "sweep step must be positive");
  if (!std::isfinite(start) || !std::isfinite(stop) || stop < start) {
    fail(ErrorKind::InvalidInput, "sweep needs start <= stop");
  }
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 100000) fail(ErrorKind::SizeGuard, "sweep grid has more than 100000 points");
  std::vector<double> xs;
  for (std::size_t i = 0; i < count; ++i) {
    double x = start + static_cast<double>(i) * step;
    if (std::abs(x - stop) < 1e-9) x = stop;
    xs.push_back(x);
  }
  return xs;
}

/// Reorders the requested outputs canonically and rejects unknown names.
inline std::vector<std::string> canonical_outputs(const std::vector<std::string>& requested) {
  for (const auto& r : requested) {
    if (std::find(known_outputs().begin(), known_outputs().end(), r) == known_outputs().end()) {
      fail(ErrorKind::InvalidInput, "unknown sweep output '" + r + "'");
    }
  }
  std::vector<std::string> out;
  for (const auto& k : known_outputs()) {
    if (std::find(requested.begin(), requested.end(), k) != requested.end()) out.push_back(k);
  }
  if (out.empty()) fail(ErrorKind::InvalidInput, "no sweep outputs requested");
  return out;
}

inline Instance instance_at(const Spec& spec, double x) {
  io::InstanceSpec s = spec.base;
  if (spec.variable == Variable::Cache) {
    s.cache = x;
  } else {
    if (s.popularity) fail(ErrorKind::InvalidInput, "a theta sweep generates Zipf popularity; drop --popularity");
    s.zipf = x;
  }
  return io::build_instance(s).instance;
}

inline double evaluate(const Instance& inst, const std::string& what, bool use_lp) {
  if (what == "mccs_opt") return use_lp ? solve_p3_lp(inst).value : best_grouping(inst).rate;
  if (what == "ccs_opt") return solve_ccs_lp(inst).value;
  if (what == "lb_p1") return lower_bound_p1(inst).value;
  if (what == "lb_p2") return lower_bound_p2(inst).value;
  if (what == "p4") return solve_p4_lp(inst).value;
  if (what == "lb_p5") return lower_bound_p5(inst).value;
  fail(ErrorKind::InvalidInput, "unknown sweep output '" + what + "'");
}

/// Worker count: hardware concurrency, capped by CACHEOPT_THREADS and the job count.
inline std::size_t thread_budget(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CACHEOPT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

/// Runs job(i) for i in [0, n) on a small pool; rethrows the first failure in index order.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t t = thread_budget(n);
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Table {
  std::vector<std::string> columns;  // excluding x
  std::vector<double> xs;
  std::vector<std::vector<double>> values;
};

inline Table run(const Spec& spec) {
  Table t;
  t.columns = spec.outputs;
  t.xs = grid(spec.start, spec.stop, spec.step);
  t.values.assign(t.xs.size(), std::vector<double>(t.columns.size(), 0.0));
  // Validate the first point up front so malformed input fails before spawning work.
  instance_at(spec, t.xs.front());
  parallel_for(t.xs.size(), [&](std::size_t i) {
    const Instance inst = instance_at(spec, t.xs[i]);
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      t.values[i][c] = evaluate(inst, t.columns[c], spec.use_lp);
    }
  });
  return t;
}

inline void write_csv(std::ostream& os, const Table& t) {
  os << "x";
  for (const auto& c : t.columns) os << "," << c;
  os << "\n";
  for (std::size_t i = 0; i < t.xs.size(); ++i) {
    os << io::fixed6(t.xs[i]);
    for (double v : t.values[i]) os << "," << io::fixed6(v);
    os << "\n";
  }
}

/// Whitespace-separated columns with a '#' header, readable by gnuplot and friends.
inline void write_table(std::ostream& os, const Table& t) {
  os << "# x";
  for (const auto& c : t.columns) os << " " << c;
  os << "\n";
  for (std::size_t i = 0; i < t.xs.size(); ++i) {
    os << io::fixed6(t.xs[i]);
    for (double v : t.values[i]) os << " " << io::fixed6(v);
    os << "\n";
  }
}

}  // namespace cacheopt::sweep
