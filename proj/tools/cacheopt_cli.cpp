// cacheopt: cache placement optimization and lower bounds for the modified coded caching scheme.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cacheopt.hpp"
#include "cli_io.hpp"
#include "sweep.hpp"

namespace {

using namespace cacheopt;
using io::json;

constexpr int kExitInvalid = 2;
constexpr int kExitSizeGuard = 3;
constexpr int kExitInternal = 4;

struct InstanceArgs {
  std::string instance_file;
  std::size_t files = 0;
  std::size_t users = 0;
  double cache = -1.0;
  double zipf = -1.0;
  std::string popularity;
  std::string sizes;

  void attach(CLI::App* app) {
    app->add_option("--instance", instance_file, "Instance JSON file");
    app->add_option("--files", files, "Number of files N");
    app->add_option("--users", users, "Number of users K");
    app->add_option("--cache", cache, "Cache size M (files, or bits with --sizes)");
    app->add_option("--zipf", zipf, "Zipf parameter theta");
    app->add_option("--popularity", popularity, "Popularity as a JSON array, or 'step'");
    app->add_option("--sizes", sizes, "File sizes as a JSON array");
  }

  io::InstanceSpec spec() const {
    io::InstanceSpec s;
    if (files > 0) s.files = files;
    if (users > 0) s.users = users;
    if (cache >= 0.0) s.cache = cache;
    if (zipf >= 0.0) s.zipf = zipf;
    if (!popularity.empty()) s.popularity = io::parse_popularity_arg(popularity);
    if (!sizes.empty()) s.sizes = io::number_list(io::parse_json_text(sizes, "--sizes"), "sizes");
    if (!instance_file.empty()) io::merge_instance_json(s, io::read_json_file(instance_file));
    return s;
  }
};

struct Output {
  std::string path;
  std::string format = "json";

  void attach(CLI::App* app, std::vector<std::string> formats) {
    app->add_option("--out", path, "Write output to this file instead of stdout");
    app->add_option("--format", format, "Output format")->check(CLI::IsMember(formats));
  }

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path);
    if (!out) fail(ErrorKind::InvalidInput, "cannot write " + path);
    out << text;
  }
};

json instance_summary(const Instance& inst, const std::vector<std::size_t>& order) {
  json j;
  j["files"] = inst.n_files();
  j["users"] = inst.n_users();
  j["cache"] = inst.cache_size();
  j["file_order"] = io::order_json(order);
  return j;
}

std::string placement_table(const Placement& a) {
  std::ostringstream os;
  os << "# file";
  for (std::size_t l = 0; l <= a.n_users(); ++l) os << " a_" << l;
  os << "\n";
  for (std::size_t n = 0; n < a.n_files(); ++n) {
    os << n + 1;
    for (double x : a.row(n)) os << " " << io::fixed6(x);
    os << "\n";
  }
  return os.str();
}

void cmd_optimize(const InstanceArgs& ia, const std::string& method, bool bounds, const Output& out) {
  const io::LoadedInstance li = io::build_instance(ia.spec());
  const Instance& inst = li.instance;
  json j;
  j["instance"] = instance_summary(inst, li.order);
  j["method"] = method;
  Placement placement;
  std::vector<std::pair<std::string, double>> csv;
  if (inst.uniform_sizes()) {
    OptimizeOptions opt;
    opt.with_bounds = bounds;
    opt.use_lp = method == "lp";
    const OptimizeReport r = optimize_mccs(inst, opt);
    placement = r.best.placement;
    j["rate_mccs"] = io::round6(r.rate_mccs);
    csv.emplace_back("rate_mccs", r.rate_mccs);
    if (r.rate_ccs_opt) {
      j["rate_ccs_opt"] = io::round6(*r.rate_ccs_opt);
      csv.emplace_back("rate_ccs_opt", *r.rate_ccs_opt);
    }
    if (r.lb_p1) {
      j["lb_p1"] = io::round6(*r.lb_p1);
      j["lb_p2"] = io::round6(*r.lb_p2);
      j["gap"] = io::round6(*r.gap);
      csv.emplace_back("lb_p1", *r.lb_p1);
      csv.emplace_back("lb_p2", *r.lb_p2);
      csv.emplace_back("gap", *r.gap);
    }
    j["groups"] = count_file_groups(placement, 1e-6);
    if (method == "grouping") {
      j["structure"] = {{"kind", to_string(r.best.kind)},
                        {"n_o", r.best.n_o},
                        {"n_1", r.best.n_1},
                        {"l_o", r.best.l_o},
                        {"l_1", r.best.l_1}};
    }
  } else {
    // Nonuniform sizes: only the LP formulation applies.
    const LpPlacement p4 = solve_p4_lp(inst);
    placement = p4.placement;
    j["method"] = "lp";
    j["rate_mccs"] = io::round6(p4.value);
    csv.emplace_back("rate_mccs", p4.value);
    if (bounds) {
      const double p5 = lower_bound_p5(inst).value;
      j["lb_p5"] = io::round6(p5);
      j["gap"] = io::round6(p4.value - p5);
      csv.emplace_back("lb_p5", p5);
      csv.emplace_back("gap", p4.value - p5);
    }
    j["groups"] = count_file_groups(placement, 1e-6);
  }
  j["placement"] = io::placement_json(placement);

  if (out.format == "json") {
    out.write(j.dump(2) + "\n");
  } else if (out.format == "csv") {
    std::string head, row;
    for (std::size_t i = 0; i < csv.size(); ++i) {
      head += (i ? "," : "") + csv[i].first;
      row += (i ? "," : "") + io::fixed6(csv[i].second);
    }
    out.write(head + "\n" + row + "\n");
  } else {
    std::ostringstream os;
    for (const auto& [k, v] : csv) os << "# " << k << " = " << io::fixed6(v) << "\n";
    os << placement_table(placement);
    out.write(os.str());
  }
}

void cmd_bound(const InstanceArgs& ia, const std::string& which, const Output& out) {
  const io::LoadedInstance li = io::build_instance(ia.spec());
  const Instance& inst = li.instance;
  BoundResult r;
  if (which == "p1") {
    if (!inst.uniform_sizes()) fail(ErrorKind::InvalidInput, "P1 needs uniform sizes; use --which p5");
    r = lower_bound_p1(inst);
  } else if (which == "p2") {
    if (!inst.uniform_sizes()) fail(ErrorKind::InvalidInput, "P2 needs uniform sizes; use --which p5");
    r = lower_bound_p2(inst);
  } else {
    r = lower_bound_p5(inst);
  }
  json j;
  j["which"] = to_string(r.which);
  j["value"] = io::round6(r.value);
  j["instance"] = instance_summary(inst, li.order);
  j["placement"] = io::placement_json(r.placement);
  if (out.format == "json") {
    out.write(j.dump(2) + "\n");
  } else if (out.format == "csv") {
    out.write("which,value\n" + std::string(to_string(r.which)) + "," + io::fixed6(r.value) + "\n");
  } else {
    out.write("# " + std::string(to_string(r.which)) + " = " + io::fixed6(r.value) + "\n" +
              placement_table(r.placement));
  }
}

void cmd_sweep(const InstanceArgs& ia, const std::string& vary, double start, double stop, double step,
               const std::vector<std::string>& outputs, const std::string& method, const Output& out) {
  sweep::Spec spec;
  spec.variable = vary == "theta" ? sweep::Variable::Theta : sweep::Variable::Cache;
  spec.start = start;
  spec.stop = stop;
  spec.step = step;
  spec.use_lp = method == "lp";
  spec.base = ia.spec();
  if (outputs.empty()) {
    const bool uniform = !spec.base.sizes ||
                         std::all_of(spec.base.sizes->begin(), spec.base.sizes->end(),
                                     [](double f) { return f == 1.0; });
    spec.outputs = uniform ? std::vector<std::string>{"mccs_opt", "ccs_opt", "lb_p1", "lb_p2"}
                           : std::vector<std::string>{"p4", "lb_p5"};
  } else {
    spec.outputs = sweep::canonical_outputs(outputs);
  }
  const sweep::Table t = sweep::run(spec);
  std::ostringstream os;
  if (out.format == "table") {
    sweep::write_table(os, t);
  } else {
    sweep::write_csv(os, t);
  }
  out.write(os.str());
}

void cmd_rate(const InstanceArgs& ia, const std::string& placement_file, const std::string& demand_text,
              const Output& out) {
  const Placement a = io::placement_from_json(io::read_json_file(placement_file));
  const Demand d = io::parse_demand(demand_text);
  validate_demand(d, a.n_files(), a.n_users());
  for (const auto& r : a.rows()) {
    for (double x : r) {
      if (!(x >= -kFeasibilityTol)) fail(ErrorKind::InvalidInput, "placement has a negative entry");
    }
  }
  const io::InstanceSpec spec = ia.spec();
  if (spec.users || spec.cache) {
    const Instance inst = io::build_instance(spec).instance;
    const auto violations = validate_placement(inst, a);
    if (!violations.empty()) fail(ErrorKind::InvalidInput, violations.front().message);
  }
  const DistinctSet D = distinct_set(d);
  json j;
  json dem = json::array(), dist = json::array(), lead = json::array();
  for (std::size_t f : d.requests) dem.push_back(f + 1);
  for (std::size_t f : D.files) dist.push_back(f + 1);
  for (std::size_t u : leader_group(d).users) lead.push_back(u + 1);
  j["demand"] = dem;
  j["distinct"] = dist;
  j["leaders"] = lead;
  j["rate_mccs"] = io::round6(rate_mccs(d, a));
  j["rate_ccs"] = io::round6(rate_ccs(d, a));
  j["rlb"] = io::round6(rlb_general(D, a));
  const bool q = is_popularity_first(a);
  j["popularity_first"] = q;
  if (q) {
    j["rlb_popfirst"] = io::round6(rlb_popfirst(D, a));
    j["rate_mccs_lemma3"] = io::round6(rate_mccs_lemma3(d, a));
  }
  if (out.format == "json") {
    out.write(j.dump(2) + "\n");
  } else {
    std::string text = "rate_mccs,rate_ccs,rlb\n" + io::fixed6(rate_mccs(d, a)) + "," +
                       io::fixed6(rate_ccs(d, a)) + "," + io::fixed6(rlb_general(D, a)) + "\n";
    out.write(out.format == "table" ? "# " + text : text);
  }
}

int cmd_selftest() {
  int failures = 0;
  auto check = [&](const std::string& name, const std::function<bool()>& f) {
    bool ok = false;
    try {
      ok = f();
    } catch (const std::exception& e) {
      std::cout << "FAIL " << name << " (" << e.what() << ")\n";
      ++failures;
      return;
    }
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };
  auto near = [](double x, double y, double tol) { return std::abs(x - y) <= tol; };

  check("lp: min -x s.t. x <= 1", [&] {
    lp::LpProblem p;
    p.add_variable("x", -1.0);
    p.add_le({{0, 1.0}}, 1.0);
    const auto s = lp::solve(p);
    return s.status == lp::Status::Optimal && near(s.value, -1.0, 1e-12);
  });
  check("two-user expected MCCS rate", [&] {
    const Instance inst(2, 0.6, {0.6, 0.4});
    const Placement a({{0.2, 0.4, 0.0}, {0.6, 0.2, 0.0}});
    return near(expected_rate(Scheme::Mccs, inst, a), 0.92, 1e-12) && near(avg_rate_closed(inst, a), 0.92, 1e-12);
  });
  check("redundancy-counting rate form", [&] {
    const Placement a({{0.1, 0.2, 0.05, 0.0}, {0.4, 0.1, 0.0, 0.0}});
    const Demand d{{0, 0, 1}};
    return near(rate_mccs_lemma3(d, a), rate_mccs(d, a), 1e-12);
  });
  check("N=7 K=4 M=1 zipf 0.56 placement", [&] {
    const Instance inst(4, 1.0, zipf_popularity(7, 0.56));
    const auto c = best_grouping(inst);
    for (const auto& r : c.placement.rows()) {
      if (!near(r[0], 0.4286, 5e-5) || !near(r[1], 0.1429, 5e-5)) return false;
    }
    return true;
  });
  check("grouping search matches the popularity-first LP", [&] {
    const Instance inst(4, 4.0, zipf_popularity(9, 1.2));
    return near(best_grouping(inst).rate, solve_p3_lp(inst).value, 1e-6);
  });
  check("two-user bounds coincide", [&] {
    const Instance inst(2, 1.5, zipf_popularity(5, 0.8));
    const double p1 = lower_bound_p1(inst).value;
    return near(p1, lower_bound_p2(inst).value, 1e-6) && near(p1, best_grouping(inst).rate, 1e-6);
  });
  std::cout << (failures == 0 ? "selftest: all checks passed\n" : "selftest: failures detected\n");
  return failures == 0 ? 0 : 1;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::NotPopularityFirst: return kExitInvalid;
    case ErrorKind::SizeGuard: return kExitSizeGuard;
    case ErrorKind::Internal: return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cache placement optimization and lower bounds for coded caching"};
  app.require_subcommand(1);

  InstanceArgs opt_inst, bound_inst, sweep_inst, rate_inst;
  Output opt_out, bound_out, sweep_out, rate_out;

  auto* optimize = app.add_subcommand("optimize", "Optimize the MCCS cache placement");
  opt_inst.attach(optimize);
  opt_out.attach(optimize, {"json", "csv", "table"});
  std::string opt_method = "grouping";
  bool no_bounds = false;
  optimize->add_option("--method", opt_method, "grouping search or LP")->check(CLI::IsMember({"grouping", "lp"}));
  optimize->add_flag("--no-bounds", no_bounds, "Skip the lower-bound LPs");

  auto* bound = app.add_subcommand("bound", "Solve a lower-bound LP");
  bound_inst.attach(bound);
  bound_out.attach(bound, {"json", "csv", "table"});
  std::string which = "p1";
  bound->add_option("--which", which, "p1, p2 or p5")->check(CLI::IsMember({"p1", "p2", "p5"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep cache size or Zipf parameter, emit CSV");
  sweep_inst.attach(sweep_cmd);
  sweep_out.format = "csv";
  sweep_out.attach(sweep_cmd, {"csv", "table"});
  std::string vary = "cache", sweep_method = "grouping";
  double start = 0.0, stop = 0.0, step = 1.0;
  std::vector<std::string> outputs;
  sweep_cmd->add_option("--vary", vary, "cache or theta")->check(CLI::IsMember({"cache", "theta"}));
  sweep_cmd->add_option("--start", start)->required();
  sweep_cmd->add_option("--stop", stop)->required();
  sweep_cmd->add_option("--step", step)->required();
  sweep_cmd->add_option("--outputs", outputs, "Columns: mccs_opt,ccs_opt,lb_p1,lb_p2,p4,lb_p5")->delimiter(',');
  sweep_cmd->add_option("--method", sweep_method)->check(CLI::IsMember({"grouping", "lp"}));

  auto* rate_cmd = app.add_subcommand("rate", "Per-demand delivery rates for a given placement");
  rate_inst.attach(rate_cmd);
  rate_out.attach(rate_cmd, {"json", "csv", "table"});
  std::string placement_file, demand;
  rate_cmd->add_option("--placement", placement_file, "Placement JSON ([N][K+1] matrix)")->required();
  rate_cmd->add_option("--demand", demand, "Comma-separated 1-based file indices")->required();

  auto* selftest = app.add_subcommand("selftest", "Run built-in consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    std::cerr << "error: invalid_input: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    if (*optimize) cmd_optimize(opt_inst, opt_method, !no_bounds, opt_out);
    if (*bound) cmd_bound(bound_inst, which, bound_out);
    if (*sweep_cmd) cmd_sweep(sweep_inst, vary, start, stop, step, outputs, sweep_method, sweep_out);
    if (*rate_cmd) cmd_rate(rate_inst, placement_file, demand, rate_out);
    if (*selftest) return cmd_selftest();
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
