// Command-line front end: run, bench, sweep and compare scenario files.

#include <subadmm/metrics.hpp>
#include <subadmm/scenario.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace subadmm;

struct Overrides {
  std::string scenario;
  std::optional<std::string> solver;
  std::optional<int> iters;
  std::optional<long> steps;
  std::optional<double> dt;
  int threads = 0;
  std::optional<double> tol;
  bool warm_start = false;
  bool strict_contact = false;
  bool fixed = false;
  std::string out_prefix;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
  cmd->add_option("--solver", o.solver, "subadmm, pgs or pj")
      ->check(CLI::IsMember({"subadmm", "pgs", "pj"}));
  cmd->add_option("--iters", o.iters, "Iteration budget per step")->check(CLI::PositiveNumber);
  cmd->add_option("--steps", o.steps, "Number of steps")->check(CLI::NonNegativeNumber);
  cmd->add_option("--dt", o.dt, "Step size in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "Worker threads (0: runtime default)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--tol", o.tol, "Stopping threshold on theta")->check(CLI::PositiveNumber);
  cmd->add_flag("--fixed-iters", o.fixed, "Always run the full iteration budget");
  cmd->add_flag("--warm-start", o.warm_start, "Reuse the previous step's impulses");
  cmd->add_flag("--strict-contact", o.strict_contact, "Use the De Saxce normal correction");
  cmd->add_option("--out-prefix", o.out_prefix, "Prefix for output files");
  cmd->add_option("--seed", o.seed, "Random seed for scenario builders");
}

ScenarioSpec load(const Overrides& o) {
  ScenarioSpec s = load_scenario(o.scenario);
  if (o.solver) s.solver.type = solver_kind_from_string(*o.solver);
  if (o.iters) s.solver.max_iters = *o.iters;
  if (o.steps) s.steps = *o.steps;
  if (o.dt) s.dt = *o.dt;
  if (o.tol) s.solver.tolerance = *o.tol;
  if (o.fixed) s.solver.fixed_iterations = true;
  if (o.warm_start) s.solver.warm_start = true;
  if (o.strict_contact) s.solver.strict_contact = true;
  if (o.seed) s.seed = *o.seed;
  return s;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void print_record(const BenchRecord& r) {
  std::printf("%-16s %-8s iters=%-4d steps=%-5ld AT=%.4f ms  AA=%.3f  max_pen=%.3e m\n",
              r.scenario.c_str(), r.solver.c_str(), r.iteration_budget, r.steps, r.mean_solver_ms,
              r.accuracy, r.max_penetration);
}

BenchRecord run_one(const ScenarioSpec& spec, int threads, const RunSinks& sinks = {}) {
  Simulation sim(build_scene(spec), spec.solver.type, solver_config(spec, threads));
  return run_simulation(sim, spec.steps, sinks).record;
}

int cmd_run(const Overrides& o) {
  const ScenarioSpec spec = load(o);
  auto traj = open_output(o.out_prefix + "trajectory.csv");
  auto metrics = open_output(o.out_prefix + "metrics.csv");
  print_record(run_one(spec, o.threads, {&traj, &metrics}));
  return 0;
}

// Benchmarks compare solvers at equal iteration counts.
int cmd_bench(const Overrides& o, const std::vector<int>& budgets) {
  ScenarioSpec spec = load(o);
  spec.solver.fixed_iterations = true;
  auto out = open_output(o.out_prefix + "bench.csv");
  out << "scenario,solver,iterations,steps,at_ms,aa,max_penetration\n";
  out.precision(17);
  for (int iters : budgets) {
    spec.solver.max_iters = iters;
    const BenchRecord r = run_one(spec, o.threads);
    print_record(r);
    out << r.scenario << ',' << r.solver << ',' << r.iteration_budget << ',' << r.steps << ','
        << r.mean_solver_ms << ',' << r.accuracy << ',' << r.max_penetration << '\n';
  }
  return 0;
}

int cmd_compare(const Overrides& o) {
  ScenarioSpec spec = load(o);
  spec.solver.fixed_iterations = true;
  auto out = open_output(o.out_prefix + "compare.csv");
  out << "scenario,solver,iterations,steps,at_ms,aa,max_penetration\n";
  out.precision(17);
  for (SolverKind kind : {SolverKind::subadmm, SolverKind::pgs, SolverKind::pj}) {
    spec.solver.type = kind;
    const BenchRecord r = run_one(spec, o.threads);
    print_record(r);
    out << r.scenario << ',' << r.solver << ',' << r.iteration_budget << ',' << r.steps << ','
        << r.mean_solver_ms << ',' << r.accuracy << ',' << r.max_penetration << '\n';
  }
  return 0;
}

int cmd_sweep(const Overrides& o, const std::vector<int>& sizes, long warmup) {
  ScenarioSpec base = load(o);
  base.solver.fixed_iterations = true;
  const auto make = [&](int size) {
    ScenarioSpec s = base;
    std::visit(
        [&](auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, StirringParams>) {
            p.spheres = size;
          } else if constexpr (std::is_same_v<P, CableParams>) {
            p.segments = size;
          } else if constexpr (std::is_same_v<P, LatticeParams>) {
            p.cells[0] = size;
          } else {
            throw ScenarioError("/builder: the bodies builder has no size parameter to sweep");
          }
        },
        s.params);
    return build_scene(s);
  };
  const ScalingResult res = run_scaling_sweep(make, sizes, base.solver.type,
                                              solver_config(base, o.threads),
                                              std::max<long>(base.steps, 1), warmup);
  auto out = open_output(o.out_prefix + "scaling.csv");
  write_scaling_csv(out, res);
  for (const auto& p : res.points)
    std::printf("size=%-5d n_s+n_in+n_cp=%-10.1f mean=%.4f ms\n", p.size, p.complexity,
                p.mean_solver_ms);
  std::printf("slope=%.6e ms  intercept=%.6e ms  R^2=%.5f\n", res.fit.slope, res.fit.intercept,
              res.fit.r_squared);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subsystem-based ADMM multibody simulator"};
  app.require_subcommand(1);
  Overrides o;
  std::vector<int> budgets{30, 60, 90};
  std::vector<int> sizes;
  long warmup = 0;

  auto* run = app.add_subcommand("run", "Simulate a scenario and write trajectory/metrics CSV");
  add_common(run, o);
  auto* bench = app.add_subcommand("bench", "Run a scenario at several iteration budgets");
  add_common(bench, o);
  bench->add_option("--budgets", budgets, "Iteration budgets")->delimiter(',');
  auto* sweep = app.add_subcommand("sweep", "Time a scenario over sizes and fit a line");
  add_common(sweep, o);
  sweep->add_option("--sizes", sizes, "Comma-separated sizes")->delimiter(',')->required();
  sweep->add_option("--warmup", warmup, "Untimed steps before timing");
  auto* compare = app.add_subcommand("compare", "Run a scenario with every solver");
  add_common(compare, o);

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(o);
    if (bench->parsed()) return cmd_bench(o, budgets);
    if (sweep->parsed()) return cmd_sweep(o, sizes, warmup);
    return cmd_compare(o);
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigurationError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 2;
  } catch (const SolverAbort& e) {
    std::cerr << "solver abort: " << e.what() << " (iteration " << e.iteration() << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
