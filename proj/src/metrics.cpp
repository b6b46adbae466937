#include <subadmm/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace subadmm {

Real accuracy_score(Real error_norm) {
  if (std::isnan(error_norm)) throw UsageError("error norm is NaN");
  return -std::log10(std::max(error_norm, kErrorFloor));
}

BenchRecord summarize_run(const std::string& scenario, SolverKind kind, int iteration_budget,
                          std::span<const StepRecord> steps) {
  BenchRecord r;
  r.scenario = scenario;
  r.solver = std::string(to_string(kind));
  r.iteration_budget = iteration_budget;
  r.steps = static_cast<long>(steps.size());
  if (steps.empty()) return r;
  for (const auto& s : steps) {
    r.mean_solver_ms += s.solver_ms;
    r.accuracy += accuracy_score(s.errors.total);
    r.mean_iterations += s.iterations;
    r.max_penetration = std::max(r.max_penetration, s.max_penetration);
  }
  const Real n = static_cast<Real>(steps.size());
  r.mean_solver_ms /= n;
  r.accuracy /= n;
  r.mean_iterations /= n;
  return r;
}

void write_trajectory_header(std::ostream& out) {
  out << "step,body,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz\n";
}

void write_trajectory_rows(std::ostream& out, long step, const World& world) {
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < world.bodies.size(); ++i) {
    const Body& b = world.bodies[i];
    const Quat& q = b.orientation;
    out << step << ',' << i << ',' << b.position.x() << ',' << b.position.y() << ','
        << b.position.z() << ',' << q.w() << ',' << q.x() << ',' << q.y() << ',' << q.z() << ','
        << b.lin_vel.x() << ',' << b.lin_vel.y() << ',' << b.lin_vel.z() << ',' << b.ang_vel.x()
        << ',' << b.ang_vel.y() << ',' << b.ang_vel.z() << '\n';
  }
  out.precision(old);
}

void write_metrics_header(std::ostream& out) {
  out << "step,solver_ms,iterations,theta_final,err_soft,err_hard_inequality,err_hard_equality,"
         "err_contact,err_total,max_penetration,contacts\n";
}

void write_metrics_row(std::ostream& out, const StepRecord& r) {
  const auto old = out.precision(17);
  out << r.step << ',' << r.solver_ms << ',' << r.iterations << ',' << r.theta_final << ','
      << r.errors.soft << ',' << r.errors.hard_inequality << ',' << r.errors.hard_equality << ','
      << r.errors.contact << ',' << r.errors.total << ',' << r.max_penetration << ','
      << r.contacts << '\n';
  out.precision(old);
}

RunResult run_simulation(Simulation& sim, long steps, const RunSinks& sinks) {
  if (steps < 0) throw UsageError("step count must be >= 0");
  RunResult result;
  if (sinks.trajectory) write_trajectory_header(*sinks.trajectory);
  if (sinks.metrics) write_metrics_header(*sinks.metrics);
  result.steps.reserve(static_cast<std::size_t>(steps));
  for (long s = 0; s < steps; ++s) {
    result.steps.push_back(sim.step());
    if (sinks.trajectory) write_trajectory_rows(*sinks.trajectory, result.steps.back().step, sim.world());
    if (sinks.metrics) write_metrics_row(*sinks.metrics, result.steps.back());
  }
  result.record =
      summarize_run(sim.scene().name, sim.solver(), sim.config().max_iters, result.steps);
  return result;
}

LinearFit fit_linear(std::span<const Real> x, std::span<const Real> y) {
  if (x.size() != y.size()) throw UsageError("fit needs matching x and y");
  if (x.size() < 4) throw UsageError("linear fit needs at least 4 points");
  const Real n = static_cast<Real>(x.size());
  Real mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  Real sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw UsageError("linear fit needs distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

ScalingResult run_scaling_sweep(const std::function<Scene(int)>& make_scene,
                                std::span<const int> sizes, SolverKind kind,
                                const SolverConfig& config, long steps, long warmup) {
  if (sizes.size() < 4) throw UsageError("scaling sweep needs at least 4 sizes");
  if (steps < 1) throw UsageError("scaling sweep needs at least one timed step");
  ScalingResult out;
  std::vector<Real> xs, ys;
  for (int size : sizes) {
    Simulation sim(make_scene(size), kind, config);
    for (long s = 0; s < warmup; ++s) sim.step();
    ScalingPoint p;
    p.size = size;
    p.subsystems = sim.world().subsystems.size();
    for (long s = 0; s < steps; ++s) {
      const StepRecord r = sim.step();
      p.mean_solver_ms += r.solver_ms;
      p.intra_constraints += static_cast<Real>(r.intra_constraints);
      p.coupling_constraints += static_cast<Real>(r.coupling_constraints);
    }
    p.mean_solver_ms /= static_cast<Real>(steps);
    p.intra_constraints /= static_cast<Real>(steps);
    p.coupling_constraints /= static_cast<Real>(steps);
    p.complexity = static_cast<Real>(p.subsystems) + p.intra_constraints + p.coupling_constraints;
    xs.push_back(p.complexity);
    ys.push_back(p.mean_solver_ms);
    out.points.push_back(p);
  }
  out.fit = fit_linear(xs, ys);
  return out;
}

void write_scaling_csv(std::ostream& out, const ScalingResult& result) {
  const auto old = out.precision(17);
  out << "size,subsystems,intra_constraints,coupling_constraints,complexity,mean_solver_ms\n";
  for (const auto& p : result.points)
    out << p.size << ',' << p.subsystems << ',' << p.intra_constraints << ','
        << p.coupling_constraints << ',' << p.complexity << ',' << p.mean_solver_ms << '\n';
  out << "# slope," << result.fit.slope << ",intercept," << result.fit.intercept << ",r_squared,"
      << result.fit.r_squared << '\n';
  out.precision(old);
}

}  // namespace subadmm
