#include <subadmm/parallel.hpp>
#include <subadmm/step.hpp>

#include <chrono>

namespace subadmm {

namespace {

using Clock = std::chrono::steady_clock;

Real elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<Real, std::milli>(Clock::now() - since).count();
}

bool foldable(const ConstraintSpec& c) {
  return c.kind == ConstraintKind::soft && c.is_intra();
}

}  // namespace

StepResult solve_constraints(SolverKind kind, std::vector<SubsystemDynamics> dynamics,
                             const std::vector<ConstraintSpec>& constraints,
                             const SolverConfig& config, const WarmStartCache* warm) {
  const auto t0 = Clock::now();
  std::vector<std::vector<ConstraintSpec>> folded(dynamics.size());
  std::vector<ConstraintSpec> active;
  std::vector<std::size_t> active_index;
  std::vector<std::size_t> folded_index;
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    const ConstraintSpec& c = constraints[j];
    if (config.fold_intra_soft && foldable(c)) {
      c.validate();
      folded.at(c.participants().front()).push_back(c);
      folded_index.push_back(j);
    } else {
      active.push_back(c);
      active_index.push_back(j);
    }
  }
  parallel_for(static_cast<int>(dynamics.size()), [&](int i) {
    if (!folded[i].empty()) fold_soft_constraints(dynamics[i], i, folded[i]);
  }, config.threads);
  const Real fold_ms = elapsed_ms(t0);

  Solution sol;
  if (kind == SolverKind::subadmm) {
    SubAdmmSolver solver(std::move(dynamics), std::move(active), config, warm);
    sol = solver.solve();
  } else {
    sol = solve_baseline(kind, dynamics, active, config, warm);
  }

  StepResult out;
  out.velocities = std::move(sol.velocities);
  out.report = std::move(sol.report);
  out.report.timings.assembly_ms += fold_ms;
  out.impulses.resize(constraints.size());
  for (std::size_t k = 0; k < active_index.size(); ++k)
    out.impulses[active_index[k]] = std::move(sol.impulses[k]);
  for (std::size_t j : folded_index) {
    const ConstraintSpec& c = constraints[j];
    const VecX jv = c.apply(out.velocities);
    out.impulses[j] = -c.stiffness.cwiseProduct(c.error + c.alpha.cwiseProduct(jv));
    ++out.report.intra_constraints;
  }
  if (!folded_index.empty())
    out.report.errors =
        constraint_error_report(constraints, out.velocities, out.impulses, config.strict_contact);
  return out;
}

StepResult solve_step(World& world, const std::vector<ConstraintSpec>& constraints,
                      const SolverConfig& config, SolverKind kind, const WarmStartCache* warm) {
  const auto t0 = Clock::now();
  std::vector<SubsystemDynamics> dynamics(world.subsystems.size());
  parallel_for(static_cast<int>(world.subsystems.size()), [&](int i) {
    dynamics[i] = assemble_subsystem_dynamics(world, world.subsystems[i]);
  }, config.threads);
  const Real assembly_ms = elapsed_ms(t0);

  StepResult out = solve_constraints(kind, std::move(dynamics), constraints, config, warm);
  out.report.timings.assembly_ms += assembly_ms;
  out.report.timings.total_ms = out.report.timings.assembly_ms +
                                out.report.timings.factorization_ms +
                                out.report.timings.iteration_ms;

  parallel_for(static_cast<int>(world.subsystems.size()), [&](int i) {
    integrate_state(world, world.subsystems[i], out.velocities[i]);
  }, config.threads);
  world.step_index += 1;
  world.time += world.dt;
  return out;
}

void update_warm_start(WarmStartCache& cache, const std::vector<ConstraintSpec>& constraints,
                       const std::vector<VecX>& impulses) {
  cache.clear();
  for (std::size_t j = 0; j < constraints.size(); ++j) cache[constraints[j].id] = impulses[j];
}

}  // namespace subadmm
