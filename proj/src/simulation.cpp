#include <subadmm/simulation.hpp>

#include <string>

namespace subadmm {

Simulation::Simulation(Scene scene, SolverKind kind, SolverConfig config)
    : scene_(std::move(scene)), kind_(kind), config_(config) {
  config_.validate();
  scene_.validate();
  scene_.world.finalize();
}

StepRecord Simulation::step() {
  World& world = scene_.world;
  const Real t = world.time;
  const Real dt = world.dt;
  scene_.drive_kinematics(t, dt);
  std::vector<ConstraintSpec> constraints = scene_.constraints(config_.threads);

  StepResult result;
  try {
    result = solve_step(world, constraints, config_, kind_, config_.warm_start ? &warm_ : nullptr);
  } catch (const SolverAbort& e) {
    throw SolverAbort("step " + std::to_string(world.step_index + 1) + ": " + e.what(),
                      e.iteration());
  }
  if (config_.warm_start) update_warm_start(warm_, constraints, result.impulses);
  scene_.advance_kinematics(world.time, dt);

  StepRecord rec;
  rec.step = world.step_index;
  rec.solver_ms = result.report.timings.total_ms;
  rec.iterations = result.report.iterations;
  rec.theta_final = result.report.theta.empty() ? 0.0 : result.report.theta.back();
  rec.converged = result.report.converged;
  rec.errors = result.report.errors;
  rec.constraints = constraints.size();
  rec.contacts = constraints.size() - scene_.joints.size();
  rec.intra_constraints = result.report.intra_constraints;
  rec.coupling_constraints = result.report.coupling_constraints;
  rec.max_penetration = scene_.max_penetration(config_.threads);

  last_constraints_ = std::move(constraints);
  last_result_ = std::move(result);
  return rec;
}

}  // namespace subadmm
