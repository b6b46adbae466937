#pragma once

// One simulation step: parallel assembly, optional folding of
// intra-subsystem soft rows, the selected solver, then integration.

#include <subadmm/baselines.hpp>
#include <subadmm/subadmm_solver.hpp>

#include <vector>

namespace subadmm {

struct StepResult {
  std::vector<VecX> velocities;  // per subsystem
  std::vector<VecX> impulses;    // per constraint, input order
  StepReport report;
};

// Solves A v = b + J^T lambda under `constraints` without touching any
// world state. Intra-subsystem soft rows are folded into A, b when
// config.fold_intra_soft is set; their impulses are recovered afterwards.
StepResult solve_constraints(SolverKind kind, std::vector<SubsystemDynamics> dynamics,
                             const std::vector<ConstraintSpec>& constraints,
                             const SolverConfig& config, const WarmStartCache* warm = nullptr);

// Full step on the world; advances poses, velocities, step index and time
// of dynamic bodies. Kinematic bodies are left to their driver.
StepResult solve_step(World& world, const std::vector<ConstraintSpec>& constraints,
                      const SolverConfig& config, SolverKind kind = SolverKind::subadmm,
                      const WarmStartCache* warm = nullptr);

// Stores the impulses of a finished step for the next warm start.
void update_warm_start(WarmStartCache& cache, const std::vector<ConstraintSpec>& constraints,
                       const std::vector<VecX>& impulses);

}  // namespace subadmm
