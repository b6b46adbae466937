#pragma once

// Step loop over a Scene: drive kinematics, generate constraints, solve,
// integrate, record.

#include <subadmm/scene.hpp>
#include <subadmm/step.hpp>

#include <vector>

namespace subadmm {

struct StepRecord {
  long step = 0;  // 1-based index of the completed step
  Real solver_ms = 0.0;
  int iterations = 0;
  Real theta_final = 0.0;
  bool converged = false;
  ConstraintErrors errors;
  Real max_penetration = 0.0;
  std::size_t constraints = 0;
  std::size_t contacts = 0;
  std::size_t intra_constraints = 0;
  std::size_t coupling_constraints = 0;
};

class Simulation {
 public:
  Simulation(Scene scene, SolverKind kind, SolverConfig config);

  // Throws SolverAbort prefixed with the step index.
  StepRecord step();

  Scene& scene() { return scene_; }
  const Scene& scene() const { return scene_; }
  World& world() { return scene_.world; }
  const World& world() const { return scene_.world; }
  SolverKind solver() const { return kind_; }
  const SolverConfig& config() const { return config_; }

  // Constraints and impulses of the last completed step.
  const std::vector<ConstraintSpec>& last_constraints() const { return last_constraints_; }
  const StepResult& last_result() const { return last_result_; }

 private:
  Scene scene_;
  SolverKind kind_;
  SolverConfig config_;
  WarmStartCache warm_;
  std::vector<ConstraintSpec> last_constraints_;
  StepResult last_result_;
};

}  // namespace subadmm
