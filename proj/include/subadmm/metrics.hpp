#pragma once

// Benchmark bookkeeping: accuracy/timing summaries, CSV sinks, linear
// scaling fits.

#include <subadmm/simulation.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace subadmm {

inline constexpr Real kErrorFloor = 1e-16;

// -log10 of the error norm floored at kErrorFloor; never exceeds 16.
Real accuracy_score(Real error_norm);

struct BenchRecord {
  std::string scenario;
  std::string solver;
  int iteration_budget = 0;
  long steps = 0;
  Real mean_solver_ms = 0.0;     // AT
  Real accuracy = 0.0;           // AA
  Real mean_iterations = 0.0;
  Real max_penetration = 0.0;
  std::optional<Real> r_squared;  // scaling sweeps only
};

BenchRecord summarize_run(const std::string& scenario, SolverKind kind, int iteration_budget,
                          std::span<const StepRecord> steps);

void write_trajectory_header(std::ostream& out);
// One row per body: step, body, position, quaternion (w x y z), linear and
// angular velocity, all at full precision.
void write_trajectory_rows(std::ostream& out, long step, const World& world);

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const StepRecord& rec);

struct RunSinks {
  std::ostream* trajectory = nullptr;
  std::ostream* metrics = nullptr;
};

struct RunResult {
  BenchRecord record;
  std::vector<StepRecord> steps;
};

// Runs `steps` steps; SolverAbort propagates with the step index.
RunResult run_simulation(Simulation& sim, long steps, const RunSinks& sinks = {});

struct LinearFit {
  Real slope = 0.0;
  Real intercept = 0.0;
  Real r_squared = 0.0;
};

// Least squares y = slope x + intercept; needs at least 4 points.
LinearFit fit_linear(std::span<const Real> x, std::span<const Real> y);

struct ScalingPoint {
  int size = 0;
  std::size_t subsystems = 0;
  Real intra_constraints = 0.0;     // mean over steps
  Real coupling_constraints = 0.0;  // mean over steps
  Real complexity = 0.0;            // n_s + n_in + n_cp
  Real mean_solver_ms = 0.0;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  LinearFit fit;
};

// Builds a scene per size, runs `steps` steps after `warmup` untimed ones,
// and fits mean solver time against n_s + n_in + n_cp.
ScalingResult run_scaling_sweep(const std::function<Scene(int)>& make_scene,
                                std::span<const int> sizes, SolverKind kind,
                                const SolverConfig& config, long steps, long warmup = 0);

void write_scaling_csv(std::ostream& out, const ScalingResult& result);

}  // namespace subadmm
