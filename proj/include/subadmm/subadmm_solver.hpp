#pragma once

// Subsystem-based ADMM.
//
// Each subsystem i owns the row stack J_c,i of every constraint touching it
// (intra rows first, then coupling rows) plus iterates (v_i, z_i, u_i, y_i)
// and a weight beta_i. One iteration is
//
//   (a) (A_i + beta_i J^T J) v_i = b_i + J^T (beta_i z_i - u_i),
//       y_i = beta_i J v_i + u_i                          parallel over i
//   (b) theta = sum_i |y_i - y_i_prev|^2                  fixed order
//   (c) per-constraint local solve filling z              parallel over j
//   (d) u_i = y_i - beta_i z_i                            parallel over i
//
// and the loop stops after (b) once theta < tolerance or the iteration
// budget is spent. At a fixed point u_ij = -lambda_j for every participant.

#include <subadmm/constraint.hpp>
#include <subadmm/dynamics.hpp>

#include <Eigen/Cholesky>

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace subadmm {

struct SolverConfig {
  int max_iters = 60;
  Real tolerance = 1e-10;                       // on theta (squared norm)
  bool fixed_iterations = false;  // ignore the tolerance, always run max_iters
  std::optional<std::vector<Real>> beta_override;  // per subsystem
  Real beta_scale = 1.0;                        // multiplies every beta
  bool warm_start = false;
  bool strict_contact = false;  // De Saxce normal correction
  bool fold_intra_soft = true;
  int threads = 0;              // 0: runtime default
  bool record_iteration_errors = false;
  Real pj_relaxation = 0.5;     // projected Jacobi only

  void validate() const;
};

struct Timings {
  Real assembly_ms = 0.0;
  Real factorization_ms = 0.0;
  Real iteration_ms = 0.0;
  Real total_ms = 0.0;
};

struct StepReport {
  int iterations = 0;
  std::vector<Real> theta;
  bool converged = false;
  bool hit_iteration_limit = false;
  bool impulse_mismatch = false;
  Real impulse_disagreement = 0.0;
  ConstraintErrors errors;
  std::vector<ConstraintErrors> iteration_errors;  // when requested
  Timings timings;
  std::size_t subsystems = 0;
  std::size_t intra_constraints = 0;
  std::size_t coupling_constraints = 0;
};

// True when the last value exceeds the one 10 entries earlier by 1e6 and
// every one of the last 10 entries rose.
bool steadily_growing(const std::vector<Real>& history);

// Previous impulses keyed by constraint id.
using WarmStartCache = std::unordered_map<std::uint64_t, VecX>;

// Tr(A) / Tr(J^T J); std::nullopt when J has no rows. Throws
// DegenerateConstraintError for an all-zero Jacobian with rows.
std::optional<Real> compute_beta(const MatX& A, const MatX& jc);

// Cholesky of A + beta J^T J; throws ConfigurationError when indefinite.
Eigen::LLT<MatX> factor_subsystem(const MatX& A, const MatX& jc, Real beta);

// Exact solution of (A + beta J^T J) v = b + J^T (beta z - u).
VecX subsystem_solve(const Eigen::LLT<MatX>& factor, const VecX& b, const MatX& jc, Real beta,
                     const VecX& z, const VecX& u);

struct Solution {
  std::vector<VecX> velocities;  // per subsystem
  std::vector<VecX> impulses;    // per constraint, input order
  StepReport report;
};

class SubAdmmSolver {
 public:
  // Factorizes every subsystem. `dynamics[i]` belongs to subsystem i and
  // constraint blocks index into it.
  SubAdmmSolver(std::vector<SubsystemDynamics> dynamics, std::vector<ConstraintSpec> constraints,
                const SolverConfig& config, const WarmStartCache* warm = nullptr);

  void update_velocities();
  Real residual();
  void update_constraints();
  void update_duals();
  // (a)-(d); returns theta.
  Real iterate();
  // Full loop with termination and divergence guard.
  Solution solve();

  // lambda_j = -u_ij; `disagreement` receives the max spread over copies.
  std::vector<VecX> impulses(Real* disagreement = nullptr) const;
  std::vector<VecX> velocities() const;
  std::optional<Real> beta(int subsystem) const { return subs_.at(subsystem).beta; }
  const MatX& stacked_jacobian(int subsystem) const { return subs_.at(subsystem).jc; }
  const VecX& y(int subsystem) const { return subs_.at(subsystem).y; }
  const VecX& z(int subsystem) const { return subs_.at(subsystem).z; }
  const VecX& u(int subsystem) const { return subs_.at(subsystem).u; }
  Real factorization_ms() const { return factorization_ms_; }

 private:
  struct SubState {
    SubsystemDynamics dyn;
    MatX jc;
    Eigen::LLT<MatX> factor;
    std::optional<Real> beta;
    VecX v, z, u, y, y_prev;
    Index intra_rows = 0;
  };
  struct Participant {
    int subsystem;
    Index row;
  };
  struct ConstraintSlot {
    std::vector<Participant> participants;
    VecX lambda;
    Real slip = 0.0;  // |sum z_t + e_t|, strict contact only
  };

  void local_solve(std::size_t j);

  std::vector<SubState> subs_;
  std::vector<ConstraintSpec> constraints_;
  std::vector<ConstraintSlot> slots_;
  SolverConfig config_;
  Real factorization_ms_ = 0.0;
};

}  // namespace subadmm
