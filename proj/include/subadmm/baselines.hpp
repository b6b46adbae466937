#pragma once

// Reference solvers on the constraint-space system
//
//   s = G lambda + c,   G = J A^-1 J^T,   c = J A^-1 b + e,
//
// where s = J v + e is the constraint velocity. A is block diagonal over
// subsystems, so G is kept as one dense block per subsystem (rows of the
// constraints touching it); dense() materializes the full operator.

#include <subadmm/subadmm_solver.hpp>

#include <vector>

namespace subadmm {

class DelassusSystem {
 public:
  DelassusSystem(const std::vector<SubsystemDynamics>& dynamics,
                 std::vector<ConstraintSpec> constraints);

  Index rows() const { return rows_; }
  std::size_t constraint_count() const { return constraints_.size(); }
  const ConstraintSpec& constraint(std::size_t j) const { return constraints_[j]; }
  Index offset(std::size_t j) const { return offsets_[j]; }
  const VecX& free_term() const { return c_; }
  const MatX& diagonal_block(std::size_t j) const { return diag_[j]; }

  // Full n_c x n_c operator; desk-scale use only.
  MatX dense() const;
  // (G lambda + c) restricted to constraint j.
  VecX constraint_velocity(std::size_t j, const VecX& lambda) const;
  VecX apply(const VecX& lambda) const;  // G lambda + c
  // v_i = A_i^-1 (b_i + J_i^T lambda).
  std::vector<VecX> velocities(const VecX& lambda) const;
  // Splits the stacked impulse into per-constraint vectors.
  std::vector<VecX> split(const VecX& lambda) const;

 private:
  struct Member {
    int block;
    Index local_row;
  };
  struct Block {
    std::vector<int> constraints;
    std::vector<Index> local_offset;
    MatX jacobian;  // rows touching the subsystem x n_i
    MatX minv_jt;   // A^-1 J^T
    MatX local_g;   // J A^-1 J^T
    VecX free_velocity;
  };

  std::vector<ConstraintSpec> constraints_;
  std::vector<Index> offsets_;
  Index rows_ = 0;
  std::vector<Block> blocks_;
  std::vector<std::vector<Member>> membership_;
  std::vector<MatX> diag_;
  VecX c_;
};

DelassusSystem build_delassus(const std::vector<SubsystemDynamics>& dynamics,
                              const std::vector<ConstraintSpec>& constraints);

struct SweepOptions {
  int sweeps = 60;
  Real tolerance = 0.0;       // stop when max |delta lambda| falls below
  bool strict_contact = false;
  Real relaxation = 0.5;      // projected Jacobi only
  int threads = 0;
};

struct SweepResult {
  VecX lambda;
  int sweeps = 0;
  std::vector<Real> change;  // |delta lambda|^2 per sweep
  int skipped_rows = 0;      // constraints with a zero diagonal block
};

// Block projected Gauss-Seidel in constraint id order.
SweepResult pgs_solve(const DelassusSystem& sys, const SweepOptions& options,
                      const VecX* initial = nullptr);
// Under-relaxed projected Jacobi; all blocks updated from the same iterate.
SweepResult pj_solve(const DelassusSystem& sys, const SweepOptions& options,
                     const VecX* initial = nullptr);

// Exact minimizer of the constraint-j subproblem given the contribution r
// of every other impulse, i.e. s_j = D lambda_j + r.
VecX block_update(const ConstraintSpec& c, const MatX& diag, const VecX& r, const VecX& current,
                  bool strict_contact);

enum class SolverKind { subadmm, pgs, pj };

std::string_view to_string(SolverKind kind);
SolverKind solver_kind_from_string(std::string_view name);

// Runs a baseline end to end and fills a Solution like SubAdmmSolver does.
Solution solve_baseline(SolverKind kind, const std::vector<SubsystemDynamics>& dynamics,
                        const std::vector<ConstraintSpec>& constraints, const SolverConfig& config,
                        const WarmStartCache* warm = nullptr);

}  // namespace subadmm
