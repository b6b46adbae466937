#pragma once

// Constraint rows in the form consumed by every solver:
//
//   soft             lambda = -k (e + alpha * J v)        (per row)
//   hard_inequality  0 <= lambda  _|_  J v + e >= 0       (per row)
//   hard_equality    J v + e = 0, lambda free             (per row)
//   contact          lambda in K, J v + e in K*, lambda _|_ J v + e
//                    with rows (normal, t1, t2) and K the friction cone
//
// v is the representative (midpoint) velocity and lambda an impulse.

#include <subadmm/world.hpp>

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace subadmm {

enum class ConstraintKind { soft, hard_inequality, hard_equality, contact };

std::string_view to_string(ConstraintKind kind);

// Dense rows x width block acting on columns [col, col + width) of one
// subsystem's velocity. Several blocks may target the same subsystem.
struct JacobianBlock {
  int subsystem = 0;
  Index col = 0;
  MatX block;
};

struct ConstraintSpec {
  std::uint64_t id = 0;  // stable key, used for warm starting
  ConstraintKind kind = ConstraintKind::hard_inequality;
  VecX error;            // e_j, velocity units
  std::vector<JacobianBlock> blocks;
  VecX stiffness;        // k_j per row, soft only
  VecX alpha;            // alpha_j per row, soft only
  Real friction = 0.0;   // mu_j, contact only

  Index rows() const { return error.size(); }
  // Distinct participating subsystems, ascending.
  std::vector<int> participants() const;
  bool is_intra() const { return participants().size() == 1; }
  // Throws ConfigurationError / UsageError on malformed data.
  void validate() const;
  // Rows of J restricted to one subsystem (rows x dim).
  MatX subsystem_jacobian(int subsystem, Index dim) const;
  // J v over all participants; v indexed by subsystem.
  VecX apply(const std::vector<VecX>& v) const;
};

// Body-level Jacobian block; rows x body.dof().
struct BodyJacobian {
  int body = 0;
  MatX block;
};

// Soft rows act on the representative velocity. Contact and hard rows are
// usually imposed on the end-of-step velocity v_{k+1} = 2 v - v_k, which is
// what makes impacts inelastic under the midpoint rule; the end-of-step
// relation J v_{k+1} + b >= 0 is rewritten as J v + (b - J v_k) / 2 >= 0.
enum class VelocityLevel { representative, end_of_step };

// Maps body-level blocks onto subsystem columns. Blocks on kinematic bodies
// are folded into the error through their prescribed velocity.
ConstraintSpec assemble_constraint(const World& world, ConstraintKind kind,
                                   std::span<const BodyJacobian> jacobians,
                                   const VecX& position_term, VelocityLevel level);

struct SoftGains {
  Real k = 0.0;
  Real alpha = 1.0;
};

// Gain/damping pair reproducing an implicit spring-damper with stiffness
// `spring` [N/m] and damping `damper` [N s/m] when the error term is the
// positional error divided by the step size.
SoftGains soft_gains(Real spring, Real damper, Real dt);

struct ContactErrorParams {
  Real erp = 0.2;                 // fraction of penetration corrected per step
  Real max_depenetration = 0.1;   // m/s
  Real slop = 0.0;                // tolerated penetration, m
};

// Positional term b of J v_{k+1} + b >= 0 for a contact normal. Separated
// pairs inside the margin get b = gap / t so the gap may close but not
// overshoot; penetration is corrected at -min(erp * depth / t, max).
Real make_contact_error(Real gap, const ContactErrorParams& params, Real dt,
                        Real kinematic_bias = 0.0);

struct ConstraintErrors {
  Real soft = 0.0;
  Real hard_inequality = 0.0;
  Real hard_equality = 0.0;
  Real contact = 0.0;
  Real total = 0.0;
};

// Residual of every constraint's defining relation at (v, lambda). Hard
// and contact complementarity are scored with Fischer-Burmeister; contact
// tangential rows with the maximal-dissipation residual. With
// strict_contact = false the normal gap is the cone-relaxed one,
// J_n v + e_n - mu |J_t v + e_t|, matching the convex model being solved.
ConstraintErrors constraint_error_report(std::span<const ConstraintSpec> constraints,
                                         const std::vector<VecX>& v,
                                         const std::vector<VecX>& lambda,
                                         bool strict_contact = false);

// Per-constraint squared residual contributions (used by the report).
Real constraint_residual_squared(const ConstraintSpec& c, const VecX& jv_plus_e,
                                 const VecX& lambda, bool strict_contact);

}  // namespace subadmm
