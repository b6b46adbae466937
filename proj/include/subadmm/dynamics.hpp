#pragma once

// Per-subsystem discrete dynamics  A_i v = b_i  for the midpoint rule
//
//   M (v_{k+1} - v_k) = t f + impulses,   v = (v_k + v_{k+1}) / 2,
//
// scaled to impulse units: A_i = 2 M, b_i = 2 M v_k + t f + gyroscopic.

#include <subadmm/constraint.hpp>
#include <subadmm/world.hpp>

#include <span>

namespace subadmm {

struct SubsystemDynamics {
  MatX A;
  VecX b;
  VecX v_prev;  // v_k, used to seed the constraint copies
};

// Impulse that, added to 2 I w, makes the unconstrained update preserve the
// world-frame angular momentum I w exactly. Evaluated from state k only by
// a fixed-point prediction of the free rotation; agrees with
// -t w x (I w) to first order and is exactly zero for isotropic inertia.
Vec3 gyroscopic_impulse(const Body& body, Real dt);

// `external_impulses` is either empty or holds one (linear, angular)
// impulse per body of the subsystem.
SubsystemDynamics assemble_subsystem_dynamics(const World& world, const Subsystem& sub,
                                              std::span<const Vec6> external_impulses = {});

// Poses advance with v, stored velocities become 2 v - v_k.
void integrate_state(World& world, const Subsystem& sub, const VecX& v_hat);

// Exponential-map orientation update for a world-frame angular velocity.
Quat integrate_orientation(const Quat& q, const Vec3& omega, Real dt);

// Folds intra-subsystem soft rows into (A, b):
//   A += sum k alpha J^T J,   b -= sum k e J^T.
void fold_soft_constraints(SubsystemDynamics& dyn, int subsystem,
                           std::span<const ConstraintSpec> intra_soft);

}  // namespace subadmm
