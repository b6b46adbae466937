#include <subadmm/dynamics.hpp>

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace subadmm {

namespace {

bool is_isotropic(const Mat3& inertia) {
  return inertia(0, 1) == 0.0 && inertia(0, 2) == 0.0 && inertia(1, 2) == 0.0 &&
         inertia(1, 0) == 0.0 && inertia(2, 0) == 0.0 && inertia(2, 1) == 0.0 &&
         inertia(0, 0) == inertia(1, 1) && inertia(1, 1) == inertia(2, 2);
}

}  // namespace

Quat integrate_orientation(const Quat& q, const Vec3& omega, Real dt) {
  const Vec3 rotvec = omega * dt;
  const Real angle = rotvec.norm();
  Quat dq;
  if (angle < 1e-12) {
    dq = Quat(1.0, 0.5 * rotvec.x(), 0.5 * rotvec.y(), 0.5 * rotvec.z());
  } else {
    dq = Quat(Eigen::AngleAxisd(angle, rotvec / angle));
  }
  Quat out = dq * q;
  out.normalize();
  return out;
}

Vec3 gyroscopic_impulse(const Body& body, Real dt) {
  if (body.kind != BodyKind::rigid || is_isotropic(body.inertia_body) || body.ang_vel.isZero(0.0))
    return Vec3::Zero();
  const Mat3 inertia = body.world_inertia();
  const Vec3 momentum = inertia * body.ang_vel;
  Vec3 omega_next = body.ang_vel;
  for (int it = 0; it < 50; ++it) {
    const Vec3 omega_mid = 0.5 * (body.ang_vel + omega_next);
    const Quat q_next = integrate_orientation(body.orientation, omega_mid, dt);
    const Mat3 r = q_next.toRotationMatrix();
    const Mat3 inertia_next = r * body.inertia_body * r.transpose();
    const Vec3 candidate = inertia_next.llt().solve(momentum);
    const Real change = (candidate - omega_next).norm();
    omega_next = candidate;
    if (change <= 1e-15 * (1.0 + omega_next.norm())) break;
  }
  return inertia * omega_next - momentum;
}

SubsystemDynamics assemble_subsystem_dynamics(const World& world, const Subsystem& sub,
                                              std::span<const Vec6> external_impulses) {
  if (!(world.dt > 0.0)) throw ConfigurationError("step size must be > 0");
  if (!external_impulses.empty() && external_impulses.size() != sub.bodies.size())
    throw UsageError("external impulses: one entry per subsystem body expected");
  const Real t = world.dt;
  SubsystemDynamics dyn;
  dyn.A = MatX::Zero(sub.dim, sub.dim);
  dyn.b = VecX::Zero(sub.dim);
  dyn.v_prev = VecX::Zero(sub.dim);
  for (std::size_t k = 0; k < sub.bodies.size(); ++k) {
    const Body& body = world.bodies.at(sub.bodies[k]);
    if (body.kinematic)
      throw UsageError("body " + std::to_string(sub.bodies[k]) + " is kinematic; not allowed in a subsystem");
    const Index o = sub.offsets.at(k);
    dyn.A.block<3, 3>(o, o).diagonal().setConstant(2.0 * body.mass);
    Vec3 lin = t * (body.mass * world.gravity + body.force);
    if (!external_impulses.empty()) lin += external_impulses[k].head<3>();
    // b = A v_k + impulses; the product form keeps free drift exact.
    dyn.b.segment<3>(o) = 2.0 * body.mass * body.lin_vel + lin;
    dyn.v_prev.segment<3>(o) = body.lin_vel;
    if (body.kind == BodyKind::rigid) {
      const Mat3 inertia = body.world_inertia();
      if (inertia.llt().info() != Eigen::Success)
        throw ConfigurationError("body " + std::to_string(sub.bodies[k]) + " inertia is not SPD");
      dyn.A.block<3, 3>(o + 3, o + 3) = 2.0 * inertia;
      Vec3 ang = t * body.torque + gyroscopic_impulse(body, t);
      if (!external_impulses.empty()) ang += external_impulses[k].tail<3>();
      dyn.b.segment<3>(o + 3) = (2.0 * inertia) * body.ang_vel + ang;
      dyn.v_prev.segment<3>(o + 3) = body.ang_vel;
    }
  }
  return dyn;
}

void integrate_state(World& world, const Subsystem& sub, const VecX& v_hat) {
  if (v_hat.size() != sub.dim) throw UsageError("integrate_state: velocity dimension mismatch");
  const Real t = world.dt;
  for (std::size_t k = 0; k < sub.bodies.size(); ++k) {
    Body& body = world.bodies[sub.bodies[k]];
    const Index o = sub.offsets[k];
    const Vec3 lin = v_hat.segment<3>(o);
    body.position += t * lin;
    body.lin_vel = 2.0 * lin - body.lin_vel;
    if (body.kind == BodyKind::rigid) {
      const Vec3 ang = v_hat.segment<3>(o + 3);
      body.orientation = integrate_orientation(body.orientation, ang, t);
      body.ang_vel = 2.0 * ang - body.ang_vel;
    }
  }
}

void fold_soft_constraints(SubsystemDynamics& dyn, int subsystem,
                           std::span<const ConstraintSpec> intra_soft) {
  const Index n = dyn.A.rows();
  for (const auto& c : intra_soft) {
    if (c.kind != ConstraintKind::soft)
      throw UsageError("fold_soft_constraints: constraint " + std::to_string(c.id) + " is not soft");
    const auto parts = c.participants();
    if (parts.size() != 1 || parts.front() != subsystem)
      throw UsageError("fold_soft_constraints: constraint " + std::to_string(c.id) +
                       " is not intra-subsystem for subsystem " + std::to_string(subsystem));
    const MatX j = c.subsystem_jacobian(subsystem, n);
    const VecX ka = c.stiffness.cwiseProduct(c.alpha);
    dyn.A.noalias() += j.transpose() * ka.asDiagonal() * j;
    dyn.b.noalias() -= j.transpose() * c.stiffness.cwiseProduct(c.error);
  }
}

}  // namespace subadmm
