#include <subadmm/dynamics.hpp>
#include <subadmm/step.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace subadmm;

namespace {

World single_body_world(const Body& body, Vec3 gravity = Vec3(0.0, 0.0, -9.81)) {
  World w;
  w.gravity = gravity;
  w.dt = 0.01;
  const int id = w.add_body(body);
  w.add_subsystem({id});
  w.finalize();
  return w;
}

VecX free_velocity(const World& w, int sub = 0) {
  const auto d = assemble_subsystem_dynamics(w, w.subsystems[sub]);
  return d.A.llt().solve(d.b);
}

Body box_body(Vec3 half) {
  Body b;
  b.mass = 2.0;
  const Real m = b.mass / 3.0;
  b.inertia_body = Vec3(m * (half.y() * half.y() + half.z() * half.z()),
                        m * (half.x() * half.x() + half.z() * half.z()),
                        m * (half.x() * half.x() + half.y() * half.y()))
                       .asDiagonal();
  return b;
}

}  // namespace

TEST(Dynamics, FallingPointMassOneStep) {
  Body p;
  p.kind = BodyKind::particle;
  p.mass = 1.0;
  const World w = single_body_world(p);
  const VecX v = free_velocity(w);
  ASSERT_EQ(v.size(), 3);
  EXPECT_NEAR(v.z(), -0.04905, 1e-15);
  // Explicit oracle: v_{k+1} = v_k + t g, midpoint is the average.
  const Real v_next = 0.0 + 0.01 * -9.81;
  EXPECT_NEAR(2.0 * v.z() - 0.0, v_next, 1e-15);
}

TEST(Dynamics, FreeDriftIsFixedPoint) {
  Body b = box_body(Vec3(0.1, 0.2, 0.3));
  b.lin_vel = Vec3(0.3, -1.0, 2.0);
  const World w = single_body_world(b, Vec3::Zero());
  const VecX v = free_velocity(w);
  EXPECT_LT((v.head<3>() - b.lin_vel).norm(), 1e-15);
}

TEST(Dynamics, IsotropicSphereHasNoGyroscopicImpulse) {
  Body s;
  s.inertia_body = Mat3::Identity() * 0.4e-4;
  s.ang_vel = Vec3(3.0, -7.0, 11.0);
  s.orientation = Quat(Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()));
  EXPECT_EQ(gyroscopic_impulse(s, 0.01), Vec3::Zero());
}

TEST(Dynamics, GyroscopicImpulseMatchesFirstOrderTerm) {
  Body b = box_body(Vec3(0.05, 0.2, 0.4));
  b.ang_vel = Vec3(0.3, 0.2, -0.1);
  const Real t = 1e-4;
  const Vec3 l = b.world_inertia() * b.ang_vel;
  const Vec3 first_order = -t * b.ang_vel.cross(l);
  EXPECT_LT((gyroscopic_impulse(b, t) - first_order).norm(), 1e-3 * first_order.norm());
}

TEST(Dynamics, DynamicsMatrixIsTwiceMass) {
  Body b = box_body(Vec3(0.1, 0.2, 0.3));
  b.orientation = Quat(Eigen::AngleAxisd(0.4, Vec3::UnitY()));
  const World w = single_body_world(b);
  const auto d = assemble_subsystem_dynamics(w, w.subsystems[0]);
  EXPECT_LT((d.A.topLeftCorner<3, 3>() - 2.0 * b.mass * Mat3::Identity()).norm(), 1e-15);
  EXPECT_LT((d.A.bottomRightCorner<3, 3>() - 2.0 * b.world_inertia()).norm(), 1e-15);
  EXPECT_EQ(Eigen::LLT<MatX>(d.A).info(), Eigen::Success);
}

TEST(Dynamics, ExternalImpulseCountChecked) {
  const World w = single_body_world(Body{});
  std::vector<Vec6> two(2, Vec6::Zero());
  EXPECT_THROW(assemble_subsystem_dynamics(w, w.subsystems[0], two), UsageError);
}

TEST(Integrate, ZeroVelocityLeavesPose) {
  World w = single_body_world(Body{});
  const Vec3 p0 = w.bodies[0].position;
  integrate_state(w, w.subsystems[0], VecX::Zero(6));
  EXPECT_EQ(w.bodies[0].position, p0);
  EXPECT_EQ(w.bodies[0].lin_vel, Vec3::Zero());
}

TEST(Integrate, LinearShift) {
  World w = single_body_world(Body{});
  VecX v = VecX::Zero(6);
  v(0) = 1.0;
  integrate_state(w, w.subsystems[0], v);
  EXPECT_NEAR(w.bodies[0].position.x(), 0.01, 1e-17);
  EXPECT_DOUBLE_EQ(w.bodies[0].lin_vel.x(), 2.0);
}

TEST(Integrate, HalfTurnAboutZ) {
  World w = single_body_world(Body{});
  VecX v = VecX::Zero(6);
  v(5) = 100.0 * std::numbers::pi;
  integrate_state(w, w.subsystems[0], v);
  const Quat& q = w.bodies[0].orientation;
  EXPECT_NEAR(q.norm(), 1.0, 1e-15);
  const Quat expected(Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitZ()));
  EXPECT_NEAR(std::abs(q.dot(expected)), 1.0, 1e-14);
}

TEST(Integrate, DimensionMismatchThrows) {
  World w = single_body_world(Body{});
  EXPECT_THROW(integrate_state(w, w.subsystems[0], VecX::Zero(3)), UsageError);
}

TEST(Fold, EmptyListUnchanged) {
  SubsystemDynamics d{MatX::Identity(2, 2), VecX::Ones(2), VecX::Zero(2)};
  fold_soft_constraints(d, 0, {});
  EXPECT_EQ(d.A, MatX::Identity(2, 2));
  EXPECT_EQ(d.b, VecX::Ones(2));
}

namespace {

ConstraintSpec one_dof_soft(Real k, Real alpha, Real e) {
  ConstraintSpec c;
  c.id = 1;
  c.kind = ConstraintKind::soft;
  c.error = VecX::Constant(1, e);
  c.stiffness = VecX::Constant(1, k);
  c.alpha = VecX::Constant(1, alpha);
  c.blocks.push_back({0, 0, MatX::Ones(1, 1)});
  return c;
}

}  // namespace

TEST(Fold, OneDofExampleMatchesLoop) {
  SubsystemDynamics d{MatX::Ones(1, 1), VecX::Zero(1), VecX::Zero(1)};
  const ConstraintSpec c = one_dof_soft(10.0, 1.0, 0.1);
  SubsystemDynamics folded = d;
  fold_soft_constraints(folded, 0, std::span(&c, 1));
  EXPECT_DOUBLE_EQ(folded.A(0, 0), 11.0);
  EXPECT_DOUBLE_EQ(folded.b(0), -1.0);
  EXPECT_NEAR(folded.b(0) / folded.A(0, 0), -1.0 / 11.0, 1e-16);

  SolverConfig cfg;
  cfg.tolerance = 1e-12;
  cfg.max_iters = 10000;
  SubAdmmSolver loop({d}, {c}, cfg);
  const Solution s = loop.solve();
  ASSERT_TRUE(s.report.converged);
  EXPECT_NEAR(s.velocities[0](0), -1.0 / 11.0, 1e-8);
}

TEST(Fold, ZeroStiffnessNoChange) {
  SubsystemDynamics d{MatX::Ones(1, 1), VecX::Zero(1), VecX::Zero(1)};
  const ConstraintSpec c = one_dof_soft(0.0, 1.0, 0.1);
  fold_soft_constraints(d, 0, std::span(&c, 1));
  EXPECT_DOUBLE_EQ(d.A(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(d.b(0), 0.0);
}

TEST(Fold, RejectsNonSoftAndCoupling) {
  SubsystemDynamics d{MatX::Ones(1, 1), VecX::Zero(1), VecX::Zero(1)};
  ConstraintSpec hard = one_dof_soft(1.0, 1.0, 0.0);
  hard.kind = ConstraintKind::hard_equality;
  EXPECT_THROW(fold_soft_constraints(d, 0, std::span(&hard, 1)), UsageError);
  ConstraintSpec coupling = one_dof_soft(1.0, 1.0, 0.0);
  coupling.blocks.push_back({1, 0, MatX::Ones(1, 1)});
  EXPECT_THROW(fold_soft_constraints(d, 0, std::span(&coupling, 1)), UsageError);
}

TEST(Fold, FoldedAndLoopSolvesAgree) {
  // Two bodies in one subsystem tied by three random soft rows.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<Real> u(-1.0, 1.0);
  SubsystemDynamics d;
  MatX r = MatX::NullaryExpr(6, 6, [&] { return u(rng); });
  d.A = r * r.transpose() + 3.0 * MatX::Identity(6, 6);
  d.b = VecX::NullaryExpr(6, [&] { return u(rng); });
  d.v_prev = VecX::Zero(6);
  std::vector<ConstraintSpec> soft;
  for (int j = 0; j < 3; ++j) {
    ConstraintSpec c = one_dof_soft(std::abs(u(rng)) * 50.0, 1.5, u(rng));
    c.id = j + 1;
    c.blocks[0].block = MatX::NullaryExpr(1, 6, [&] { return u(rng); });
    soft.push_back(c);
  }
  SolverConfig cfg;
  cfg.tolerance = 1e-24;
  cfg.max_iters = 100000;
  cfg.fold_intra_soft = true;
  const StepResult folded = solve_constraints(SolverKind::subadmm, {d}, soft, cfg);
  cfg.fold_intra_soft = false;
  const StepResult loop = solve_constraints(SolverKind::subadmm, {d}, soft, cfg);
  EXPECT_LT((folded.velocities[0] - loop.velocities[0]).norm(), 1e-8);
  for (std::size_t j = 0; j < soft.size(); ++j)
    EXPECT_NEAR(folded.impulses[j](0), loop.impulses[j](0), 1e-8);
}

TEST(FreeBody, LinearMomentumBitIdentical) {
  Body b = box_body(Vec3(0.1, 0.2, 0.3));
  b.lin_vel = Vec3(0.1, 0.2, -0.3);
  b.ang_vel = Vec3(1.0, 5.0, 0.2);
  World w = single_body_world(b, Vec3::Zero());
  const Vec3 p0 = b.mass * b.lin_vel;
  SolverConfig cfg;
  for (int s = 0; s < 1000; ++s) solve_step(w, {}, cfg);
  EXPECT_EQ(w.bodies[0].mass * w.bodies[0].lin_vel, p0);
}

TEST(FreeBody, TumblingBoxAngularMomentumDrift) {
  Body b = box_body(Vec3(0.05, 0.15, 0.3));
  b.ang_vel = Vec3(0.5, 4.0, 0.3);  // near the unstable middle axis
  World w = single_body_world(b, Vec3::Zero());
  const Real l0 = (b.world_inertia() * b.ang_vel).norm();
  SolverConfig cfg;
  Real worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    solve_step(w, {}, cfg);
    const Body& c = w.bodies[0];
    worst = std::max(worst, std::abs((c.world_inertia() * c.ang_vel).norm() - l0) / l0);
    ASSERT_NEAR(c.orientation.norm(), 1.0, 1e-9);
  }
  EXPECT_LT(worst, 1e-6);
}
