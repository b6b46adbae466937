#include <subadmm/step.hpp>

#include "random_problem.hpp"

#include <gtest/gtest.h>

using namespace subadmm;
using subadmm::testing::Problem;

namespace {

SubsystemDynamics one_dof(Real a, Real b, Real v_prev = 0.0) {
  return {MatX::Constant(1, 1, a), VecX::Constant(1, b), VecX::Constant(1, v_prev)};
}

SolverConfig tight(int iters = 20000) {
  SolverConfig c;
  c.tolerance = 1e-24;
  c.max_iters = iters;
  return c;
}

}  // namespace

TEST(Beta, TraceRatio) {
  EXPECT_DOUBLE_EQ(*compute_beta(MatX::Identity(3, 3), MatX::Identity(3, 3)), 1.0);
  MatX j(1, 2);
  j << 1, 0;
  EXPECT_DOUBLE_EQ(*compute_beta(Eigen::Vector2d(2, 2).asDiagonal().toDenseMatrix(), j), 4.0);
  EXPECT_FALSE(compute_beta(MatX::Identity(3, 3), MatX(0, 3)).has_value());
  EXPECT_THROW(compute_beta(MatX::Identity(3, 3), MatX::Zero(2, 3)), DegenerateConstraintError);
}

TEST(Factor, Examples) {
  const auto f0 = factor_subsystem(MatX::Identity(2, 2), MatX(0, 2), 1.0);
  EXPECT_LT((f0.solve(VecX::Ones(2)) - VecX::Ones(2)).norm(), 1e-16);
  const auto f1 = factor_subsystem(MatX::Ones(1, 1), MatX::Constant(1, 1, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(f1.solve(VecX::Constant(1, 10.0))(0), 2.0);
  EXPECT_THROW(factor_subsystem(MatX::Ones(1, 1), MatX::Ones(1, 1), 0.0), UsageError);
  EXPECT_THROW(factor_subsystem(-MatX::Identity(2, 2), MatX(0, 2), 1.0), ConfigurationError);
}

TEST(Factor, RandomRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<Real> u(-1.0, 1.0);
  const MatX r = MatX::NullaryExpr(12, 12, [&] { return u(rng); });
  const MatX a = r * r.transpose() + MatX::Identity(12, 12);
  const MatX j = MatX::NullaryExpr(5, 12, [&] { return u(rng); });
  const Real beta = 0.7;
  const auto f = factor_subsystem(a, j, beta);
  const VecX rhs = VecX::NullaryExpr(12, [&] { return u(rng); });
  const VecX x = f.solve(rhs);
  EXPECT_LT(((a + beta * j.transpose() * j) * x - rhs).norm(), 1e-10 * rhs.norm());
}

TEST(SubsystemSolve, OneDofExample) {
  const MatX a = MatX::Ones(1, 1), j = MatX::Ones(1, 1);
  const auto f = factor_subsystem(a, j, 1.0);
  const VecX v = subsystem_solve(f, VecX::Zero(1), j, 1.0, VecX::Ones(1), VecX::Zero(1));
  EXPECT_DOUBLE_EQ(v(0), 0.5);
  EXPECT_THROW(subsystem_solve(f, VecX::Zero(2), j, 1.0, VecX::Ones(1), VecX::Zero(1)),
               UsageError);
}

TEST(SubsystemSolve, ZeroJacobianIsPlainSolve) {
  const MatX a = Eigen::Vector3d(1, 2, 4).asDiagonal();
  const MatX j = MatX::Zero(2, 3);
  const auto f = factor_subsystem(a, j, 3.0);
  const VecX v = subsystem_solve(f, VecX::Ones(3), j, 3.0, VecX::Ones(2), VecX::Ones(2));
  EXPECT_LT((v - Eigen::Vector3d(1, 0.5, 0.25)).norm(), 1e-15);
}

TEST(Admm, NoConstraintsOneIteration) {
  SubAdmmSolver s({one_dof(2.0, 1.0)}, {}, SolverConfig{});
  const Solution sol = s.solve();
  EXPECT_EQ(sol.report.iterations, 1);
  EXPECT_TRUE(sol.report.converged);
  EXPECT_DOUBLE_EQ(sol.velocities[0](0), 0.5);
  EXPECT_TRUE(sol.impulses.empty());
}

TEST(Admm, FallingMassOnGround) {
  // m = 1, t = 0.01: A = 2, b = 2 v_k - t g with v_k = 0.
  ConstraintSpec c;
  c.id = 1;
  c.kind = ConstraintKind::contact;
  c.friction = 0.0;
  c.error = Vec3::Zero();
  MatX j = MatX::Zero(3, 1);
  j(0, 0) = 1.0;
  c.blocks.push_back({0, 0, j});
  // Tangent rows are identically zero on a 1-DOF body.
  SubAdmmSolver s({one_dof(2.0, -0.0981)}, {c}, tight());
  const Solution sol = s.solve();
  ASSERT_TRUE(sol.report.converged);
  EXPECT_NEAR(sol.velocities[0](0), 0.0, 1e-12);
  EXPECT_NEAR(sol.impulses[0](0), 0.0981, 1e-10);
  EXPECT_NEAR(-s.u(0)(0), 0.0981, 1e-10);
}

TEST(Admm, EqualMassMergeConservesMomentum) {
  ConstraintSpec c;
  c.id = 1;
  c.kind = ConstraintKind::hard_equality;
  c.error = VecX::Zero(1);
  c.blocks.push_back({0, 0, MatX::Ones(1, 1)});
  c.blocks.push_back({1, 0, -MatX::Ones(1, 1)});
  SubAdmmSolver s({one_dof(2.0, 2.0, 1.0), one_dof(2.0, -2.0, -1.0)}, {c}, tight());
  const Solution sol = s.solve();
  ASSERT_TRUE(sol.report.converged);
  EXPECT_NEAR(sol.velocities[0](0), 0.0, 1e-12);
  EXPECT_NEAR(sol.velocities[1](0), 0.0, 1e-12);
  Real spread = 0.0;
  s.impulses(&spread);
  EXPECT_LT(spread, 1e-8);
}

TEST(Admm, ResidualDefinition) {
  // theta is the squared jump of y between iterations; after convergence
  // one more iteration changes v by far less than 10 sqrt(tolerance).
  std::mt19937_64 rng(12);
  const Problem p = subadmm::testing::random_problem(rng);
  SolverConfig cfg;
  cfg.tolerance = 1e-12;
  cfg.max_iters = 200000;
  SubAdmmSolver s(p.dynamics, p.constraints, cfg);
  const Solution sol = s.solve();
  ASSERT_TRUE(sol.report.converged);
  std::vector<VecX> y_before;
  for (std::size_t i = 0; i < p.dynamics.size(); ++i) y_before.push_back(s.y(static_cast<int>(i)));
  s.update_constraints();
  s.update_duals();
  s.update_velocities();
  const Real theta = s.residual();
  Real manual = 0.0;
  for (std::size_t i = 0; i < p.dynamics.size(); ++i)
    if (s.beta(static_cast<int>(i))) manual += (s.y(static_cast<int>(i)) - y_before[i]).squaredNorm();
  EXPECT_NEAR(theta, manual, 1e-12 * (1.0 + manual));
  const VecX dv = subadmm::testing::stack(s.velocities()) - subadmm::testing::stack(sol.velocities);
  EXPECT_LT(dv.norm(), 10.0 * std::sqrt(cfg.tolerance));
}

TEST(Admm, TieIdentityAfterEveryIteration) {
  std::mt19937_64 rng(13);
  const Problem p = subadmm::testing::random_problem(rng);
  SubAdmmSolver s(p.dynamics, p.constraints, SolverConfig{});
  for (int l = 0; l < 5; ++l) {
    s.update_velocities();
    for (std::size_t i = 0; i < p.dynamics.size(); ++i) {
      const int k = static_cast<int>(i);
      if (!s.beta(k)) continue;
      const VecX expect = *s.beta(k) * (s.stacked_jacobian(k) * s.velocities()[i]) + s.u(k);
      EXPECT_LT((s.y(k) - expect).norm(), 1e-12 * (1.0 + expect.norm()));
    }
    s.update_constraints();
    s.update_duals();
  }
}

TEST(Admm, FixedPointExactnessOnRandomScenes) {
  std::mt19937_64 rng(14);
  for (int n = 0; n < 25; ++n) {
    const Problem p = subadmm::testing::random_problem(rng);
    SolverConfig cfg;
    cfg.tolerance = 1e-24;
    cfg.max_iters = 500000;
    SubAdmmSolver s(p.dynamics, p.constraints, cfg);
    const Solution sol = s.solve();
    ASSERT_TRUE(sol.report.converged) << "scene " << n;
    const auto d = subadmm::testing::dense_system(p);
    const VecX v = subadmm::testing::stack(sol.velocities);
    const VecX lambda = subadmm::testing::stack(sol.impulses);
    EXPECT_LE(subadmm::testing::dynamics_residual(d, v, lambda).norm(), 1e-8 * (1.0 + d.b.norm()))
        << "scene " << n;
    EXPECT_LE(sol.report.errors.total, 1e-8) << "scene " << n;
  }
}

TEST(Admm, MatchesActiveSetEnumeration) {
  std::mt19937_64 rng(15);
  subadmm::testing::ProblemOptions opt;
  opt.max_contacts = 2;
  opt.max_inequalities = 2;
  opt.max_constraints = 4;
  int compared = 0;
  for (int n = 0; n < 20; ++n) {
    const Problem p = subadmm::testing::random_problem(rng, opt);
    const auto oracle = subadmm::testing::enumerate_active_sets(p);
    ASSERT_TRUE(oracle.has_value()) << "scene " << n;
    SubAdmmSolver s(p.dynamics, p.constraints, tight(500000));
    const Solution sol = s.solve();
    const VecX v = subadmm::testing::stack(sol.velocities);
    EXPECT_LE((v - *oracle).norm(), 1e-8 * (1.0 + oracle->norm())) << "scene " << n;
    ++compared;
  }
  EXPECT_EQ(compared, 20);
}

TEST(Admm, WarmStartReusesImpulses) {
  ConstraintSpec h;
  h.id = 42;
  h.kind = ConstraintKind::hard_inequality;
  h.error = VecX::Zero(1);
  h.blocks.push_back({0, 0, MatX::Ones(1, 1)});
  SolverConfig cfg = tight();
  const Solution cold = SubAdmmSolver({one_dof(2.0, -0.0981)}, {h}, cfg).solve();
  WarmStartCache cache;
  update_warm_start(cache, {h}, cold.impulses);
  cfg.warm_start = true;
  const Solution warm = SubAdmmSolver({one_dof(2.0, -0.0981)}, {h}, cfg, &cache).solve();
  EXPECT_LT(warm.report.iterations, cold.report.iterations);
  EXPECT_NEAR(warm.impulses[0](0), 0.0981, 1e-12);
}

TEST(Admm, FixedIterationsIgnoresTolerance) {
  ConstraintSpec h;
  h.id = 1;
  h.kind = ConstraintKind::hard_inequality;
  h.error = VecX::Zero(1);
  h.blocks.push_back({0, 0, MatX::Ones(1, 1)});
  SolverConfig cfg;
  cfg.fixed_iterations = true;
  cfg.max_iters = 37;
  const Solution sol = SubAdmmSolver({one_dof(2.0, -0.0981)}, {h}, cfg).solve();
  EXPECT_EQ(sol.report.iterations, 37);
  EXPECT_TRUE(sol.report.hit_iteration_limit);
}

TEST(Admm, ConfigValidation) {
  SolverConfig c;
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), ConfigurationError);
  c = SolverConfig{};
  c.tolerance = 0.0;
  EXPECT_THROW(c.validate(), ConfigurationError);
  c = SolverConfig{};
  c.beta_override = std::vector<Real>{-1.0};
  EXPECT_THROW(c.validate(), ConfigurationError);
}

TEST(Admm, NanInputAborts) {
  ConstraintSpec h;
  h.id = 1;
  h.kind = ConstraintKind::hard_inequality;
  h.error = VecX::Constant(1, std::numeric_limits<Real>::quiet_NaN());
  h.blocks.push_back({0, 0, MatX::Ones(1, 1)});
  SubAdmmSolver s({one_dof(2.0, 0.0)}, {h}, SolverConfig{});
  EXPECT_THROW(s.solve(), SolverAbort);
}

TEST(DivergenceGuard, SteadyGrowth) {
  std::vector<Real> h;
  for (int i = 0; i < 12; ++i) h.push_back(std::pow(10.0, i));
  EXPECT_TRUE(steadily_growing(h));
  h.back() = h[h.size() - 2] * 0.5;
  EXPECT_FALSE(steadily_growing(h));
  // A single jump followed by decay is not divergence.
  std::vector<Real> jump{1e-14, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12, 1e-13, 1e-14, 1e-15, 1e-16};
  EXPECT_FALSE(steadily_growing(jump));
}

TEST(Determinism, ThetaHistoryIndependentOfThreads) {
  std::mt19937_64 rng(16);
  const Problem p = subadmm::testing::random_problem(rng);
  SolverConfig cfg;
  cfg.fixed_iterations = true;
  cfg.max_iters = 200;
  cfg.threads = 1;
  const Solution a = SubAdmmSolver(p.dynamics, p.constraints, cfg).solve();
  cfg.threads = 4;
  const Solution b = SubAdmmSolver(p.dynamics, p.constraints, cfg).solve();
  EXPECT_EQ(a.report.theta, b.report.theta);
  EXPECT_EQ(subadmm::testing::stack(a.velocities), subadmm::testing::stack(b.velocities));
}

TEST(SolveStep, EmptyWorldNoOp) {
  World w;
  w.finalize();
  const StepResult r = solve_step(w, {}, SolverConfig{});
  EXPECT_TRUE(r.velocities.empty());
  EXPECT_EQ(w.step_index, 1);
}
