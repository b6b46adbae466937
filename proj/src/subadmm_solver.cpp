#include <subadmm/subadmm_solver.hpp>
#include <subadmm/local_solve.hpp>
#include <subadmm/parallel.hpp>

#include <chrono>
#include <cmath>
#include <string>

namespace subadmm {

namespace {

using Clock = std::chrono::steady_clock;

Real elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<Real, std::milli>(Clock::now() - since).count();
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iters < 1) throw ConfigurationError("max_iters must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigurationError("tolerance must be > 0");
  if (!(beta_scale > 0.0)) throw ConfigurationError("beta scale must be > 0");
  if (beta_override)
    for (Real b : *beta_override)
      if (!(b > 0.0)) throw ConfigurationError("beta overrides must be > 0");
  if (!(pj_relaxation > 0.0) || pj_relaxation > 1.0)
    throw ConfigurationError("PJ relaxation must lie in (0, 1]");
}

bool steadily_growing(const std::vector<Real>& h) {
  const std::size_t n = h.size();
  if (n <= 10 || !(h[n - 1] > 1e6 * h[n - 11])) return false;
  for (std::size_t k = n - 10; k < n; ++k)
    if (!(h[k] > h[k - 1])) return false;
  return true;
}

std::optional<Real> compute_beta(const MatX& A, const MatX& jc) {
  if (jc.rows() == 0) return std::nullopt;
  const Real jtj = jc.squaredNorm();  // Tr(J^T J)
  if (!(jtj > 0.0)) throw DegenerateConstraintError("constraint rows with an all-zero Jacobian");
  return A.trace() / jtj;
}

Eigen::LLT<MatX> factor_subsystem(const MatX& A, const MatX& jc, Real beta) {
  if (!(beta > 0.0)) throw UsageError("factor_subsystem: beta must be > 0");
  MatX k = A;
  if (jc.rows() > 0) k.noalias() += beta * jc.transpose() * jc;
  Eigen::LLT<MatX> llt(k);
  if (llt.info() != Eigen::Success)
    throw ConfigurationError("subsystem matrix is not positive definite (assembly bug?)");
  return llt;
}

VecX subsystem_solve(const Eigen::LLT<MatX>& factor, const VecX& b, const MatX& jc, Real beta,
                     const VecX& z, const VecX& u) {
  if (b.size() != factor.rows() || jc.cols() != b.size() || z.size() != jc.rows() ||
      u.size() != jc.rows())
    throw UsageError("subsystem_solve: dimension mismatch");
  VecX rhs = b;
  rhs.noalias() += jc.transpose() * (beta * z - u);
  return factor.solve(rhs);
}

SubAdmmSolver::SubAdmmSolver(std::vector<SubsystemDynamics> dynamics,
                             std::vector<ConstraintSpec> constraints, const SolverConfig& config,
                             const WarmStartCache* warm)
    : constraints_(std::move(constraints)), config_(config) {
  config_.validate();
  if (config_.beta_override && config_.beta_override->size() != dynamics.size())
    throw ConfigurationError("beta override needs one value per subsystem");
  const int n_sub = static_cast<int>(dynamics.size());
  subs_.resize(dynamics.size());
  for (int i = 0; i < n_sub; ++i) {
    subs_[i].dyn = std::move(dynamics[i]);
    const Index n = subs_[i].dyn.A.rows();
    if (subs_[i].dyn.A.cols() != n || subs_[i].dyn.b.size() != n || subs_[i].dyn.v_prev.size() != n)
      throw UsageError("subsystem " + std::to_string(i) + ": inconsistent dynamics dimensions");
  }

  // Row allocation: intra rows first, then coupling rows.
  slots_.resize(constraints_.size());
  std::vector<Index> rows_of(subs_.size(), 0);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < constraints_.size(); ++j) {
      const ConstraintSpec& c = constraints_[j];
      const auto parts = c.participants();
      if ((parts.size() == 1) != (pass == 0)) continue;
      if (pass == 0) c.validate();
      for (int i : parts) {
        if (i < 0 || i >= n_sub) throw UsageError("constraint references unknown subsystem");
        slots_[j].participants.push_back({i, rows_of[i]});
        rows_of[i] += c.rows();
      }
    }
    if (pass == 0)
      for (int i = 0; i < n_sub; ++i) subs_[i].intra_rows = rows_of[i];
  }
  for (std::size_t j = 0; j < constraints_.size(); ++j)
    if (slots_[j].participants.size() > 1) constraints_[j].validate();

  for (int i = 0; i < n_sub; ++i) {
    SubState& s = subs_[i];
    s.jc = MatX::Zero(rows_of[i], s.dyn.A.rows());
  }
  for (std::size_t j = 0; j < constraints_.size(); ++j) {
    const ConstraintSpec& c = constraints_[j];
    for (const auto& p : slots_[j].participants)
      for (const auto& blk : c.blocks)
        if (blk.subsystem == p.subsystem)
          subs_[p.subsystem].jc.block(p.row, blk.col, c.rows(), blk.block.cols()) += blk.block;
  }

  const auto t0 = Clock::now();
  parallel_for(n_sub, [&](int i) {
    SubState& s = subs_[i];
    s.beta = compute_beta(s.dyn.A, s.jc);
    if (s.beta) {
      if (config_.beta_override) s.beta = (*config_.beta_override)[i];
      *s.beta *= config_.beta_scale;
      s.factor = factor_subsystem(s.dyn.A, s.jc, *s.beta);
      s.z = s.jc * s.dyn.v_prev;
      s.u = VecX::Zero(s.jc.rows());
      s.v = s.dyn.v_prev;
    } else {
      s.factor = factor_subsystem(s.dyn.A, s.jc, 1.0);
      // Solved once, in residual form around v_k so free drift is exact.
      VecX r = s.dyn.b;
      r.noalias() -= s.dyn.A * s.dyn.v_prev;
      s.v = s.dyn.v_prev + s.factor.solve(r);
      s.z.resize(0);
      s.u.resize(0);
    }
  }, config_.threads);
  factorization_ms_ = elapsed_ms(t0);

  if (warm != nullptr) {
    for (std::size_t j = 0; j < constraints_.size(); ++j) {
      const auto it = warm->find(constraints_[j].id);
      if (it == warm->end() || it->second.size() != constraints_[j].rows()) continue;
      for (const auto& p : slots_[j].participants)
        subs_[p.subsystem].u.segment(p.row, constraints_[j].rows()) = -it->second;
    }
  }
  for (auto& s : subs_) {
    if (s.beta) {
      s.y_prev = *s.beta * s.z + s.u;
      s.y = s.y_prev;
    }
  }
  for (std::size_t j = 0; j < constraints_.size(); ++j) {
    slots_[j].lambda = VecX::Zero(constraints_[j].rows());
    if (config_.strict_contact && constraints_[j].kind == ConstraintKind::contact) {
      Eigen::Vector2d st = constraints_[j].error.tail<2>();
      for (const auto& p : slots_[j].participants) st += subs_[p.subsystem].z.segment<2>(p.row + 1);
      slots_[j].slip = st.norm();
    }
  }
}

void SubAdmmSolver::update_velocities() {
  parallel_for(static_cast<int>(subs_.size()), [&](int i) {
    SubState& s = subs_[i];
    if (!s.beta) return;
    const Real beta = *s.beta;
    VecX rhs = s.dyn.b;
    rhs.noalias() += s.jc.transpose() * (beta * s.z - s.u);
    s.v = s.factor.solve(rhs);
    s.y = s.u;
    s.y.noalias() += beta * (s.jc * s.v);
  }, config_.threads);
}

Real SubAdmmSolver::residual() {
  std::vector<Real> parts(subs_.size(), 0.0);
  parallel_for(static_cast<int>(subs_.size()), [&](int i) {
    SubState& s = subs_[i];
    if (!s.beta) return;
    parts[i] = (s.y - s.y_prev).squaredNorm();
    s.y_prev = s.y;
  }, config_.threads);
  Real theta = 0.0;
  for (Real p : parts) theta += p;  // fixed order
  return theta;
}

void SubAdmmSolver::local_solve(std::size_t j) {
  const ConstraintSpec& c = constraints_[j];
  ConstraintSlot& slot = slots_[j];
  const Index rows = c.rows();
  VecX sum = VecX::Zero(rows);
  Real compliance = 0.0;
  for (const auto& p : slot.participants) {
    const SubState& s = subs_[p.subsystem];
    const Real inv = 1.0 / *s.beta;
    sum.noalias() += inv * s.y.segment(p.row, rows);
    compliance += inv;
  }
  switch (c.kind) {
    case ConstraintKind::soft:
      slot.lambda = soft_impulse(sum, compliance, c.error, c.stiffness, c.alpha);
      break;
    case ConstraintKind::hard_inequality:
      slot.lambda = hard_inequality_impulse(sum, compliance, c.error);
      break;
    case ConstraintKind::hard_equality:
      slot.lambda = hard_equality_impulse(sum, compliance, c.error);
      break;
    case ConstraintKind::contact: {
      Eigen::Vector3d e = c.error.head<3>();
      if (config_.strict_contact) e(0) += c.friction * slot.slip;
      slot.lambda = contact_impulse(sum.head<3>(), compliance, e, c.friction);
      break;
    }
  }
  Eigen::Vector2d st = Eigen::Vector2d::Zero();
  for (const auto& p : slot.participants) {
    SubState& s = subs_[p.subsystem];
    s.z.segment(p.row, rows) = (s.y.segment(p.row, rows) + slot.lambda) / *s.beta;
    if (c.kind == ConstraintKind::contact) st += s.z.segment<2>(p.row + 1);
  }
  if (config_.strict_contact && c.kind == ConstraintKind::contact)
    slot.slip = (st + c.error.tail<2>()).norm();
}

void SubAdmmSolver::update_constraints() {
  parallel_for(static_cast<int>(constraints_.size()), [&](int j) { local_solve(j); },
               config_.threads);
}

void SubAdmmSolver::update_duals() {
  parallel_for(static_cast<int>(subs_.size()), [&](int i) {
    SubState& s = subs_[i];
    if (!s.beta) return;
    s.u = s.y - *s.beta * s.z;
  }, config_.threads);
}

Real SubAdmmSolver::iterate() {
  update_velocities();
  const Real theta = residual();
  update_constraints();
  update_duals();
  return theta;
}

std::vector<VecX> SubAdmmSolver::impulses(Real* disagreement) const {
  std::vector<VecX> out(constraints_.size());
  Real spread = 0.0;
  for (std::size_t j = 0; j < constraints_.size(); ++j) {
    const auto& parts = slots_[j].participants;
    const Index rows = constraints_[j].rows();
    const auto& first = parts.front();
    out[j] = -subs_[first.subsystem].u.segment(first.row, rows);
    for (std::size_t k = 1; k < parts.size(); ++k) {
      const VecX other = -subs_[parts[k].subsystem].u.segment(parts[k].row, rows);
      spread = std::max(spread, (other - out[j]).cwiseAbs().maxCoeff());
    }
  }
  if (disagreement != nullptr) *disagreement = spread;
  return out;
}

std::vector<VecX> SubAdmmSolver::velocities() const {
  std::vector<VecX> out;
  out.reserve(subs_.size());
  for (const auto& s : subs_) out.push_back(s.v);
  return out;
}

Solution SubAdmmSolver::solve() {
  Solution sol;
  StepReport& rep = sol.report;
  rep.subsystems = subs_.size();
  for (const auto& slot : slots_)
    (slot.participants.size() == 1 ? rep.intra_constraints : rep.coupling_constraints)++;
  rep.timings.factorization_ms = factorization_ms_;

  const auto t0 = Clock::now();
  bool any_rows = false;
  for (const auto& s : subs_) any_rows = any_rows || s.beta.has_value();
  if (!any_rows) {
    rep.iterations = 1;
    rep.theta.push_back(0.0);
    rep.converged = true;
  } else {
    for (int l = 1;; ++l) {
      update_velocities();
      const Real theta = residual();
      rep.theta.push_back(theta);
      rep.iterations = l;
      if (config_.record_iteration_errors)
        rep.iteration_errors.push_back(
            constraint_error_report(constraints_, velocities(), impulses(), config_.strict_contact));
      if (!std::isfinite(theta))
        throw SolverAbort("non-finite residual at iteration " + std::to_string(l), l);
      if (l > 10 && steadily_growing(rep.theta))
        throw SolverAbort("residual diverged (x1e6 over 10 rising iterations) at iteration " +
                              std::to_string(l),
                          l);
      // The first residual compares against the initial guess, not a
      // constraint update, so it cannot certify convergence.
      if (!config_.fixed_iterations && l > 1 && theta < config_.tolerance) {
        rep.converged = true;
        break;
      }
      if (l >= config_.max_iters) {
        rep.hit_iteration_limit = true;
        break;
      }
      update_constraints();
      update_duals();
    }
  }
  rep.timings.iteration_ms = elapsed_ms(t0);

  sol.velocities = velocities();
  sol.impulses = impulses(&rep.impulse_disagreement);
  Real scale = 1.0;
  for (const auto& l : sol.impulses)
    if (l.size() > 0) scale = std::max(scale, l.cwiseAbs().maxCoeff());
  rep.impulse_mismatch = rep.converged && rep.impulse_disagreement > 1e-6 * scale;
  rep.errors = constraint_error_report(constraints_, sol.velocities, sol.impulses,
                                       config_.strict_contact);
  return sol;
}

}  // namespace subadmm
