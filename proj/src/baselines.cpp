#include <subadmm/baselines.hpp>
#include <subadmm/local_solve.hpp>
#include <subadmm/parallel.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
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

DelassusSystem::DelassusSystem(const std::vector<SubsystemDynamics>& dynamics,
                               std::vector<ConstraintSpec> constraints)
    : constraints_(std::move(constraints)) {
  const int n_sub = static_cast<int>(dynamics.size());
  offsets_.resize(constraints_.size());
  for (std::size_t j = 0; j < constraints_.size(); ++j) {
    constraints_[j].validate();
    offsets_[j] = rows_;
    rows_ += constraints_[j].rows();
  }
  blocks_.resize(dynamics.size());
  membership_.resize(constraints_.size());
  for (std::size_t j = 0; j < constraints_.size(); ++j) {
    for (int i : constraints_[j].participants()) {
      if (i < 0 || i >= n_sub) throw UsageError("constraint references unknown subsystem");
      Block& blk = blocks_[i];
      const Index local = blk.constraints.empty()
                              ? 0
                              : blk.local_offset.back() + constraints_[blk.constraints.back()].rows();
      membership_[j].push_back({i, local});
      blk.constraints.push_back(static_cast<int>(j));
      blk.local_offset.push_back(local);
    }
  }
  parallel_for(n_sub, [&](int i) {
    Block& blk = blocks_[i];
    const SubsystemDynamics& dyn = dynamics[i];
    const Index n = dyn.A.rows();
    Index rows = 0;
    for (int j : blk.constraints) rows += constraints_[j].rows();
    blk.jacobian = MatX::Zero(rows, n);
    for (std::size_t k = 0; k < blk.constraints.size(); ++k) {
      const ConstraintSpec& c = constraints_[blk.constraints[k]];
      blk.jacobian.middleRows(blk.local_offset[k], c.rows()) = c.subsystem_jacobian(i, n);
    }
    Eigen::LLT<MatX> llt(dyn.A);
    if (llt.info() != Eigen::Success)
      throw ConfigurationError("subsystem " + std::to_string(i) + ": A is not positive definite");
    blk.free_velocity = llt.solve(dyn.b);
    blk.minv_jt = llt.solve(blk.jacobian.transpose());
    blk.local_g = blk.jacobian * blk.minv_jt;
  });

  c_ = VecX::Zero(rows_);
  diag_.resize(constraints_.size());
  for (std::size_t j = 0; j < constraints_.size(); ++j) {
    const Index r = constraints_[j].rows();
    c_.segment(offsets_[j], r) = constraints_[j].error;
    diag_[j] = MatX::Zero(r, r);
    for (const Member& m : membership_[j]) {
      const Block& blk = blocks_[m.block];
      c_.segment(offsets_[j], r) += blk.jacobian.middleRows(m.local_row, r) * blk.free_velocity;
      diag_[j] += blk.local_g.block(m.local_row, m.local_row, r, r);
    }
  }
}

MatX DelassusSystem::dense() const {
  MatX g = MatX::Zero(rows_, rows_);
  for (const Block& blk : blocks_) {
    for (std::size_t a = 0; a < blk.constraints.size(); ++a) {
      const Index ra = constraints_[blk.constraints[a]].rows();
      for (std::size_t b = 0; b < blk.constraints.size(); ++b) {
        const Index rb = constraints_[blk.constraints[b]].rows();
        g.block(offsets_[blk.constraints[a]], offsets_[blk.constraints[b]], ra, rb) +=
            blk.local_g.block(blk.local_offset[a], blk.local_offset[b], ra, rb);
      }
    }
  }
  return g;
}

VecX DelassusSystem::constraint_velocity(std::size_t j, const VecX& lambda) const {
  const Index r = constraints_[j].rows();
  VecX s = c_.segment(offsets_[j], r);
  for (const Member& m : membership_[j]) {
    const Block& blk = blocks_[m.block];
    for (std::size_t k = 0; k < blk.constraints.size(); ++k) {
      const int other = blk.constraints[k];
      const Index ro = constraints_[other].rows();
      s.noalias() += blk.local_g.block(m.local_row, blk.local_offset[k], r, ro) *
                     lambda.segment(offsets_[other], ro);
    }
  }
  return s;
}

VecX DelassusSystem::apply(const VecX& lambda) const {
  VecX out(rows_);
  for (std::size_t j = 0; j < constraints_.size(); ++j)
    out.segment(offsets_[j], constraints_[j].rows()) = constraint_velocity(j, lambda);
  return out;
}

std::vector<VecX> DelassusSystem::velocities(const VecX& lambda) const {
  std::vector<VecX> v(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& blk = blocks_[i];
    VecX local(blk.jacobian.rows());
    for (std::size_t k = 0; k < blk.constraints.size(); ++k) {
      const int j = blk.constraints[k];
      local.segment(blk.local_offset[k], constraints_[j].rows()) =
          lambda.segment(offsets_[j], constraints_[j].rows());
    }
    v[i] = blk.free_velocity + blk.minv_jt * local;
  }
  return v;
}

std::vector<VecX> DelassusSystem::split(const VecX& lambda) const {
  std::vector<VecX> out(constraints_.size());
  for (std::size_t j = 0; j < constraints_.size(); ++j)
    out[j] = lambda.segment(offsets_[j], constraints_[j].rows());
  return out;
}

DelassusSystem build_delassus(const std::vector<SubsystemDynamics>& dynamics,
                              const std::vector<ConstraintSpec>& constraints) {
  return DelassusSystem(dynamics, constraints);
}

VecX block_update(const ConstraintSpec& c, const MatX& diag, const VecX& r, const VecX& current,
                  bool strict_contact) {
  const Index rows = c.rows();
  switch (c.kind) {
    case ConstraintKind::hard_equality:
      return diag.completeOrthogonalDecomposition().solve(-r);
    case ConstraintKind::soft: {
      // lambda = -K (e + alpha (D lambda + r - e))
      const VecX ka = c.stiffness.cwiseProduct(c.alpha);
      MatX lhs = ka.asDiagonal() * diag;
      lhs.diagonal().array() += 1.0;
      const VecX rhs = -c.stiffness.cwiseProduct(c.error + c.alpha.cwiseProduct(r - c.error));
      return lhs.partialPivLu().solve(rhs);
    }
    case ConstraintKind::hard_inequality: {
      VecX lambda = current;
      for (int pass = 0; pass < (rows == 1 ? 1 : 50); ++pass) {
        Real change = 0.0;
        for (Index k = 0; k < rows; ++k) {
          const Real s = diag.row(k).dot(lambda) + r(k);
          const Real next = std::max(0.0, lambda(k) - s / diag(k, k));
          change = std::max(change, std::abs(next - lambda(k)));
          lambda(k) = next;
        }
        if (change == 0.0) break;
      }
      return lambda;
    }
    case ConstraintKind::contact: {
      // min 1/2 l^T D l + r^T l over the friction cone, by projected gradient.
      const Eigen::Matrix3d d = diag;
      const Real lmax = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(d, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .maxCoeff();
      const Real step = 1.0 / lmax;
      Eigen::Vector3d lambda = current;
      Eigen::Vector3d rr = r;
      for (int it = 0; it < 500; ++it) {
        Eigen::Vector3d s = d * lambda + rr;
        if (strict_contact) s(0) += c.friction * s.tail<2>().norm();
        const Eigen::Vector3d next = project_friction_cone(lambda - step * s, c.friction);
        const Real change = (next - lambda).norm();
        lambda = next;
        if (change <= 1e-15 * (1.0 + lambda.norm())) break;
      }
      return lambda;
    }
  }
  return current;
}

namespace {

bool usable_block(const MatX& diag) { return diag.diagonal().maxCoeff() > 1e-300; }

void guard(const std::vector<Real>& change, int sweep) {
  const Real last = change.back();
  if (!std::isfinite(last)) throw SolverAbort("non-finite impulse at sweep " + std::to_string(sweep), sweep);
  if (change.size() > 10 && steadily_growing(change))
    throw SolverAbort("sweep diverged at sweep " + std::to_string(sweep), sweep);
}

}  // namespace

SweepResult pgs_solve(const DelassusSystem& sys, const SweepOptions& options, const VecX* initial) {
  SweepResult res;
  res.lambda = initial != nullptr ? *initial : VecX::Zero(sys.rows());
  for (std::size_t j = 0; j < sys.constraint_count(); ++j)
    if (!usable_block(sys.diagonal_block(j))) ++res.skipped_rows;
  for (int sweep = 1; sweep <= options.sweeps; ++sweep) {
    Real change = 0.0;
    Real max_change = 0.0;
    for (std::size_t j = 0; j < sys.constraint_count(); ++j) {
      const MatX& d = sys.diagonal_block(j);
      if (!usable_block(d)) continue;
      const Index o = sys.offset(j);
      const Index rows = sys.constraint(j).rows();
      const VecX current = res.lambda.segment(o, rows);
      const VecX r = sys.constraint_velocity(j, res.lambda) - d * current;
      const VecX next = block_update(sys.constraint(j), d, r, current, options.strict_contact);
      change += (next - current).squaredNorm();
      max_change = std::max(max_change, (next - current).cwiseAbs().maxCoeff());
      res.lambda.segment(o, rows) = next;
    }
    res.change.push_back(change);
    res.sweeps = sweep;
    if (!std::isfinite(change)) throw SolverAbort("non-finite impulse in PGS", sweep);
    if (max_change < options.tolerance) break;
  }
  return res;
}

SweepResult pj_solve(const DelassusSystem& sys, const SweepOptions& options, const VecX* initial) {
  if (!(options.relaxation > 0.0) || options.relaxation > 1.0)
    throw ConfigurationError("PJ relaxation must lie in (0, 1]");
  SweepResult res;
  res.lambda = initial != nullptr ? *initial : VecX::Zero(sys.rows());
  for (std::size_t j = 0; j < sys.constraint_count(); ++j)
    if (!usable_block(sys.diagonal_block(j))) ++res.skipped_rows;
  const Real w = options.relaxation;
  VecX next = res.lambda;
  for (int sweep = 1; sweep <= options.sweeps; ++sweep) {
    parallel_for(static_cast<int>(sys.constraint_count()), [&](int j) {
      const MatX& d = sys.diagonal_block(j);
      if (!usable_block(d)) return;
      const Index o = sys.offset(j);
      const Index rows = sys.constraint(j).rows();
      const VecX current = res.lambda.segment(o, rows);
      const VecX r = sys.constraint_velocity(j, res.lambda) - d * current;
      const VecX target = block_update(sys.constraint(j), d, r, current, options.strict_contact);
      next.segment(o, rows) = (1.0 - w) * current + w * target;
    }, options.threads);
    const Real change = (next - res.lambda).squaredNorm();
    const Real max_change = sys.rows() > 0 ? (next - res.lambda).cwiseAbs().maxCoeff() : 0.0;
    res.lambda = next;
    res.change.push_back(change);
    res.sweeps = sweep;
    guard(res.change, sweep);
    if (max_change < options.tolerance) break;
  }
  return res;
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::subadmm: return "subadmm";
    case SolverKind::pgs: return "pgs";
    case SolverKind::pj: return "pj";
  }
  return "unknown";
}

SolverKind solver_kind_from_string(std::string_view name) {
  if (name == "subadmm") return SolverKind::subadmm;
  if (name == "pgs") return SolverKind::pgs;
  if (name == "pj") return SolverKind::pj;
  throw ConfigurationError("unknown solver '" + std::string(name) + "' (expected subadmm, pgs or pj)");
}

Solution solve_baseline(SolverKind kind, const std::vector<SubsystemDynamics>& dynamics,
                        const std::vector<ConstraintSpec>& constraints, const SolverConfig& config,
                        const WarmStartCache* warm) {
  if (kind == SolverKind::subadmm) throw UsageError("solve_baseline: use SubAdmmSolver");
  config.validate();
  Solution sol;
  const auto t0 = Clock::now();
  const DelassusSystem sys(dynamics, constraints);
  sol.report.timings.factorization_ms = elapsed_ms(t0);

  VecX initial = VecX::Zero(sys.rows());
  if (warm != nullptr)
    for (std::size_t j = 0; j < constraints.size(); ++j) {
      const auto it = warm->find(constraints[j].id);
      if (it != warm->end() && it->second.size() == constraints[j].rows())
        initial.segment(sys.offset(j), constraints[j].rows()) = it->second;
    }

  SweepOptions opts;
  opts.sweeps = config.max_iters;
  opts.strict_contact = config.strict_contact;
  opts.relaxation = config.pj_relaxation;
  opts.threads = config.threads;
  // Tolerance applies to the impulse change; theta-equivalent units.
  opts.tolerance = config.fixed_iterations ? 0.0 : std::sqrt(config.tolerance);
  const auto t1 = Clock::now();
  const SweepResult res = kind == SolverKind::pgs ? pgs_solve(sys, opts, &initial)
                                                  : pj_solve(sys, opts, &initial);
  sol.report.timings.iteration_ms = elapsed_ms(t1);
  sol.report.iterations = res.sweeps;
  sol.report.theta = res.change;
  sol.report.converged = res.sweeps < opts.sweeps || (!res.change.empty() && res.change.back() < config.tolerance);
  sol.report.hit_iteration_limit = !sol.report.converged;
  sol.report.subsystems = dynamics.size();
  for (const auto& c : constraints)
    (c.is_intra() ? sol.report.intra_constraints : sol.report.coupling_constraints)++;
  sol.velocities = sys.velocities(res.lambda);
  sol.impulses = sys.split(res.lambda);
  sol.report.errors =
      constraint_error_report(constraints, sol.velocities, sol.impulses, config.strict_contact);
  return sol;
}

}  // namespace subadmm
