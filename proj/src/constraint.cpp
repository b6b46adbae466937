#include <subadmm/constraint.hpp>
#include <subadmm/local_solve.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace subadmm {

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::soft: return "soft";
    case ConstraintKind::hard_inequality: return "hard_inequality";
    case ConstraintKind::hard_equality: return "hard_equality";
    case ConstraintKind::contact: return "contact";
  }
  return "unknown";
}

std::vector<int> ConstraintSpec::participants() const {
  std::vector<int> ids;
  for (const auto& b : blocks) ids.push_back(b.subsystem);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void ConstraintSpec::validate() const {
  const std::string tag = "constraint " + std::to_string(id) + ": ";
  if (rows() < 1) throw UsageError(tag + "no rows");
  if (blocks.empty()) throw UsageError(tag + "no participating subsystem");
  for (const auto& b : blocks)
    if (b.block.rows() != rows()) throw UsageError(tag + "Jacobian block row count mismatch");
  switch (kind) {
    case ConstraintKind::soft:
      if (stiffness.size() != rows() || alpha.size() != rows())
        throw UsageError(tag + "soft rows need stiffness and alpha per row");
      if ((stiffness.array() < 0.0).any()) throw ConfigurationError(tag + "soft stiffness must be >= 0");
      if (!(alpha.array() > 0.0).all()) throw ConfigurationError(tag + "soft alpha must be > 0");
      break;
    case ConstraintKind::contact:
      if (rows() != 3) throw UsageError(tag + "contact needs 3 rows");
      if (friction < 0.0) throw ConfigurationError(tag + "friction coefficient must be >= 0");
      break;
    default: break;
  }
}

MatX ConstraintSpec::subsystem_jacobian(int subsystem, Index dim) const {
  MatX j = MatX::Zero(rows(), dim);
  for (const auto& b : blocks) {
    if (b.subsystem != subsystem) continue;
    if (b.col < 0 || b.col + b.block.cols() > dim) throw UsageError("Jacobian block out of range");
    j.middleCols(b.col, b.block.cols()) += b.block;
  }
  return j;
}

VecX ConstraintSpec::apply(const std::vector<VecX>& v) const {
  VecX out = VecX::Zero(rows());
  for (const auto& b : blocks) out.noalias() += b.block * v.at(b.subsystem).segment(b.col, b.block.cols());
  return out;
}

ConstraintSpec assemble_constraint(const World& world, ConstraintKind kind,
                                   std::span<const BodyJacobian> jacobians,
                                   const VecX& position_term, VelocityLevel level) {
  ConstraintSpec c;
  c.kind = kind;
  const Index rows = position_term.size();
  VecX kinematic = VecX::Zero(rows);
  VecX current = VecX::Zero(rows);
  for (const auto& bj : jacobians) {
    const Body& body = world.bodies.at(bj.body);
    if (bj.block.rows() != rows || bj.block.cols() != body.dof())
      throw UsageError("body Jacobian has wrong shape");
    if (body.kinematic) {
      kinematic.noalias() += bj.block * body.velocity();
      continue;
    }
    current.noalias() += bj.block * body.velocity();
    c.blocks.push_back({world.subsystem_of(bj.body), world.offset_of(bj.body), bj.block});
  }
  if (level == VelocityLevel::representative)
    c.error = position_term + kinematic;
  else
    c.error = 0.5 * (position_term + kinematic - current);
  return c;
}

SoftGains soft_gains(Real spring, Real damper, Real dt) {
  if (spring < 0.0 || damper < 0.0) throw ConfigurationError("spring/damper must be >= 0");
  if (!(dt > 0.0)) throw ConfigurationError("step size must be > 0");
  if (spring == 0.0) {
    // Pure damper: lambda = -t k_d J v, expressed with alpha = 1.
    return {dt * damper, 1.0};
  }
  return {dt * dt * spring, 1.0 + damper / (dt * spring)};
}

Real make_contact_error(Real gap, const ContactErrorParams& params, Real dt, Real kinematic_bias) {
  if (!(dt > 0.0)) throw ConfigurationError("step size must be > 0");
  if (params.erp < 0.0 || params.erp > 1.0) throw ConfigurationError("erp must lie in [0, 1]");
  if (gap >= 0.0) return gap / dt + kinematic_bias;
  const Real depth = std::max(0.0, -gap - params.slop);
  return -std::min(params.erp * depth / dt, params.max_depenetration) + kinematic_bias;
}

Real constraint_residual_squared(const ConstraintSpec& c, const VecX& s, const VecX& lambda,
                                 bool strict_contact) {
  Real acc = 0.0;
  switch (c.kind) {
    case ConstraintKind::soft:
      for (Index r = 0; r < c.rows(); ++r) {
        const Real jv = s(r) - c.error(r);
        const Real res = lambda(r) + c.stiffness(r) * (c.error(r) + c.alpha(r) * jv);
        acc += res * res;
      }
      break;
    case ConstraintKind::hard_inequality:
      for (Index r = 0; r < c.rows(); ++r) {
        const Real phi = fischer_burmeister(lambda(r), s(r));
        acc += phi * phi;
      }
      break;
    case ConstraintKind::hard_equality: acc += s.squaredNorm(); break;
    case ConstraintKind::contact: {
      const Real mu = c.friction;
      const Eigen::Vector2d st = s.tail<2>();
      const Eigen::Vector2d lt = lambda.tail<2>();
      const Real slip = st.norm();
      const Real gap = strict_contact ? s(0) : s(0) - mu * slip;
      const Real normal = fischer_burmeister(lambda(0), gap);
      const Real cone = fischer_burmeister(slip, mu * lambda(0) - lt.norm());
      const Real dissipation = (slip * lt + mu * lambda(0) * st).norm();
      acc += normal * normal + cone * cone + dissipation * dissipation;
      break;
    }
  }
  return acc;
}

ConstraintErrors constraint_error_report(std::span<const ConstraintSpec> constraints,
                                         const std::vector<VecX>& v,
                                         const std::vector<VecX>& lambda, bool strict_contact) {
  if (lambda.size() != constraints.size()) throw UsageError("error report: impulse count mismatch");
  ConstraintErrors out;
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    const ConstraintSpec& c = constraints[j];
    const VecX s = c.apply(v) + c.error;
    const Real sq = constraint_residual_squared(c, s, lambda[j], strict_contact);
    switch (c.kind) {
      case ConstraintKind::soft: out.soft += sq; break;
      case ConstraintKind::hard_inequality: out.hard_inequality += sq; break;
      case ConstraintKind::hard_equality: out.hard_equality += sq; break;
      case ConstraintKind::contact: out.contact += sq; break;
    }
  }
  out.total = std::sqrt(out.soft + out.hard_inequality + out.hard_equality + out.contact);
  out.soft = std::sqrt(out.soft);
  out.hard_inequality = std::sqrt(out.hard_inequality);
  out.hard_equality = std::sqrt(out.hard_equality);
  out.contact = std::sqrt(out.contact);
  return out;
}

}  // namespace subadmm
