#include <subadmm/world.hpp>

#include <Eigen/Cholesky>

#include <string>

namespace subadmm {

VecX Body::velocity() const {
  VecX v(dof());
  v.head<3>() = lin_vel;
  if (kind == BodyKind::rigid) v.tail<3>() = ang_vel;
  return v;
}

int World::add_body(const Body& body) {
  bodies.push_back(body);
  return static_cast<int>(bodies.size()) - 1;
}

int World::add_subsystem(const std::vector<int>& body_ids) {
  Subsystem s;
  s.id = static_cast<int>(subsystems.size());
  s.bodies = body_ids;
  subsystems.push_back(std::move(s));
  return subsystems.back().id;
}

void World::group_per_body() {
  subsystems.clear();
  for (int b = 0; b < static_cast<int>(bodies.size()); ++b)
    if (!bodies[b].kinematic) add_subsystem({b});
}

void World::group_consecutive(int group_size) {
  if (group_size < 1) throw UsageError("group size must be >= 1");
  subsystems.clear();
  std::vector<int> group;
  for (int b = 0; b < static_cast<int>(bodies.size()); ++b) {
    if (bodies[b].kinematic) continue;
    group.push_back(b);
    if (static_cast<int>(group.size()) == group_size) {
      add_subsystem(group);
      group.clear();
    }
  }
  if (!group.empty()) add_subsystem(group);
}

void World::finalize() {
  if (!(dt > 0.0)) throw ConfigurationError("step size must be > 0");
  body_subsystem_.assign(bodies.size(), -1);
  body_offset_.assign(bodies.size(), -1);
  for (auto& sub : subsystems) {
    sub.offsets.clear();
    sub.dim = 0;
    for (int b : sub.bodies) {
      if (b < 0 || b >= static_cast<int>(bodies.size()))
        throw UsageError("subsystem " + std::to_string(sub.id) + " references unknown body");
      const Body& body = bodies[b];
      if (body.kinematic)
        throw UsageError("kinematic body " + std::to_string(b) + " cannot belong to a subsystem");
      if (body_subsystem_[b] != -1)
        throw UsageError("body " + std::to_string(b) + " belongs to more than one subsystem");
      if (!(body.mass > 0.0))
        throw ConfigurationError("body " + std::to_string(b) + " has non-positive mass");
      if (body.kind == BodyKind::rigid) {
        Eigen::LLT<Mat3> llt(body.inertia_body);
        if (llt.info() != Eigen::Success || !body.inertia_body.isApprox(body.inertia_body.transpose()))
          throw ConfigurationError("body " + std::to_string(b) + " inertia is not SPD");
      }
      body_subsystem_[b] = sub.id;
      body_offset_[b] = sub.dim;
      sub.offsets.push_back(sub.dim);
      sub.dim += body.dof();
    }
  }
  for (std::size_t b = 0; b < bodies.size(); ++b)
    if (!bodies[b].kinematic && body_subsystem_[b] == -1)
      throw UsageError("dynamic body " + std::to_string(b) + " belongs to no subsystem");
}

Index World::total_dim() const {
  Index n = 0;
  for (const auto& s : subsystems) n += s.dim;
  return n;
}

VecX World::subsystem_velocity(int subsystem) const {
  const Subsystem& sub = subsystems.at(subsystem);
  VecX v(sub.dim);
  for (std::size_t k = 0; k < sub.bodies.size(); ++k) {
    const Body& body = bodies[sub.bodies[k]];
    v.segment(sub.offsets[k], body.dof()) = body.velocity();
  }
  return v;
}

}  // namespace subadmm
