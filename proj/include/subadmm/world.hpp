#pragma once

// Generalized state: bodies, their grouping into subsystems, and global
// step parameters. Velocities are world-frame (maximal coordinates).

#include <subadmm/types.hpp>

#include <vector>

namespace subadmm {

enum class BodyKind { rigid, particle };

struct Body {
  BodyKind kind = BodyKind::rigid;
  Real mass = 1.0;
  Mat3 inertia_body = Mat3::Identity();  // ignored for particles
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec3 lin_vel = Vec3::Zero();
  Vec3 ang_vel = Vec3::Zero();
  // Prescribed motion: excluded from the unknowns, enters constraints only
  // through their error terms.
  bool kinematic = false;
  Vec3 force = Vec3::Zero();   // persistent external force, world frame
  Vec3 torque = Vec3::Zero();  // persistent external torque, world frame

  int dof() const { return kind == BodyKind::rigid ? 6 : 3; }
  Mat3 world_inertia() const {
    const Mat3 r = orientation.toRotationMatrix();
    return r * inertia_body * r.transpose();
  }
  // Linear velocity of a world-frame point attached to the body.
  Vec3 point_velocity(const Vec3& point) const {
    if (kind == BodyKind::particle) return lin_vel;
    return lin_vel + ang_vel.cross(point - position);
  }
  VecX velocity() const;
};

struct Subsystem {
  int id = 0;
  std::vector<int> bodies;     // ordered dynamic bodies
  std::vector<Index> offsets;  // column offset of each body's DOF block
  Index dim = 0;
};

class World {
 public:
  std::vector<Body> bodies;
  std::vector<Subsystem> subsystems;
  Vec3 gravity{0.0, 0.0, -9.81};
  Real dt = 0.01;
  long step_index = 0;
  Real time = 0.0;

  int add_body(const Body& body);
  // Appends a subsystem over the given dynamic bodies and returns its index.
  int add_subsystem(const std::vector<int>& body_ids);
  // One subsystem per dynamic body, in body order.
  void group_per_body();
  // Consecutive dynamic bodies in groups of `group_size`.
  void group_consecutive(int group_size);

  // Checks that every dynamic body belongs to exactly one subsystem and
  // rebuilds the body -> (subsystem, offset) maps. Throws UsageError or
  // ConfigurationError.
  void finalize();

  int subsystem_of(int body) const { return body_subsystem_.at(body); }
  Index offset_of(int body) const { return body_offset_.at(body); }
  Index total_dim() const;
  VecX subsystem_velocity(int subsystem) const;

 private:
  std::vector<int> body_subsystem_;
  std::vector<Index> body_offset_;
};

}  // namespace subadmm
