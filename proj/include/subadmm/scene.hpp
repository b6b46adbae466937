#pragma once

// A world plus everything needed to generate its constraints each step:
// body shapes, kinematic drivers, joints and static geometry.

#include <subadmm/collision.hpp>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace subadmm {

enum class ShapeType { none, sphere, capsule };

std::string_view to_string(ShapeType type);
ShapeType shape_type_from_string(std::string_view name);

// Capsules are segments along the body z axis.
struct Shape {
  ShapeType type = ShapeType::none;
  Real radius = 0.0;
  Real half_length = 0.0;
};

// origin + velocity * t + circle_radius * (cos(w t + phase), sin(w t + phase), 0),
// with z clamped from below by min_height; spin is a constant angular velocity.
struct KinematicPath {
  Vec3 origin = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Real circle_radius = 0.0;
  Real angular_rate = 0.0;
  Real phase = 0.0;
  Real min_height = -std::numeric_limits<Real>::infinity();
  Vec3 spin = Vec3::Zero();

  Vec3 position(Real t) const;
};

enum class JointKind {
  spring,  // 1 soft row along the anchor separation
  point,   // 3 hard-equality rows, anchors coincide
  weld,    // 6 hard-equality rows, anchors and orientations locked
  rod      // 6 soft rows: shear, shear, stretch, bend, bend, twist in A's frame
};

std::string_view to_string(JointKind kind);
JointKind joint_kind_from_string(std::string_view name);

// b = kEnvironment anchors to the world; local_b is then a world point.
struct Joint {
  JointKind kind = JointKind::point;
  int a = 0;
  int b = kEnvironment;
  Vec3 local_a = Vec3::Zero();
  Vec3 local_b = Vec3::Zero();
  Real rest_length = 0.0;  // spring
  Real stiffness = 0.0;    // spring, N/m
  Real damping = 0.0;      // spring, N s/m
  Vec6 rod_stiffness = Vec6::Zero();  // rod: N/m (x3) then N m/rad (x3)
  Real rod_damping = 0.0;             // rod: damping / stiffness ratio, s
  Quat rest_rotation = Quat::Identity();  // weld/rod: R_a = R_b * rest at rest
  Real erp = 0.2;                         // point/weld drift correction
};

struct ContactSettings {
  Real friction = 0.5;
  Real erp = 0.2;
  Real margin = kDefaultMargin;
  Real max_depenetration = 0.1;
  Real slop = 0.0;
  // Detection margin grows by speculative * (distance travelled in one step).
  Real speculative = 1.0;
  bool self_collision = true;
};

class Scene {
 public:
  std::string name = "scene";
  World world;
  std::vector<Shape> shapes;  // per body
  std::vector<std::optional<KinematicPath>> paths;  // per body
  std::vector<Joint> joints;
  std::vector<Plane> planes;
  std::vector<BoxInterior> containers;
  ContactSettings contact;

  int add_body(const Body& body, const Shape& shape = {},
               std::optional<KinematicPath> path = std::nullopt);

  // Sets each kinematic body's velocity to the secant of its path over
  // [t, t + dt].
  void drive_kinematics(Real t, Real dt);
  // Moves kinematic bodies to time t_next: onto their path when they have
  // one, otherwise along their current velocity.
  void advance_kinematics(Real t_next, Real dt);

  // Sorted by id. `threads` as in parallel_for.
  std::vector<ContactManifoldEntry> detect_contacts(int threads = 0) const;
  // Joints in declaration order (ids 1, 2, ...) followed by contacts.
  std::vector<ConstraintSpec> constraints(int threads = 0) const;
  // Largest penetration depth over current contacts (0 if none).
  Real max_penetration(int threads = 0) const;

  ConstraintSpec joint_constraint(std::size_t index) const;
  ContactErrorParams contact_error_params() const;
  void validate() const;
};

}  // namespace subadmm
