#pragma once

// Narrow phase for the primitive shapes used by the scenarios, plus a
// uniform-grid broad phase for equal-radius sphere sets.

#include <subadmm/constraint.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace subadmm {

inline constexpr int kEnvironment = -1;
inline constexpr Real kDefaultMargin = 1e-3;

struct SphereGeom {
  int body = kEnvironment;
  Vec3 center = Vec3::Zero();
  Real radius = 0.0;
};

// Segment of half-length `half_length` along `axis` through `center`,
// swept by `radius`.
struct CapsuleGeom {
  int body = kEnvironment;
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  Real half_length = 0.0;
  Real radius = 0.0;
};

// Free space is {x : normal . x >= offset}.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  Real offset = 0.0;
};

// Axis-aligned container; spheres are kept inside.
struct BoxInterior {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
  bool open_top = false;
};

struct ContactManifoldEntry {
  int body_a = kEnvironment;
  int body_b = kEnvironment;  // kEnvironment for static geometry
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // from B to A, unit
  Real gap = 0.0;               // negative when penetrating
  std::uint64_t id = 0;         // stable while the pair/feature persists
};

// Persistent key for (pair, feature); symmetric in the body order.
std::uint64_t contact_key(int body_a, int body_b, int feature);

std::optional<ContactManifoldEntry> collide_sphere_sphere(const SphereGeom& a, const SphereGeom& b,
                                                          Real margin = kDefaultMargin);
std::optional<ContactManifoldEntry> collide_sphere_halfspace(const SphereGeom& s, const Plane& plane,
                                                             int feature = 0,
                                                             Real margin = kDefaultMargin);
std::vector<ContactManifoldEntry> collide_sphere_box_interior(const SphereGeom& s,
                                                              const BoxInterior& box,
                                                              Real margin = kDefaultMargin);
std::vector<ContactManifoldEntry> collide_capsule_halfspace(const CapsuleGeom& c, const Plane& plane,
                                                            int feature_base = 0,
                                                            Real margin = kDefaultMargin);

// Inward-facing walls of the container (5 when open at the top).
std::vector<Plane> box_walls(const BoxInterior& box);

// Orthonormal (t1, t2) completing n, chosen from n's largest component so
// the frame is reproducible.
std::pair<Vec3, Vec3> tangent_frame(const Vec3& n);

// Candidate sphere pairs (i < j, indices into `spheres`) whose centers lie
// within reach, from a uniform hash with cell size 2 * max radius + margin.
// Output is sorted.
std::vector<std::pair<int, int>> broad_phase_pairs(const std::vector<SphereGeom>& spheres,
                                                   Real margin = kDefaultMargin);

// Contact rows (normal, t1, t2) of the relative point velocity of A with
// respect to B; positive normal velocity separates. The pair is put in
// canonical order (lower body id first) before the frame is built, so the
// result does not depend on the entry's orientation.
std::vector<BodyJacobian> contact_jacobian(const ContactManifoldEntry& entry, const World& world);

// Contact constraint for an entry. The tangent rows and the normal row act
// on the end-of-step velocity (no restitution); while the pair is still
// separated the normal row is additionally bounded so that the midpoint
// displacement t * v cannot close more than the gap.
ConstraintSpec make_contact_constraint(const World& world, const ContactManifoldEntry& entry,
                                       Real friction, const ContactErrorParams& params);

// Rows of the point velocity of `body` at `point` along each row of
// `directions` (k x 3).
MatX point_jacobian(const Body& body, const Vec3& point, const MatX& directions);

}  // namespace subadmm
