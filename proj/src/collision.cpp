#include <subadmm/collision.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

namespace subadmm {

std::uint64_t contact_key(int body_a, int body_b, int feature) {
  const auto lo = static_cast<std::uint64_t>(std::min(body_a, body_b) + 1);
  const auto hi = static_cast<std::uint64_t>(std::max(body_a, body_b) + 1);
  return (std::uint64_t{1} << 63) | (lo << 38) | (hi << 12) |
         static_cast<std::uint64_t>(feature & 0xfff);
}

std::optional<ContactManifoldEntry> collide_sphere_sphere(const SphereGeom& a, const SphereGeom& b,
                                                          Real margin) {
  const Vec3 d = a.center - b.center;
  const Real dist = d.norm();
  if (dist >= a.radius + b.radius + margin) return std::nullopt;
  ContactManifoldEntry e;
  e.body_a = a.body;
  e.body_b = b.body;
  e.normal = dist > 0.0 ? Vec3(d / dist) : Vec3::UnitX();
  e.gap = dist - a.radius - b.radius;
  e.point = 0.5 * ((a.center - a.radius * e.normal) + (b.center + b.radius * e.normal));
  e.id = contact_key(a.body, b.body, 0);
  return e;
}

std::optional<ContactManifoldEntry> collide_sphere_halfspace(const SphereGeom& s, const Plane& plane,
                                                             int feature, Real margin) {
  const Real dist = plane.normal.dot(s.center) - plane.offset;
  const Real gap = dist - s.radius;
  if (gap >= margin) return std::nullopt;
  ContactManifoldEntry e;
  e.body_a = s.body;
  e.body_b = kEnvironment;
  e.normal = plane.normal;
  e.gap = gap;
  e.point = s.center - 0.5 * (s.radius + dist) * plane.normal;
  e.id = contact_key(s.body, kEnvironment, feature);
  return e;
}

std::vector<Plane> box_walls(const BoxInterior& box) {
  std::vector<Plane> walls;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 n = Vec3::Zero();
    n(axis) = 1.0;
    walls.push_back({n, box.center(axis) - box.half_extents(axis)});
    if (axis == 2 && box.open_top) continue;
    walls.push_back({-n, -(box.center(axis) + box.half_extents(axis))});
  }
  return walls;
}

std::vector<ContactManifoldEntry> collide_sphere_box_interior(const SphereGeom& s,
                                                              const BoxInterior& box, Real margin) {
  std::vector<ContactManifoldEntry> out;
  const auto walls = box_walls(box);
  for (std::size_t f = 0; f < walls.size(); ++f)
    if (auto e = collide_sphere_halfspace(s, walls[f], static_cast<int>(f), margin)) out.push_back(*e);
  return out;
}

std::vector<ContactManifoldEntry> collide_capsule_halfspace(const CapsuleGeom& c, const Plane& plane,
                                                            int feature_base, Real margin) {
  std::vector<ContactManifoldEntry> out;
  for (int end = 0; end < 2; ++end) {
    const Real sign = end == 0 ? -1.0 : 1.0;
    const SphereGeom cap{c.body, c.center + sign * c.half_length * c.axis, c.radius};
    if (auto e = collide_sphere_halfspace(cap, plane, feature_base + end, margin)) out.push_back(*e);
  }
  return out;
}

std::pair<Vec3, Vec3> tangent_frame(const Vec3& n) {
  Vec3 t1;
  if (std::abs(n.x()) >= 0.57735026918962576)
    t1 = Vec3(n.y(), -n.x(), 0.0);
  else
    t1 = Vec3(0.0, n.z(), -n.y());
  t1.normalize();
  return {t1, n.cross(t1)};
}

std::vector<std::pair<int, int>> broad_phase_pairs(const std::vector<SphereGeom>& spheres,
                                                   Real margin) {
  std::vector<std::pair<int, int>> pairs;
  if (spheres.size() < 2) return pairs;
  Real rmax = 0.0;
  for (const auto& s : spheres) rmax = std::max(rmax, s.radius);
  const Real cell = 2.0 * rmax + margin;
  if (!(cell > 0.0)) throw ConfigurationError("broad phase needs positive radii or margin");

  using Key = std::array<long, 3>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(k[0] * 73856093L ^ k[1] * 19349663L ^ k[2] * 83492791L);
    }
  };
  std::unordered_map<Key, std::vector<int>, KeyHash> grid;
  std::vector<Key> keys(spheres.size());
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    for (int a = 0; a < 3; ++a) keys[i][a] = static_cast<long>(std::floor(spheres[i].center(a) / cell));
    grid[keys[i]].push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find({keys[i][0] + dx, keys[i][1] + dy, keys[i][2] + dz});
          if (it == grid.end()) continue;
          for (int j : it->second) {
            if (j <= static_cast<int>(i)) continue;
            const Real reach = spheres[i].radius + spheres[j].radius + margin;
            if ((spheres[i].center - spheres[j].center).squaredNorm() < reach * reach)
              pairs.emplace_back(static_cast<int>(i), j);
          }
        }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

MatX point_jacobian(const Body& body, const Vec3& point, const MatX& directions) {
  MatX j(directions.rows(), body.dof());
  j.leftCols(3) = directions;
  if (body.kind == BodyKind::rigid) {
    const Vec3 r = point - body.position;
    for (Index k = 0; k < directions.rows(); ++k)
      j.block(k, 3, 1, 3) = r.cross(Vec3(directions.row(k).transpose())).transpose();
  }
  return j;
}

std::vector<BodyJacobian> contact_jacobian(const ContactManifoldEntry& entry, const World& world) {
  int a = entry.body_a;
  int b = entry.body_b;
  Vec3 n = entry.normal;
  if (a < 0 || (b >= 0 && b < a)) {
    std::swap(a, b);
    n = -n;
  }
  const auto [t1, t2] = tangent_frame(n);
  MatX frame(3, 3);
  frame.row(0) = n.transpose();
  frame.row(1) = t1.transpose();
  frame.row(2) = t2.transpose();
  std::vector<BodyJacobian> out;
  if (a >= 0) out.push_back({a, point_jacobian(world.bodies.at(a), entry.point, frame)});
  if (b >= 0) out.push_back({b, -point_jacobian(world.bodies.at(b), entry.point, frame)});
  return out;
}

ConstraintSpec make_contact_constraint(const World& world, const ContactManifoldEntry& entry,
                                       Real friction, const ContactErrorParams& params) {
  const auto jac = contact_jacobian(entry, world);
  VecX position = VecX::Zero(3);
  position(0) = make_contact_error(entry.gap, params, world.dt);
  ConstraintSpec c =
      assemble_constraint(world, ConstraintKind::contact, jac, position, VelocityLevel::end_of_step);
  // The step's position update uses the representative velocity, so it must
  // obey the same bound as the end-of-step velocity.
  Real kinematic = 0.0;
  for (const auto& bj : jac) {
    const Body& body = world.bodies[bj.body];
    if (body.kinematic) kinematic += bj.block.row(0).dot(body.velocity());
  }
  c.error(0) = std::min(c.error(0), position(0) + kinematic);
  c.id = entry.id;
  c.friction = friction;
  return c;
}

}  // namespace subadmm
