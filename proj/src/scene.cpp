#include <subadmm/dynamics.hpp>
#include <subadmm/parallel.hpp>
#include <subadmm/scene.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace subadmm {

std::string_view to_string(ShapeType type) {
  switch (type) {
    case ShapeType::none: return "none";
    case ShapeType::sphere: return "sphere";
    case ShapeType::capsule: return "capsule";
  }
  return "none";
}

ShapeType shape_type_from_string(std::string_view name) {
  if (name == "none") return ShapeType::none;
  if (name == "sphere") return ShapeType::sphere;
  if (name == "capsule") return ShapeType::capsule;
  throw UsageError("unknown shape '" + std::string(name) + "'");
}

std::string_view to_string(JointKind kind) {
  switch (kind) {
    case JointKind::spring: return "spring";
    case JointKind::point: return "point";
    case JointKind::weld: return "weld";
    case JointKind::rod: return "rod";
  }
  return "point";
}

JointKind joint_kind_from_string(std::string_view name) {
  if (name == "spring") return JointKind::spring;
  if (name == "point") return JointKind::point;
  if (name == "weld") return JointKind::weld;
  if (name == "rod") return JointKind::rod;
  throw UsageError("unknown joint kind '" + std::string(name) + "'");
}

Vec3 KinematicPath::position(Real t) const {
  Vec3 p = origin + velocity * t;
  if (circle_radius != 0.0) {
    const Real a = angular_rate * t + phase;
    p.x() += circle_radius * std::cos(a);
    p.y() += circle_radius * std::sin(a);
  }
  p.z() = std::max(p.z(), min_height);
  return p;
}

int Scene::add_body(const Body& body, const Shape& shape, std::optional<KinematicPath> path) {
  Body b = body;
  if (path) {
    b.kinematic = true;
    b.position = path->position(world.time);
  }
  shapes.push_back(shape);
  paths.push_back(std::move(path));
  return world.add_body(b);
}

void Scene::drive_kinematics(Real t, Real dt) {
  for (std::size_t i = 0; i < world.bodies.size(); ++i) {
    Body& body = world.bodies[i];
    if (!body.kinematic || !paths[i]) continue;
    body.lin_vel = (paths[i]->position(t + dt) - paths[i]->position(t)) / dt;
    body.ang_vel = paths[i]->spin;
  }
}

void Scene::advance_kinematics(Real t_next, Real dt) {
  for (std::size_t i = 0; i < world.bodies.size(); ++i) {
    Body& body = world.bodies[i];
    if (!body.kinematic) continue;
    if (paths[i])
      body.position = paths[i]->position(t_next);
    else
      body.position += dt * body.lin_vel;
    if (body.kind == BodyKind::rigid)
      body.orientation = integrate_orientation(body.orientation, body.ang_vel, dt);
  }
}

ContactErrorParams Scene::contact_error_params() const {
  return {contact.erp, contact.max_depenetration, contact.slop};
}

void Scene::validate() const {
  const std::size_t n = world.bodies.size();
  if (shapes.size() != n || paths.size() != n)
    throw UsageError("scene shapes/paths must have one entry per body");
  for (std::size_t i = 0; i < n; ++i) {
    const Shape& s = shapes[i];
    if (s.type != ShapeType::none && !(s.radius > 0.0))
      throw ConfigurationError("body " + std::to_string(i) + " shape radius must be > 0");
    if (s.type == ShapeType::capsule && s.half_length < 0.0)
      throw ConfigurationError("body " + std::to_string(i) + " capsule half length must be >= 0");
    if (paths[i] && !world.bodies[i].kinematic)
      throw UsageError("body " + std::to_string(i) + " has a path but is not kinematic");
  }
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const Joint& jt = joints[j];
    const auto bad = [&](int b) { return b < 0 || b >= static_cast<int>(n); };
    if (bad(jt.a) || (jt.b != kEnvironment && bad(jt.b)) || jt.a == jt.b)
      throw UsageError("joint " + std::to_string(j) + " references invalid bodies");
    if ((jt.kind == JointKind::weld || jt.kind == JointKind::rod) &&
        (world.bodies[jt.a].kind != BodyKind::rigid ||
         (jt.b != kEnvironment && world.bodies[jt.b].kind != BodyKind::rigid)))
      throw UsageError("joint " + std::to_string(j) + " needs rigid bodies");
    if (jt.kind == JointKind::spring && (jt.stiffness < 0.0 || jt.damping < 0.0 || jt.rest_length < 0.0))
      throw ConfigurationError("joint " + std::to_string(j) + " spring parameters must be >= 0");
    if (jt.kind == JointKind::rod && ((jt.rod_stiffness.array() < 0.0).any() || jt.rod_damping < 0.0))
      throw ConfigurationError("joint " + std::to_string(j) + " rod parameters must be >= 0");
  }
  if (contact.friction < 0.0) throw ConfigurationError("friction coefficient must be >= 0");
  if (contact.margin < 0.0 || contact.speculative < 0.0)
    throw ConfigurationError("contact margin must be >= 0");
}

namespace {

Vec3 rotation_vector(const Quat& q) {
  Quat u = q.normalized();
  if (u.w() < 0.0) u.coeffs() *= -1.0;
  const Eigen::AngleAxisd aa(u);
  return aa.angle() * aa.axis();
}

MatX angular_rows(const Body& body, const MatX& directions) {
  MatX j = MatX::Zero(directions.rows(), body.dof());
  j.rightCols(3) = directions;
  return j;
}

}  // namespace

ConstraintSpec Scene::joint_constraint(std::size_t index) const {
  const Joint& jt = joints.at(index);
  const Real dt = world.dt;
  const Body& A = world.bodies.at(jt.a);
  const Body* B = jt.b == kEnvironment ? nullptr : &world.bodies.at(jt.b);
  const Vec3 pa = A.position + A.orientation * jt.local_a;
  const Vec3 pb = B ? Vec3(B->position + B->orientation * jt.local_b) : jt.local_b;
  const Quat qb = B ? B->orientation : Quat::Identity();

  std::vector<BodyJacobian> jac;
  const auto push_point = [&](const MatX& dirs) {
    jac.push_back({jt.a, point_jacobian(A, pa, dirs)});
    if (B) jac.push_back({jt.b, -point_jacobian(*B, pb, dirs)});
  };

  ConstraintSpec c;
  switch (jt.kind) {
    case JointKind::spring: {
      const Vec3 d = pa - pb;
      const Real len = d.norm();
      const Vec3 n = len > 0.0 ? Vec3(d / len) : Vec3::UnitX();
      push_point(n.transpose());
      VecX pos(1);
      pos(0) = (len - jt.rest_length) / dt;
      c = assemble_constraint(world, ConstraintKind::soft, jac, pos, VelocityLevel::representative);
      const SoftGains g = soft_gains(jt.stiffness, jt.damping, dt);
      c.stiffness = VecX::Constant(1, g.k);
      c.alpha = VecX::Constant(1, g.alpha);
      break;
    }
    case JointKind::point: {
      push_point(Mat3::Identity());
      const VecX pos = jt.erp * (pa - pb) / dt;
      c = assemble_constraint(world, ConstraintKind::hard_equality, jac, pos,
                              VelocityLevel::end_of_step);
      break;
    }
    case JointKind::weld: {
      MatX ja(6, 6), jb(6, 6);
      ja << point_jacobian(A, pa, Mat3::Identity()), angular_rows(A, Mat3::Identity());
      jac.push_back({jt.a, ja});
      if (B) {
        jb << -point_jacobian(*B, pb, Mat3::Identity()), -angular_rows(*B, Mat3::Identity());
        jac.push_back({jt.b, jb});
      }
      VecX pos(6);
      pos << pa - pb, rotation_vector(A.orientation * (qb * jt.rest_rotation).conjugate());
      pos *= jt.erp / dt;
      c = assemble_constraint(world, ConstraintKind::hard_equality, jac, pos,
                              VelocityLevel::end_of_step);
      break;
    }
    case JointKind::rod: {
      const MatX dirs = A.orientation.toRotationMatrix().transpose();
      MatX ja(6, 6), jb(6, 6);
      ja << point_jacobian(A, pa, dirs), angular_rows(A, dirs);
      jac.push_back({jt.a, ja});
      if (B) {
        jb << -point_jacobian(*B, pb, dirs), -angular_rows(*B, dirs);
        jac.push_back({jt.b, jb});
      }
      const Vec3 phi = rotation_vector(A.orientation * (qb * jt.rest_rotation).conjugate());
      VecX pos(6);
      pos << dirs * (pa - pb), dirs * phi;
      pos /= dt;
      c = assemble_constraint(world, ConstraintKind::soft, jac, pos, VelocityLevel::representative);
      c.stiffness.resize(6);
      c.alpha.resize(6);
      for (int r = 0; r < 6; ++r) {
        const Real k = jt.rod_stiffness(r);
        const SoftGains g = soft_gains(k, jt.rod_damping * k, dt);
        c.stiffness(r) = g.k;
        c.alpha(r) = g.alpha;
      }
      break;
    }
  }
  c.id = static_cast<std::uint64_t>(index) + 1;
  return c;
}

std::vector<ContactManifoldEntry> Scene::detect_contacts(int threads) const {
  const std::size_t n = world.bodies.size();
  const Real dt = world.dt;
  const Real g = world.gravity.norm();
  std::vector<Real> reach(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Body& b = world.bodies[i];
    const Real travel = b.lin_vel.norm() + b.ang_vel.norm() * shapes[i].half_length;
    reach[i] = contact.speculative * (dt * travel + (b.kinematic ? 0.0 : dt * dt * g));
  }

  std::vector<SphereGeom> spheres;
  for (std::size_t i = 0; i < n; ++i)
    if (shapes[i].type == ShapeType::sphere)
      spheres.push_back({static_cast<int>(i), world.bodies[i].position, shapes[i].radius});

  std::vector<std::pair<int, int>> pairs;
  if (contact.self_collision && spheres.size() > 1) {
    Real max_reach = 0.0;
    for (const auto& s : spheres) max_reach = std::max(max_reach, reach[s.body]);
    pairs = broad_phase_pairs(spheres, contact.margin + 2.0 * max_reach);
  }
  std::vector<std::optional<ContactManifoldEntry>> pair_hits(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), [&](int k) {
    const SphereGeom& a = spheres[pairs[k].first];
    const SphereGeom& b = spheres[pairs[k].second];
    if (world.bodies[a.body].kinematic && world.bodies[b.body].kinematic) return;
    pair_hits[k] = collide_sphere_sphere(a, b, contact.margin + reach[a.body] + reach[b.body]);
  }, threads);

  std::vector<std::vector<ContactManifoldEntry>> env_hits(n);
  parallel_for(static_cast<int>(n), [&](int i) {
    const Body& body = world.bodies[i];
    const Shape& shape = shapes[i];
    if (body.kinematic || shape.type == ShapeType::none) return;
    const Real margin = contact.margin + reach[i];
    auto& out = env_hits[i];
    if (shape.type == ShapeType::sphere) {
      const SphereGeom s{i, body.position, shape.radius};
      for (std::size_t p = 0; p < planes.size(); ++p)
        if (auto e = collide_sphere_halfspace(s, planes[p], static_cast<int>(p), margin))
          out.push_back(*e);
      for (std::size_t c = 0; c < containers.size(); ++c) {
        const auto walls = box_walls(containers[c]);
        for (std::size_t f = 0; f < walls.size(); ++f)
          if (auto e = collide_sphere_halfspace(s, walls[f], static_cast<int>(64 + 8 * c + f), margin))
            out.push_back(*e);
      }
    } else {
      const CapsuleGeom cap{i, body.position, body.orientation * Vec3::UnitZ(), shape.half_length,
                            shape.radius};
      for (std::size_t p = 0; p < planes.size(); ++p) {
        auto hits = collide_capsule_halfspace(cap, planes[p], static_cast<int>(2 * p), margin);
        out.insert(out.end(), hits.begin(), hits.end());
      }
    }
  }, threads);

  std::vector<ContactManifoldEntry> contacts;
  for (auto& h : pair_hits)
    if (h) contacts.push_back(*h);
  for (auto& v : env_hits) contacts.insert(contacts.end(), v.begin(), v.end());
  std::sort(contacts.begin(), contacts.end(),
            [](const ContactManifoldEntry& x, const ContactManifoldEntry& y) { return x.id < y.id; });
  return contacts;
}

std::vector<ConstraintSpec> Scene::constraints(int threads) const {
  const auto contacts = detect_contacts(threads);
  std::vector<ConstraintSpec> out(joints.size() + contacts.size());
  const ContactErrorParams params = contact_error_params();
  parallel_for(static_cast<int>(out.size()), [&](int k) {
    const std::size_t j = static_cast<std::size_t>(k);
    out[j] = j < joints.size()
                 ? joint_constraint(j)
                 : make_contact_constraint(world, contacts[j - joints.size()], contact.friction, params);
  }, threads);
  return out;
}

Real Scene::max_penetration(int threads) const {
  Real depth = 0.0;
  for (const auto& e : detect_contacts(threads)) depth = std::max(depth, -e.gap);
  return depth;
}

}  // namespace subadmm
