#include <subadmm/builders.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace subadmm {

Scene build_stirring(const StirringParams& p, std::uint64_t seed) {
  if (p.spheres < 1) throw ConfigurationError("stirring needs at least one sphere");
  if (!(p.radius > 0.0) || !(p.mass > 0.0) || !(p.paddle_radius > 0.0))
    throw ConfigurationError("sphere radius and mass must be > 0");
  if (p.jitter < 0.0) throw ConfigurationError("jitter must be >= 0");
  const int k = static_cast<int>(std::lround(std::cbrt(static_cast<Real>(p.spheres))));
  if (k * k * k != p.spheres)
    throw ConfigurationError("sphere count " + std::to_string(p.spheres) + " is not a perfect cube");
  if (p.spacing < 2.0 * (p.radius + p.jitter))
    throw ConfigurationError("lattice spacing too small for radius and jitter");
  // Layers fill the box footprint, odd layers shifted half a cell so every
  // sphere rests in a hollow of the layer below.
  const Real margin = 2.0 * (p.radius + p.jitter);
  if (p.box.x() < margin || p.box.y() < margin)
    throw ConfigurationError("box narrower than one sphere");
  const int nx = static_cast<int>(std::floor((p.box.x() - margin) / p.spacing)) + 1;
  const int ny = static_cast<int>(std::floor((p.box.y() - margin) / p.spacing)) + 1;
  const Real lateral = 0.5 * p.spacing - 2.0 * p.jitter;
  const Real layer_gap =
      2.0 * p.jitter +
      std::sqrt(std::max(0.0, 4.0 * p.radius * p.radius - 2.0 * lateral * lateral));
  std::vector<Vec3> slots;
  for (int iz = 0; static_cast<int>(slots.size()) < p.spheres; ++iz) {
    const int odd = iz % 2;
    if (odd && (nx < 2 || ny < 2)) continue;
    const Real x0 = -0.5 * (nx - 1 - odd) * p.spacing, y0 = -0.5 * (ny - 1 - odd) * p.spacing;
    const Real z = p.radius + p.jitter + iz * layer_gap;
    if (z + p.radius + p.jitter > p.box.z())
      throw ConfigurationError("box overfilled: " + std::to_string(p.spheres) + " spheres");
    for (int iy = 0; iy < ny - odd; ++iy)
      for (int ix = 0; ix < nx - odd; ++ix)
        slots.emplace_back(x0 + ix * p.spacing, y0 + iy * p.spacing, z);
  }

  Scene scene;
  scene.name = "stirring";
  scene.containers.push_back({Vec3(0.0, 0.0, 0.5 * p.box.z()), 0.5 * p.box, true});

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> jitter(-p.jitter, p.jitter);
  Body sphere;
  sphere.mass = p.mass;
  sphere.inertia_body = Mat3::Identity() * (0.4 * p.mass * p.radius * p.radius);
  for (int i = 0; i < p.spheres; ++i) {
    sphere.position = slots[static_cast<std::size_t>(i)];
    for (int a = 0; a < 3; ++a) sphere.position(a) += jitter(rng);
    scene.add_body(sphere, {ShapeType::sphere, p.radius, 0.0});
  }

  KinematicPath path;
  path.origin = Vec3(0.0, 0.0, p.paddle_start_height);
  path.velocity = Vec3(0.0, 0.0, -p.paddle_descent);
  path.circle_radius = p.paddle_circle;
  path.angular_rate = p.paddle_rate;
  path.min_height = p.paddle_min_height;
  Body paddle;
  paddle.mass = 1.0;
  scene.add_body(paddle, {ShapeType::sphere, p.paddle_radius, 0.0}, path);
  scene.world.group_per_body();
  return scene;
}

Vec6 rod_stiffness(const CableParams& p, Real l) {
  const Real r = 0.5 * p.diameter;
  const Real area = std::numbers::pi * r * r;
  const Real second_moment = 0.25 * std::numbers::pi * r * r * r * r;
  const Real polar = 2.0 * second_moment;
  const Real shear_modulus = p.young_modulus / (2.0 * (1.0 + p.poisson));
  Vec6 k;
  k << shear_modulus * area / l, shear_modulus * area / l, p.young_modulus * area / l,
      p.young_modulus * second_moment / l, p.young_modulus * second_moment / l,
      shear_modulus * polar / l;
  return k * p.stiffness_scale;
}

Scene build_cable(const CableParams& p) {
  if (p.segments < 2) throw ConfigurationError("cable needs at least two segments");
  if (!(p.length > 0.0) || !(p.diameter > 0.0) || !(p.density > 0.0))
    throw ConfigurationError("cable length, diameter and density must be > 0");
  if (!(p.young_modulus > 0.0) || !(p.poisson > -1.0 && p.poisson < 0.5))
    throw ConfigurationError("non-physical moduli: E must be > 0 and Poisson ratio in (-1, 0.5)");
  if (p.group_size < 1) throw ConfigurationError("group size must be >= 1");
  if (p.damping < 0.0 || !(p.stiffness_scale > 0.0))
    throw ConfigurationError("rod damping must be >= 0 and stiffness scale > 0");

  Scene scene;
  scene.name = "cable";
  scene.planes.push_back({Vec3::UnitZ(), 0.0});
  scene.contact.self_collision = false;

  const Real l = p.length / p.segments;
  const Real r = 0.5 * p.diameter;
  const Real mass = p.density * std::numbers::pi * r * r * l;
  const Quat along_x(Eigen::AngleAxisd(0.5 * std::numbers::pi, Vec3::UnitY()));
  const Real x0 = -0.5 * p.length;
  Body seg;
  seg.mass = mass;
  seg.inertia_body = Vec3(mass * (3.0 * r * r + l * l) / 12.0, mass * (3.0 * r * r + l * l) / 12.0,
                          0.5 * mass * r * r)
                         .asDiagonal();
  seg.orientation = along_x;
  for (int i = 0; i < p.segments; ++i) {
    seg.position = Vec3(x0 + (i + 0.5) * l, 0.0, p.height);
    scene.add_body(seg, {ShapeType::capsule, r, 0.5 * l});
  }

  const Vec6 k = rod_stiffness(p, l);
  for (int i = 0; i + 1 < p.segments; ++i) {
    Joint j;
    j.kind = JointKind::rod;
    j.a = i;
    j.b = i + 1;
    j.local_a = Vec3(0.0, 0.0, 0.5 * l);
    j.local_b = Vec3(0.0, 0.0, -0.5 * l);
    j.rod_stiffness = k;
    j.rod_damping = p.damping;
    scene.joints.push_back(j);
  }

  const auto grip = [&](int segment, Real x, Real end_sign, const Vec3& velocity) {
    Body g;
    g.kinematic = true;
    g.position = Vec3(x, 0.0, p.height);
    g.lin_vel = velocity;
    KinematicPath path;
    path.origin = g.position;
    path.velocity = velocity;
    const int id = scene.add_body(g, {}, path);
    Joint w;
    w.kind = JointKind::weld;
    w.a = segment;
    w.b = id;
    w.local_a = Vec3(0.0, 0.0, end_sign * 0.5 * l);
    w.rest_rotation = along_x;
    scene.joints.push_back(w);
  };
  if (p.pin_start) grip(0, x0, -1.0, Vec3::Zero());
  if (p.pin_end) grip(p.segments - 1, -x0, 1.0, p.end_grip_velocity);
  scene.world.group_consecutive(p.group_size);
  return scene;
}

std::vector<int> lattice_partition_bounds(const LatticeParams& p) {
  if (p.partitions < 1 || p.partitions > p.cells[0])
    throw ConfigurationError("empty partition: " + std::to_string(p.partitions) +
                             " partitions over " + std::to_string(p.cells[0]) + " cells");
  std::vector<int> bounds(p.partitions + 1);
  for (int q = 0; q <= p.partitions; ++q) bounds[q] = q * p.cells[0] / p.partitions;
  return bounds;
}

namespace {

int partition_base(const LatticeParams& p, const std::vector<int>& bounds, int partition) {
  const int slab = (p.cells[1] + 1) * (p.cells[2] + 1);
  int base = 0;
  for (int q = 0; q < partition; ++q) base += (bounds[q + 1] - bounds[q] + 1) * slab;
  return base;
}

}  // namespace

int lattice_node(const LatticeParams& p, int partition, int ix, int iy, int iz) {
  const auto bounds = lattice_partition_bounds(p);
  if (partition < 0 || partition >= p.partitions || ix < bounds[partition] ||
      ix > bounds[partition + 1] || iy < 0 || iy > p.cells[1] || iz < 0 || iz > p.cells[2])
    throw UsageError("lattice node outside partition");
  return partition_base(p, bounds, partition) +
         ((ix - bounds[partition]) * (p.cells[1] + 1) + iy) * (p.cells[2] + 1) + iz;
}

Scene build_split_lattice(const LatticeParams& p) {
  for (int a = 0; a < 3; ++a)
    if (p.cells[a] < 1) throw ConfigurationError("lattice needs at least one cell per axis");
  if (!(p.size.minCoeff() > 0.0) || !(p.density > 0.0))
    throw ConfigurationError("lattice size and density must be > 0");
  if (p.stiffness < 0.0 || p.damping < 0.0)
    throw ConfigurationError("lattice spring parameters must be >= 0");
  const auto bounds = lattice_partition_bounds(p);
  const Vec3 h(p.size.x() / p.cells[0], p.size.y() / p.cells[1], p.size.z() / p.cells[2]);
  const Real cell_mass = p.density * h.prod();

  Scene scene;
  scene.name = "split_lattice";
  scene.contact.self_collision = false;
  const auto node_position = [&](int ix, int iy, int iz) {
    return Vec3(ix * h.x(), iy * h.y(), iz * h.z());
  };

  std::vector<std::vector<int>> members(p.partitions);
  for (int q = 0; q < p.partitions; ++q) {
    std::vector<Real> mass((bounds[q + 1] - bounds[q] + 1) * (p.cells[1] + 1) * (p.cells[2] + 1),
                           0.0);
    const int base = partition_base(p, bounds, q);
    for (int cx = bounds[q]; cx < bounds[q + 1]; ++cx)
      for (int cy = 0; cy < p.cells[1]; ++cy)
        for (int cz = 0; cz < p.cells[2]; ++cz)
          for (int c = 0; c < 8; ++c)
            mass[lattice_node(p, q, cx + (c & 1), cy + ((c >> 1) & 1), cz + ((c >> 2) & 1)) - base] +=
                cell_mass / 8.0;
    for (int ix = bounds[q]; ix <= bounds[q + 1]; ++ix)
      for (int iy = 0; iy <= p.cells[1]; ++iy)
        for (int iz = 0; iz <= p.cells[2]; ++iz) {
          Body node;
          node.kind = BodyKind::particle;
          node.mass = mass[lattice_node(p, q, ix, iy, iz) - base];
          node.position = node_position(ix, iy, iz);
          node.kinematic = p.pin_left && ix == 0;
          const int id = scene.add_body(node);
          if (!node.kinematic) members[q].push_back(id);
        }
  }

  for (int q = 0; q < p.partitions; ++q)
    for (int cx = bounds[q]; cx < bounds[q + 1]; ++cx)
      for (int cy = 0; cy < p.cells[1]; ++cy)
        for (int cz = 0; cz < p.cells[2]; ++cz) {
          int corner[8];
          for (int c = 0; c < 8; ++c)
            corner[c] = lattice_node(p, q, cx + (c & 1), cy + ((c >> 1) & 1), cz + ((c >> 2) & 1));
          for (int a = 0; a < 8; ++a)
            for (int b = a + 1; b < 8; ++b) {
              if (scene.world.bodies[corner[a]].kinematic && scene.world.bodies[corner[b]].kinematic)
                continue;
              Joint s;
              s.kind = JointKind::spring;
              s.a = corner[a];
              s.b = corner[b];
              s.rest_length = (scene.world.bodies[s.a].position - scene.world.bodies[s.b].position).norm();
              s.stiffness = p.stiffness;
              s.damping = p.damping;
              scene.joints.push_back(s);
            }
        }

  for (int q = 0; q + 1 < p.partitions; ++q)
    for (int iy = 0; iy <= p.cells[1]; ++iy)
      for (int iz = 0; iz <= p.cells[2]; ++iz) {
        Joint g;
        g.kind = JointKind::point;
        g.a = lattice_node(p, q, bounds[q + 1], iy, iz);
        g.b = lattice_node(p, q + 1, bounds[q + 1], iy, iz);
        scene.joints.push_back(g);
      }

  for (const auto& m : members)
    if (!m.empty()) scene.world.add_subsystem(m);
  return scene;
}

}  // namespace subadmm
