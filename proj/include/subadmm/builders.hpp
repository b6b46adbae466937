#pragma once

// Scene builders for the benchmark scenarios.

#include <subadmm/scene.hpp>

#include <array>
#include <cstdint>
#include <numbers>

namespace subadmm {

// Spheres seeded in jittered layers over the floor of an open-top box, stirred
// by a kinematic paddle sphere that descends while circling.
struct StirringParams {
  int spheres = 216;
  Real radius = 0.01;
  Real mass = 0.004;
  Vec3 box = Vec3(0.2, 0.2, 0.2);
  Real spacing = 0.025;
  Real jitter = 0.0005;
  Real paddle_radius = 0.02;
  Real paddle_circle = 0.05;
  Real paddle_rate = std::numbers::pi;  // rad/s
  Real paddle_start_height = 0.25;
  Real paddle_descent = 0.1;  // m/s
  Real paddle_min_height = 0.045;
};

Scene build_stirring(const StirringParams& params, std::uint64_t seed);

// Chain of rigid capsules along x joined by Cosserat rod joints, grouped
// into subsystems of `group_size` segments, ends welded to kinematic grips
// and lying above a floor plane.
struct CableParams {
  int segments = 640;
  Real length = 1.2;
  Real diameter = 0.008;
  Real young_modulus = 1e5;  // Pa
  Real poisson = 0.49;
  Real density = 1000.0;     // kg/m^3
  int group_size = 4;
  Real height = 0.05;
  bool pin_start = true;
  bool pin_end = true;
  Vec3 end_grip_velocity = Vec3(-0.05, 0.0, 0.0);
  Real damping = 1e-3;          // rod damping / stiffness ratio, s
  Real stiffness_scale = 1.0;   // multiplies every rod stiffness
};

// Rod stiffnesses (shear, shear, stretch, bend, bend, twist) for one joint
// between segments of length `segment_length`.
Vec6 rod_stiffness(const CableParams& params, Real segment_length);

Scene build_cable(const CableParams& params);

// Mass-point lattice split along x into partitions. Each cell contributes
// springs on its edges, face diagonals and body diagonals; interface nodes
// are duplicated per partition and glued by point joints. Nodes on the
// x = 0 face are kinematic when pin_left is set.
struct LatticeParams {
  std::array<int, 3> cells = {4, 2, 2};
  Vec3 size = Vec3(0.4, 0.1, 0.1);
  int partitions = 2;
  Real density = 100.0;     // kg/m^3
  Real stiffness = 1e4;     // N/m per spring
  Real damping = 20.0;      // N s/m per spring
  bool pin_left = true;
};

Scene build_split_lattice(const LatticeParams& params);

// Index of lattice node (ix, iy, iz) of partition p in a scene built from
// `params`; the partition owning x-index ix must be given for interface
// nodes. Throws UsageError when the node is not in that partition.
int lattice_node(const LatticeParams& params, int partition, int ix, int iy, int iz);

// First x-cell index of each partition plus the end (partitions + 1 values).
std::vector<int> lattice_partition_bounds(const LatticeParams& params);

}  // namespace subadmm
