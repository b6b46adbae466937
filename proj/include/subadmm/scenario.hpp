#pragma once

// Versioned scenario documents (JSON). Unknown keys, wrong types and bad
// references raise ScenarioError whose message starts with the JSON
// pointer of the offending value. The schema is documented in
// docs/scenario_schema.md.

#include <subadmm/baselines.hpp>
#include <subadmm/builders.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace subadmm {

inline constexpr int kScenarioVersion = 1;

struct BodySpec {
  Body body;
  Shape shape;
  std::optional<KinematicPath> path;
};

struct GroupingSpec {
  enum class Rule { per_body, group, explicit_list };
  Rule rule = Rule::per_body;
  int size = 1;                                // group
  std::vector<std::vector<int>> subsystems;    // explicit_list
};

// Free-form scene: bodies, static geometry, joints and a grouping rule.
struct BodiesParams {
  std::vector<BodySpec> bodies;
  std::vector<Plane> planes;
  std::vector<BoxInterior> containers;
  std::vector<Joint> joints;
  GroupingSpec grouping;
  bool self_collision = true;
};

using BuilderParams = std::variant<StirringParams, CableParams, LatticeParams, BodiesParams>;

struct SolverSettings {
  SolverKind type = SolverKind::subadmm;
  int max_iters = 60;
  Real tolerance = 1e-10;
  bool fixed_iterations = false;
  bool warm_start = false;
  bool strict_contact = false;
  Real beta_scale = 1.0;
  Real pj_relaxation = 0.5;
};

struct ScenarioSpec {
  int version = kScenarioVersion;
  std::string name = "scenario";
  BuilderParams params = StirringParams{};
  SolverSettings solver;
  Real dt = 0.01;
  long steps = 100;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  ContactSettings contact;
  std::uint64_t seed = 0;

  std::string_view builder() const;
};

ScenarioSpec parse_scenario(std::string_view json_text);
ScenarioSpec load_scenario(const std::filesystem::path& file);
// Canonical form: every field present, keys sorted, two-space indent.
std::string serialize_scenario(const ScenarioSpec& spec);

Scene build_scene(const ScenarioSpec& spec);
SolverConfig solver_config(const ScenarioSpec& spec, int threads = 0);

}  // namespace subadmm
