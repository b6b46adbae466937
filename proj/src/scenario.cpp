#include <subadmm/scenario.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace subadmm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ScenarioError((path.empty() ? std::string("/") : path) + ": " + message);
}

// Typed access to one JSON object; remembers which keys were read so that
// finish() can reject the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json* child(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const json* v = child(key)) out = convert<T>(*v, at(key));
  }

  template <typename T>
  T require(const std::string& key) {
    const json* v = child(key);
    if (!v) fail(at(key), "missing required key");
    return convert<T>(*v, at(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
  }

  template <typename T>
  static T convert(const json& v, const std::string& path);

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <>
Real Reader::convert<Real>(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const Real x = v.get<Real>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

template <>
int Reader::convert<int>(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    fail(path, "integer out of range");
  return static_cast<int>(x);
}

template <>
long Reader::convert<long>(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return static_cast<long>(v.get<long long>());
}

template <>
std::uint64_t Reader::convert<std::uint64_t>(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

template <>
bool Reader::convert<bool>(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

template <>
std::string Reader::convert<std::string>(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

VecX read_vector(const json& v, const std::string& path, Index n) {
  if (!v.is_array() || static_cast<Index>(v.size()) != n)
    fail(path, "expected an array of " + std::to_string(n) + " numbers");
  VecX out(n);
  for (Index i = 0; i < n; ++i)
    out(i) = Reader::convert<Real>(v[static_cast<std::size_t>(i)], path + "/" + std::to_string(i));
  return out;
}

template <>
Vec3 Reader::convert<Vec3>(const json& v, const std::string& path) {
  return read_vector(v, path, 3);
}

template <>
Vec6 Reader::convert<Vec6>(const json& v, const std::string& path) {
  return read_vector(v, path, 6);
}

template <>
Quat Reader::convert<Quat>(const json& v, const std::string& path) {
  const VecX q = read_vector(v, path, 4);
  if (!(q.norm() > 0.0)) fail(path, "quaternion must be non-zero");
  return Quat(q(0), q(1), q(2), q(3)).normalized();
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }
json to_json(const Vec6& v) {
  json a = json::array();
  for (int i = 0; i < 6; ++i) a.push_back(v(i));
  return a;
}

template <typename Fn>
void read_array(Reader& r, const std::string& key, Fn&& fn) {
  const json* arr = r.child(key);
  if (!arr) return;
  if (!arr->is_array()) fail(r.at(key), "expected an array");
  for (std::size_t i = 0; i < arr->size(); ++i) fn((*arr)[i], r.at(key) + "/" + std::to_string(i));
}

// ---- builder parameters ----------------------------------------------------

StirringParams read_stirring(Reader& r) {
  StirringParams p;
  r.read("spheres", p.spheres);
  r.read("radius", p.radius);
  r.read("mass", p.mass);
  r.read("box", p.box);
  r.read("spacing", p.spacing);
  r.read("jitter", p.jitter);
  r.read("paddle_radius", p.paddle_radius);
  r.read("paddle_circle", p.paddle_circle);
  r.read("paddle_rate", p.paddle_rate);
  r.read("paddle_start_height", p.paddle_start_height);
  r.read("paddle_descent", p.paddle_descent);
  r.read("paddle_min_height", p.paddle_min_height);
  return p;
}

json write_stirring(const StirringParams& p) {
  return {{"spheres", p.spheres},
          {"radius", p.radius},
          {"mass", p.mass},
          {"box", to_json(p.box)},
          {"spacing", p.spacing},
          {"jitter", p.jitter},
          {"paddle_radius", p.paddle_radius},
          {"paddle_circle", p.paddle_circle},
          {"paddle_rate", p.paddle_rate},
          {"paddle_start_height", p.paddle_start_height},
          {"paddle_descent", p.paddle_descent},
          {"paddle_min_height", p.paddle_min_height}};
}

CableParams read_cable(Reader& r) {
  CableParams p;
  r.read("segments", p.segments);
  r.read("length", p.length);
  r.read("diameter", p.diameter);
  r.read("young_modulus", p.young_modulus);
  r.read("poisson", p.poisson);
  r.read("density", p.density);
  r.read("group_size", p.group_size);
  r.read("height", p.height);
  r.read("pin_start", p.pin_start);
  r.read("pin_end", p.pin_end);
  r.read("end_grip_velocity", p.end_grip_velocity);
  r.read("damping", p.damping);
  r.read("stiffness_scale", p.stiffness_scale);
  return p;
}

json write_cable(const CableParams& p) {
  return {{"segments", p.segments},
          {"length", p.length},
          {"diameter", p.diameter},
          {"young_modulus", p.young_modulus},
          {"poisson", p.poisson},
          {"density", p.density},
          {"group_size", p.group_size},
          {"height", p.height},
          {"pin_start", p.pin_start},
          {"pin_end", p.pin_end},
          {"end_grip_velocity", to_json(p.end_grip_velocity)},
          {"damping", p.damping},
          {"stiffness_scale", p.stiffness_scale}};
}

LatticeParams read_lattice(Reader& r) {
  LatticeParams p;
  if (const json* c = r.child("cells")) {
    if (!c->is_array() || c->size() != 3) fail(r.at("cells"), "expected an array of 3 integers");
    for (int a = 0; a < 3; ++a)
      p.cells[a] = Reader::convert<int>((*c)[a], r.at("cells") + "/" + std::to_string(a));
  }
  r.read("size", p.size);
  r.read("partitions", p.partitions);
  r.read("density", p.density);
  r.read("stiffness", p.stiffness);
  r.read("damping", p.damping);
  r.read("pin_left", p.pin_left);
  return p;
}

json write_lattice(const LatticeParams& p) {
  return {{"cells", json::array({p.cells[0], p.cells[1], p.cells[2]})},
          {"size", to_json(p.size)},
          {"partitions", p.partitions},
          {"density", p.density},
          {"stiffness", p.stiffness},
          {"damping", p.damping},
          {"pin_left", p.pin_left}};
}

KinematicPath read_path(const json& j, const std::string& path) {
  Reader r(j, path);
  KinematicPath k;
  r.read("origin", k.origin);
  r.read("velocity", k.velocity);
  r.read("circle_radius", k.circle_radius);
  r.read("angular_rate", k.angular_rate);
  r.read("phase", k.phase);
  if (const json* m = r.child("min_height"); m && !m->is_null())
    k.min_height = Reader::convert<Real>(*m, r.at("min_height"));
  r.read("spin", k.spin);
  r.finish();
  return k;
}

json write_path(const KinematicPath& k) {
  return {{"origin", to_json(k.origin)},
          {"velocity", to_json(k.velocity)},
          {"circle_radius", k.circle_radius},
          {"angular_rate", k.angular_rate},
          {"phase", k.phase},
          {"min_height", std::isfinite(k.min_height) ? json(k.min_height) : json(nullptr)},
          {"spin", to_json(k.spin)}};
}

Vec3 default_inertia(const Shape& s, Real mass, const std::string& path) {
  switch (s.type) {
    case ShapeType::sphere: return Vec3::Constant(0.4 * mass * s.radius * s.radius);
    case ShapeType::capsule: {
      const Real l = 2.0 * s.half_length;
      const Real t = mass * (3.0 * s.radius * s.radius + l * l) / 12.0;
      return Vec3(t, t, 0.5 * mass * s.radius * s.radius);
    }
    case ShapeType::none: break;
  }
  fail(path, "rigid body without a shape needs an explicit inertia");
}

BodySpec read_body(const json& j, const std::string& path) {
  Reader r(j, path);
  BodySpec b;
  std::string kind = "rigid";
  r.read("kind", kind);
  if (kind == "particle")
    b.body.kind = BodyKind::particle;
  else if (kind != "rigid")
    fail(r.at("kind"), "expected \"rigid\" or \"particle\"");
  std::string shape = "none";
  r.read("shape", shape);
  try {
    b.shape.type = shape_type_from_string(shape);
  } catch (const UsageError&) {
    fail(r.at("shape"), "unknown shape \"" + shape + "\"");
  }
  r.read("radius", b.shape.radius);
  r.read("half_length", b.shape.half_length);
  r.read("mass", b.body.mass);
  if (!(b.body.mass > 0.0)) fail(r.at("mass"), "mass must be > 0");
  if (b.shape.type != ShapeType::none && !(b.shape.radius > 0.0))
    fail(r.at("radius"), "radius must be > 0");
  if (r.has("inertia")) {
    const Vec3 d = r.require<Vec3>("inertia");
    if (!(d.minCoeff() > 0.0)) fail(r.at("inertia"), "principal inertia must be > 0");
    b.body.inertia_body = d.asDiagonal();
  } else if (b.body.kind == BodyKind::rigid) {
    b.body.inertia_body = default_inertia(b.shape, b.body.mass, path).asDiagonal();
  }
  r.read("position", b.body.position);
  r.read("orientation", b.body.orientation);
  r.read("linear_velocity", b.body.lin_vel);
  r.read("angular_velocity", b.body.ang_vel);
  r.read("force", b.body.force);
  r.read("torque", b.body.torque);
  r.read("kinematic", b.body.kinematic);
  if (const json* p = r.child("path"); p && !p->is_null()) {
    b.path = read_path(*p, r.at("path"));
    if (!b.body.kinematic) fail(r.at("path"), "only kinematic bodies may have a path");
  }
  r.finish();
  return b;
}

json write_body(const BodySpec& b) {
  json j = {{"kind", b.body.kind == BodyKind::rigid ? "rigid" : "particle"},
            {"shape", std::string(to_string(b.shape.type))},
            {"radius", b.shape.radius},
            {"half_length", b.shape.half_length},
            {"mass", b.body.mass},
            {"position", to_json(b.body.position)},
            {"orientation", to_json(b.body.orientation)},
            {"linear_velocity", to_json(b.body.lin_vel)},
            {"angular_velocity", to_json(b.body.ang_vel)},
            {"force", to_json(b.body.force)},
            {"torque", to_json(b.body.torque)},
            {"kinematic", b.body.kinematic},
            {"path", b.path ? write_path(*b.path) : json(nullptr)}};
  if (b.body.kind == BodyKind::rigid) j["inertia"] = to_json(Vec3(b.body.inertia_body.diagonal()));
  return j;
}

Joint read_joint(const json& j, const std::string& path, const std::vector<BodySpec>& bodies) {
  Reader r(j, path);
  Joint jt;
  const std::string kind = r.require<std::string>("kind");
  try {
    jt.kind = joint_kind_from_string(kind);
  } catch (const UsageError&) {
    fail(r.at("kind"), "unknown joint kind \"" + kind + "\"");
  }
  const int n = static_cast<int>(bodies.size());
  jt.a = r.require<int>("a");
  if (jt.a < 0 || jt.a >= n) fail(r.at("a"), "body " + std::to_string(jt.a) + " does not exist");
  r.read("b", jt.b);
  if (jt.b != kEnvironment && (jt.b < 0 || jt.b >= n))
    fail(r.at("b"), "body " + std::to_string(jt.b) + " does not exist");
  if (jt.a == jt.b) fail(r.at("b"), "a joint needs two distinct bodies");
  r.read("local_a", jt.local_a);
  r.read("local_b", jt.local_b);
  if (r.has("rest_length")) {
    r.read("rest_length", jt.rest_length);
  } else if (jt.kind == JointKind::spring) {
    const Body& A = bodies[jt.a].body;
    const Vec3 pa = A.position + A.orientation * jt.local_a;
    Vec3 pb = jt.local_b;
    if (jt.b != kEnvironment) {
      const Body& B = bodies[jt.b].body;
      pb = B.position + B.orientation * jt.local_b;
    }
    jt.rest_length = (pa - pb).norm();
  }
  r.read("stiffness", jt.stiffness);
  r.read("damping", jt.damping);
  r.read("rod_stiffness", jt.rod_stiffness);
  r.read("rod_damping", jt.rod_damping);
  r.read("rest_rotation", jt.rest_rotation);
  r.read("erp", jt.erp);
  r.finish();
  return jt;
}

json write_joint(const Joint& j) {
  return {{"kind", std::string(to_string(j.kind))},
          {"a", j.a},
          {"b", j.b},
          {"local_a", to_json(j.local_a)},
          {"local_b", to_json(j.local_b)},
          {"rest_length", j.rest_length},
          {"stiffness", j.stiffness},
          {"damping", j.damping},
          {"rod_stiffness", to_json(j.rod_stiffness)},
          {"rod_damping", j.rod_damping},
          {"rest_rotation", to_json(j.rest_rotation)},
          {"erp", j.erp}};
}

BodiesParams read_bodies(Reader& r) {
  BodiesParams p;
  read_array(r, "bodies", [&](const json& j, const std::string& path) {
    p.bodies.push_back(read_body(j, path));
  });
  read_array(r, "planes", [&](const json& j, const std::string& path) {
    Reader pr(j, path);
    Plane pl;
    pr.read("normal", pl.normal);
    if (!(pl.normal.norm() > 0.0)) fail(pr.at("normal"), "normal must be non-zero");
    pl.normal.normalize();
    pr.read("offset", pl.offset);
    pr.finish();
    p.planes.push_back(pl);
  });
  read_array(r, "containers", [&](const json& j, const std::string& path) {
    Reader br(j, path);
    BoxInterior box;
    br.read("center", box.center);
    br.read("half_extents", box.half_extents);
    if (!(box.half_extents.minCoeff() > 0.0)) fail(br.at("half_extents"), "extents must be > 0");
    br.read("open_top", box.open_top);
    br.finish();
    p.containers.push_back(box);
  });
  read_array(r, "joints", [&](const json& j, const std::string& path) {
    p.joints.push_back(read_joint(j, path, p.bodies));
  });
  r.read("self_collision", p.self_collision);
  if (const json* g = r.child("grouping")) {
    Reader gr(*g, r.at("grouping"));
    const std::string rule = gr.require<std::string>("rule");
    if (rule == "per_body") {
      p.grouping.rule = GroupingSpec::Rule::per_body;
    } else if (rule == "group") {
      p.grouping.rule = GroupingSpec::Rule::group;
      p.grouping.size = gr.require<int>("size");
      if (p.grouping.size < 1) fail(gr.at("size"), "group size must be >= 1");
    } else if (rule == "explicit") {
      p.grouping.rule = GroupingSpec::Rule::explicit_list;
      std::set<int> used;
      read_array(gr, "subsystems", [&](const json& s, const std::string& spath) {
        if (!s.is_array() || s.empty()) fail(spath, "expected a non-empty array of body ids");
        std::vector<int> ids;
        for (std::size_t k = 0; k < s.size(); ++k) {
          const std::string kpath = spath + "/" + std::to_string(k);
          const int id = Reader::convert<int>(s[k], kpath);
          if (id < 0 || id >= static_cast<int>(p.bodies.size()))
            fail(kpath, "body " + std::to_string(id) + " does not exist");
          if (p.bodies[id].body.kinematic) fail(kpath, "kinematic body in a subsystem");
          if (!used.insert(id).second) fail(kpath, "body already belongs to a subsystem");
          ids.push_back(id);
        }
        p.grouping.subsystems.push_back(ids);
      });
      for (std::size_t b = 0; b < p.bodies.size(); ++b)
        if (!p.bodies[b].body.kinematic && !used.count(static_cast<int>(b)))
          fail(gr.at("subsystems"), "dynamic body " + std::to_string(b) + " belongs to no subsystem");
    } else {
      fail(gr.at("rule"), "expected \"per_body\", \"group\" or \"explicit\"");
    }
    gr.finish();
  }
  return p;
}

json write_bodies(const BodiesParams& p) {
  json bodies = json::array(), planes = json::array(), containers = json::array(),
       joints = json::array();
  for (const auto& b : p.bodies) bodies.push_back(write_body(b));
  for (const auto& pl : p.planes)
    planes.push_back({{"normal", to_json(pl.normal)}, {"offset", pl.offset}});
  for (const auto& c : p.containers)
    containers.push_back({{"center", to_json(c.center)},
                          {"half_extents", to_json(c.half_extents)},
                          {"open_top", c.open_top}});
  for (const auto& j : p.joints) joints.push_back(write_joint(j));
  json grouping;
  switch (p.grouping.rule) {
    case GroupingSpec::Rule::per_body: grouping = {{"rule", "per_body"}}; break;
    case GroupingSpec::Rule::group: grouping = {{"rule", "group"}, {"size", p.grouping.size}}; break;
    case GroupingSpec::Rule::explicit_list:
      grouping = {{"rule", "explicit"}, {"subsystems", p.grouping.subsystems}};
      break;
  }
  return {{"bodies", bodies},   {"planes", planes},
          {"containers", containers}, {"joints", joints},
          {"grouping", grouping}, {"self_collision", p.self_collision}};
}

}  // namespace

std::string_view ScenarioSpec::builder() const {
  switch (params.index()) {
    case 0: return "stirring";
    case 1: return "cable";
    case 2: return "split_lattice";
    default: return "bodies";
  }
}

ScenarioSpec parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("/: invalid JSON: ") + e.what());
  }
  Reader r(doc, "");
  ScenarioSpec s;
  s.version = r.require<int>("version");
  if (s.version != kScenarioVersion)
    fail(r.at("version"), "unsupported version " + std::to_string(s.version) + " (expected " +
                              std::to_string(kScenarioVersion) + ")");
  r.read("name", s.name);
  const std::string builder = r.require<std::string>("builder");
  const json empty = json::object();
  const json* params = r.child("params");
  Reader pr(params ? *params : empty, r.at("params"));
  if (builder == "stirring")
    s.params = read_stirring(pr);
  else if (builder == "cable")
    s.params = read_cable(pr);
  else if (builder == "split_lattice")
    s.params = read_lattice(pr);
  else if (builder == "bodies")
    s.params = read_bodies(pr);
  else
    fail(r.at("builder"), "unknown builder \"" + builder + "\"");
  pr.finish();

  if (const json* j = r.child("solver")) {
    Reader sr(*j, r.at("solver"));
    std::string type = std::string(to_string(s.solver.type));
    sr.read("type", type);
    try {
      s.solver.type = solver_kind_from_string(type);
    } catch (const std::exception&) {
      fail(sr.at("type"), "unknown solver \"" + type + "\"");
    }
    sr.read("max_iters", s.solver.max_iters);
    sr.read("tolerance", s.solver.tolerance);
    sr.read("fixed_iterations", s.solver.fixed_iterations);
    sr.read("warm_start", s.solver.warm_start);
    sr.read("strict_contact", s.solver.strict_contact);
    sr.read("beta_scale", s.solver.beta_scale);
    sr.read("pj_relaxation", s.solver.pj_relaxation);
    if (s.solver.max_iters < 1) fail(sr.at("max_iters"), "must be >= 1");
    if (!(s.solver.tolerance > 0.0)) fail(sr.at("tolerance"), "must be > 0");
    if (!(s.solver.beta_scale > 0.0)) fail(sr.at("beta_scale"), "must be > 0");
    sr.finish();
  }
  if (const json* j = r.child("time")) {
    Reader tr(*j, r.at("time"));
    tr.read("dt", s.dt);
    tr.read("steps", s.steps);
    if (!(s.dt > 0.0)) fail(tr.at("dt"), "must be > 0");
    if (s.steps < 0) fail(tr.at("steps"), "must be >= 0");
    tr.finish();
  }
  r.read("gravity", s.gravity);
  if (const json* j = r.child("contact")) {
    Reader cr(*j, r.at("contact"));
    cr.read("friction", s.contact.friction);
    cr.read("erp", s.contact.erp);
    cr.read("margin", s.contact.margin);
    cr.read("max_depenetration", s.contact.max_depenetration);
    cr.read("slop", s.contact.slop);
    cr.read("speculative", s.contact.speculative);
    if (s.contact.friction < 0.0) fail(cr.at("friction"), "must be >= 0");
    if (s.contact.erp < 0.0 || s.contact.erp > 1.0) fail(cr.at("erp"), "must lie in [0, 1]");
    if (s.contact.margin < 0.0) fail(cr.at("margin"), "must be >= 0");
    cr.finish();
  }
  r.read("seed", s.seed);
  r.finish();
  return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ScenarioError("/: cannot open " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

std::string serialize_scenario(const ScenarioSpec& s) {
  json params;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, StirringParams>) params = write_stirring(p);
        else if constexpr (std::is_same_v<P, CableParams>) params = write_cable(p);
        else if constexpr (std::is_same_v<P, LatticeParams>) params = write_lattice(p);
        else params = write_bodies(p);
      },
      s.params);
  json doc = {
      {"version", s.version},
      {"name", s.name},
      {"builder", std::string(s.builder())},
      {"params", params},
      {"solver",
       {{"type", std::string(to_string(s.solver.type))},
        {"max_iters", s.solver.max_iters},
        {"tolerance", s.solver.tolerance},
        {"fixed_iterations", s.solver.fixed_iterations},
        {"warm_start", s.solver.warm_start},
        {"strict_contact", s.solver.strict_contact},
        {"beta_scale", s.solver.beta_scale},
        {"pj_relaxation", s.solver.pj_relaxation}}},
      {"time", {{"dt", s.dt}, {"steps", s.steps}}},
      {"gravity", to_json(s.gravity)},
      {"contact",
       {{"friction", s.contact.friction},
        {"erp", s.contact.erp},
        {"margin", s.contact.margin},
        {"max_depenetration", s.contact.max_depenetration},
        {"slop", s.contact.slop},
        {"speculative", s.contact.speculative}}},
      {"seed", s.seed}};
  return doc.dump(2) + "\n";
}

Scene build_scene(const ScenarioSpec& s) {
  Scene scene;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, StirringParams>) {
          scene = build_stirring(p, s.seed);
        } else if constexpr (std::is_same_v<P, CableParams>) {
          scene = build_cable(p);
        } else if constexpr (std::is_same_v<P, LatticeParams>) {
          scene = build_split_lattice(p);
        } else {
          for (const auto& b : p.bodies) scene.add_body(b.body, b.shape, b.path);
          scene.planes = p.planes;
          scene.containers = p.containers;
          scene.joints = p.joints;
          scene.contact.self_collision = p.self_collision;
          switch (p.grouping.rule) {
            case GroupingSpec::Rule::per_body: scene.world.group_per_body(); break;
            case GroupingSpec::Rule::group: scene.world.group_consecutive(p.grouping.size); break;
            case GroupingSpec::Rule::explicit_list:
              for (const auto& ids : p.grouping.subsystems) scene.world.add_subsystem(ids);
              break;
          }
        }
      },
      s.params);
  scene.name = s.name;
  const bool self_collision = scene.contact.self_collision;
  scene.contact = s.contact;
  scene.contact.self_collision = self_collision;
  scene.world.dt = s.dt;
  scene.world.gravity = s.gravity;
  scene.validate();
  scene.world.finalize();
  return scene;
}

SolverConfig solver_config(const ScenarioSpec& s, int threads) {
  SolverConfig c;
  c.max_iters = s.solver.max_iters;
  c.tolerance = s.solver.tolerance;
  c.fixed_iterations = s.solver.fixed_iterations;
  c.warm_start = s.solver.warm_start;
  c.strict_contact = s.solver.strict_contact;
  c.beta_scale = s.solver.beta_scale;
  c.pj_relaxation = s.solver.pj_relaxation;
  c.threads = threads;
  return c;
}

}  // namespace subadmm
