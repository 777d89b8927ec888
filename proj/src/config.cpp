#include "softjig/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include "softjig/mesh_io.hpp"

namespace softjig {

const std::array<ObjectInfo, 10>& object_catalog() {
  static const std::array<ObjectInfo, 10> table{{
      {'a', "Sprocket", 106.0, {48, 48, 18}},
      {'b', "Bearing Holder", 119.0, {54, 54, 30}},
      {'c', "Timing Pulley", 19.0, {32, 32, 20}},
      {'d', "Terminal Block", 12.0, {23, 39, 20}},
      {'e', "L-Bracket for Motor", 75.0, {25, 70, 60}},
      {'f', "Idler Pulley", 32.0, {42, 42, 10}},
      {'g', "Shaft", 45.0, {10, 10, 75}},
      {'h', "Geared DC Motor", 190.0, {37, 82, 37}},
      {'i', "Round Belt Pulley", 84.0, {62, 62, 20}},
      {'j', "Small L-Bracket", 14.0, {20, 30, 30}},
  }};
  return table;
}

const ObjectInfo* find_object(std::string_view id) {
  if (id.size() == 3 && id.front() == '(' && id.back() == ')') id = id.substr(1, 1);
  if (id.size() != 1) return nullptr;
  for (const auto& o : object_catalog())
    if (o.id == id[0]) return &o;
  return nullptr;
}

void SuccessCriterion::validate() const {
  if (!(position_tolerance > 0.0)) throw InvalidArgument("position_tolerance must be positive");
  if (!(orientation_tolerance > 0.0)) throw InvalidArgument("orientation_tolerance must be positive");
}

void RunConfig::validate() const {
  if (!(object_mass > 0.0)) throw InvalidArgument("object mass must be positive");
  jig.validate();
  gripper.validate();
  planner.validate(jig);
  registration.validate();
  success.validate();
  if (!(stamp.handle_length >= 0.0) || !(stamp.handle_radius >= 0.0) || stamp.handle_segments < 3)
    throw InvalidArgument("stamp handle needs length >= 0, radius >= 0 and at least 3 segments");
  // Orientation feasibility and membrane extent at the deepest grid depth.
  build_cavity(planner.depth_max, planner.apex_xy, planner.orientation, planner.fillet_radius, jig);
}

namespace {

class Reader {
 public:
  Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const toml::node* node, const std::string& field, const std::string& why) const {
    std::string where = source_;
    if (node && node->source().begin.line > 0) where += ":" + std::to_string(node->source().begin.line);
    throw ConfigError(where + ": " + field + ": " + why);
  }

  // Rejects keys outside `allowed` so typos do not silently fall back to defaults.
  void only(const toml::table& t, const std::string& prefix, const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : t)
      if (!allowed.count(std::string(k.str())))
        fail(&v, prefix + std::string(k.str()), "unknown key");
  }

  template <typename Check>
  void num(const toml::table& t, const std::string& prefix, const char* key, double& out, Check ok,
           const char* rule) const {
    const toml::node* n = t.get(key);
    if (!n) return;
    const std::string field = prefix + key;
    double v;
    if (auto i = n->as_integer()) v = static_cast<double>(i->get());
    else if (auto f = n->as_floating_point()) v = f->get();
    else fail(n, field, "expected a number");
    if (!std::isfinite(v) || !ok(v)) fail(n, field, std::string("must be ") + rule);
    out = v;
  }

  template <typename Int, typename Check>
  void integer(const toml::table& t, const std::string& prefix, const char* key, Int& out, Check ok,
               const char* rule) const {
    const toml::node* n = t.get(key);
    if (!n) return;
    const std::string field = prefix + key;
    auto i = n->as_integer();
    if (!i) fail(n, field, "expected an integer");
    if (!ok(i->get())) fail(n, field, std::string("must be ") + rule);
    out = static_cast<Int>(i->get());
  }

  std::optional<std::string> str(const toml::table& t, const std::string& prefix, const char* key) const {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    auto s = n->as_string();
    if (!s) fail(n, prefix + key, "expected a string");
    return s->get();
  }

  std::vector<double> numbers(const toml::node& n, const std::string& field, std::size_t count) const {
    auto arr = n.as_array();
    if (!arr || arr->size() != count) fail(&n, field, "expected an array of " + std::to_string(count) + " numbers");
    std::vector<double> out;
    for (const auto& e : *arr) {
      if (auto i = e.as_integer()) out.push_back(static_cast<double>(i->get()));
      else if (auto f = e.as_floating_point()) out.push_back(f->get());
      else fail(&n, field, "expected numbers");
      if (!std::isfinite(out.back())) fail(&n, field, "must be finite");
    }
    return out;
  }

  const toml::table* section(const toml::table& root, const char* name) const {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) fail(n, name, "expected a table");
    return n->as_table();
  }

 private:
  std::string source_;
};

const auto positive = [](double v) { return v > 0.0; };
const auto non_negative = [](double v) { return v >= 0.0; };

}  // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                       const std::string& source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    throw ConfigError(source_name + ":" + std::to_string(e.source().begin.line) + ": " +
                      std::string(e.description()));
  }
  const Reader r(source_name);
  RunConfig cfg;
  r.only(root, "", {"seed", "output_dir", "object", "jig", "gripper", "planner", "registration", "success", "stamp"});

  std::int64_t seed = 1;
  r.integer(root, "", "seed", seed, [](std::int64_t v) { return v >= 0; }, ">= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.planner.seed = cfg.seed;
  if (auto out = r.str(root, "", "output_dir")) cfg.output_dir = base_dir / *out;

  const toml::table* obj = r.section(root, "object");
  if (!obj) r.fail(nullptr, "object", "section is required");
  r.only(*obj, "object.", {"mesh", "id", "mass_g", "com_mm"});
  const auto mesh = r.str(*obj, "object.", "mesh");
  if (!mesh) r.fail(obj, "object.mesh", "is required");
  cfg.object_mesh_path = std::filesystem::absolute(base_dir / *mesh).lexically_normal();
  if (!std::filesystem::is_regular_file(cfg.object_mesh_path))
    throw IoError(source_name + ":" + std::to_string(obj->get("mesh")->source().begin.line) +
                  ": object.mesh: file not found: " + cfg.object_mesh_path.string());
  if (auto id = r.str(*obj, "object.", "id")) {
    const ObjectInfo* info = find_object(*id);
    if (!info) r.fail(obj->get("id"), "object.id", "not one of a-j");
    cfg.object_id = std::string(1, info->id);
    cfg.object_mass = info->mass_g / 1000.0;
  }
  double mass_g = 0.0;
  r.num(*obj, "object.", "mass_g", mass_g, positive, "positive");
  if (mass_g > 0.0) cfg.object_mass = mass_g / 1000.0;
  if (!(cfg.object_mass > 0.0)) r.fail(obj, "object.mass_g", "is required unless object.id names a catalog object");
  if (const toml::node* com = obj->get("com_mm")) {
    auto v = r.numbers(*com, "object.com_mm", 3);
    cfg.object_com = Vec3(v[0], v[1], v[2]);
  }

  if (const toml::table* t = r.section(root, "jig")) {
    r.only(*t, "jig.", {"surface_height", "jig_thickness", "membrane_friction", "lateral_extent"});
    r.num(*t, "jig.", "surface_height", cfg.jig.surface_height, [](double) { return true; }, "finite");
    r.num(*t, "jig.", "jig_thickness", cfg.jig.jig_thickness, positive, "positive");
    r.num(*t, "jig.", "membrane_friction", cfg.jig.membrane_friction, non_negative, ">= 0");
    r.num(*t, "jig.", "lateral_extent", cfg.jig.lateral_extent, positive, "positive");
  }
  // The cavity friction follows the membrane unless the planner overrides it.
  cfg.planner.mu_cavity = cfg.jig.membrane_friction;

  if (const toml::table* t = r.section(root, "gripper")) {
    auto& g = cfg.gripper;
    r.only(*t, "gripper.", {"max_opening", "finger_width", "finger_thickness", "finger_length",
                            "palm_clearance", "approach_standoff", "palm_depth", "approach_count"});
    r.num(*t, "gripper.", "max_opening", g.max_opening, positive, "positive");
    r.num(*t, "gripper.", "finger_width", g.finger_width, positive, "positive");
    r.num(*t, "gripper.", "finger_thickness", g.finger_thickness, positive, "positive");
    r.num(*t, "gripper.", "finger_length", g.finger_length, positive, "positive");
    r.num(*t, "gripper.", "palm_clearance", g.palm_clearance, non_negative, ">= 0");
    r.num(*t, "gripper.", "approach_standoff", g.approach_standoff, non_negative, ">= 0");
    r.num(*t, "gripper.", "palm_depth", g.palm_depth, positive, "positive");
    r.integer(*t, "gripper.", "approach_count", g.approach_count, [](std::int64_t v) { return v >= 1; }, ">= 1");
  }

  if (const toml::table* t = r.section(root, "planner")) {
    auto& p = cfg.planner;
    r.only(*t, "planner.", {"lambda", "depth_min", "depth_max", "depth_step", "mu_cavity", "cone_edges",
                            "moment_scale", "gravity", "contact_tol", "minkowski_cap", "apex_xy",
                            "orientation", "yaw_deg", "fillet_radius", "yaw_samples", "settle_steps",
                            "grasp_samples", "mu_finger"});
    r.num(*t, "planner.", "lambda", p.lambda, [](double v) { return v >= 0.0 && v <= 1.0; }, "in [0, 1]");
    r.num(*t, "planner.", "depth_min", p.depth_min, positive, "positive");
    r.num(*t, "planner.", "depth_max", p.depth_max, positive, "positive");
    r.num(*t, "planner.", "depth_step", p.depth_step, positive, "positive");
    r.num(*t, "planner.", "mu_cavity", p.mu_cavity, non_negative, ">= 0");
    r.integer(*t, "planner.", "cone_edges", p.cone_edges, [](std::int64_t v) { return v >= 3; }, ">= 3");
    if (const toml::node* n = t->get("moment_scale")) {
      if (auto s = n->as_string()) {
        if (s->get() != "bounding_sphere") r.fail(n, "planner.moment_scale", "expected \"bounding_sphere\" or a length");
        p.moment_scale_mode = MomentScaleMode::BoundingSphereRadius;
        p.moment_scale = 0.0;
      } else {
        r.num(*t, "planner.", "moment_scale", p.moment_scale, positive, "positive");
        p.moment_scale_mode = MomentScaleMode::Explicit;
      }
    }
    r.num(*t, "planner.", "gravity", p.gravity, positive, "positive");
    r.num(*t, "planner.", "contact_tol", p.contact_tol, positive, "positive");
    r.integer(*t, "planner.", "minkowski_cap", p.minkowski_cap, [](std::int64_t v) { return v >= 1; }, ">= 1");
    if (const toml::node* n = t->get("apex_xy")) {
      auto v = r.numbers(*n, "planner.apex_xy", 2);
      p.apex_xy = Vec2(v[0], v[1]);
    }
    double yaw = 0.0;
    r.num(*t, "planner.", "yaw_deg", yaw, [](double) { return true; }, "finite");
    p.orientation.yaw_deg = yaw;
    if (const toml::node* n = t->get("orientation")) {
      if (auto s = n->as_string()) {
        if (s->get() != "equal_angle") r.fail(n, "planner.orientation", "expected \"equal_angle\" or three elevations in degrees");
        p.orientation = CavityOrientation::equal_angle(yaw);
      } else {
        auto v = r.numbers(*n, "planner.orientation", 3);
        p.orientation = CavityOrientation::explicit_angles(v[0], v[1], v[2], yaw);
      }
      try {
        build_cavity(p.depth_min, Vec2::Zero(), p.orientation, 0.0, JigSpec{});
      } catch (const InfeasibleOrientation& e) {
        r.fail(n, "planner.orientation", e.what());
      } catch (const InvalidArgument&) {
        // Extent problems are reported by RunConfig::validate with the actual jig.
      }
    }
    r.num(*t, "planner.", "fillet_radius", p.fillet_radius, non_negative, ">= 0");
    r.integer(*t, "planner.", "yaw_samples", p.yaw_samples, [](std::int64_t v) { return v >= 1; }, ">= 1");
    r.integer(*t, "planner.", "settle_steps", p.settle_steps, [](std::int64_t v) { return v >= 0; }, ">= 0");
    r.integer(*t, "planner.", "grasp_samples", p.grasp_samples, [](std::int64_t v) { return v >= 1; }, ">= 1");
    r.num(*t, "planner.", "mu_finger", p.mu_finger, non_negative, ">= 0");
  }

  if (const toml::table* t = r.section(root, "registration")) {
    auto& g = cfg.registration;
    r.only(*t, "registration.", {"ransac_iterations", "ransac_sample_size", "inlier_threshold",
                                 "icp_max_iterations", "icp_convergence", "max_correspondence",
                                 "feature_radius", "target_spacing"});
    r.integer(*t, "registration.", "ransac_iterations", g.ransac_iterations, [](std::int64_t v) { return v >= 1; }, ">= 1");
    r.integer(*t, "registration.", "ransac_sample_size", g.ransac_sample_size, [](std::int64_t v) { return v >= 3; }, ">= 3");
    r.num(*t, "registration.", "inlier_threshold", g.inlier_threshold, positive, "positive");
    r.integer(*t, "registration.", "icp_max_iterations", g.icp_max_iterations, [](std::int64_t v) { return v >= 1; }, ">= 1");
    r.num(*t, "registration.", "icp_convergence", g.icp_convergence, positive, "positive");
    r.num(*t, "registration.", "max_correspondence", g.max_correspondence, positive, "positive");
    r.num(*t, "registration.", "feature_radius", g.feature_radius, positive, "positive");
    r.num(*t, "registration.", "target_spacing", g.target_spacing, positive, "positive");
  }

  if (const toml::table* t = r.section(root, "success")) {
    r.only(*t, "success.", {"position_tolerance", "orientation_tolerance"});
    r.num(*t, "success.", "position_tolerance", cfg.success.position_tolerance, positive, "positive");
    r.num(*t, "success.", "orientation_tolerance", cfg.success.orientation_tolerance, positive, "positive");
  }

  if (const toml::table* t = r.section(root, "stamp")) {
    r.only(*t, "stamp.", {"handle_length", "handle_radius", "handle_segments"});
    r.num(*t, "stamp.", "handle_length", cfg.stamp.handle_length, non_negative, ">= 0");
    r.num(*t, "stamp.", "handle_radius", cfg.stamp.handle_radius, non_negative, ">= 0");
    r.integer(*t, "stamp.", "handle_segments", cfg.stamp.handle_segments, [](std::int64_t v) { return v >= 3; }, ">= 3");
  }

  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(source_name + ": " + e.what());
  } catch (const InfeasibleOrientation& e) {
    throw ConfigError(source_name + ": planner.orientation: " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::filesystem::absolute(path).parent_path(), path.string());
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string dump_config(const RunConfig& c) {
  std::ostringstream o;
  o << "seed = " << c.seed << "\n\n";
  o << "[object]\n";
  o << "mesh = " << quoted(c.object_mesh_path.generic_string()) << "\n";
  if (!c.object_id.empty()) o << "id = " << quoted(c.object_id) << "\n";
  o << "mass_g = " << fmt(c.object_mass * 1000.0) << "\n";
  if (c.object_com)
    o << "com_mm = [" << fmt(c.object_com->x()) << ", " << fmt(c.object_com->y()) << ", "
      << fmt(c.object_com->z()) << "]\n";
  o << "\n[jig]\n";
  o << "surface_height = " << fmt(c.jig.surface_height) << "\n";
  o << "jig_thickness = " << fmt(c.jig.jig_thickness) << "\n";
  o << "membrane_friction = " << fmt(c.jig.membrane_friction) << "\n";
  o << "lateral_extent = " << fmt(c.jig.lateral_extent) << "\n";
  const auto& g = c.gripper;
  o << "\n[gripper]\n";
  o << "max_opening = " << fmt(g.max_opening) << "\n";
  o << "finger_width = " << fmt(g.finger_width) << "\n";
  o << "finger_thickness = " << fmt(g.finger_thickness) << "\n";
  o << "finger_length = " << fmt(g.finger_length) << "\n";
  o << "palm_clearance = " << fmt(g.palm_clearance) << "\n";
  o << "approach_standoff = " << fmt(g.approach_standoff) << "\n";
  o << "palm_depth = " << fmt(g.palm_depth) << "\n";
  o << "approach_count = " << g.approach_count << "\n";
  const auto& p = c.planner;
  o << "\n[planner]\n";
  o << "lambda = " << fmt(p.lambda) << "\n";
  o << "depth_min = " << fmt(p.depth_min) << "\n";
  o << "depth_max = " << fmt(p.depth_max) << "\n";
  o << "depth_step = " << fmt(p.depth_step) << "\n";
  o << "mu_cavity = " << fmt(p.mu_cavity) << "\n";
  o << "cone_edges = " << p.cone_edges << "\n";
  if (p.moment_scale_mode == MomentScaleMode::Explicit) o << "moment_scale = " << fmt(p.moment_scale) << "\n";
  else o << "moment_scale = \"bounding_sphere\"\n";
  o << "gravity = " << fmt(p.gravity) << "\n";
  o << "contact_tol = " << fmt(p.contact_tol) << "\n";
  o << "minkowski_cap = " << p.minkowski_cap << "\n";
  o << "apex_xy = [" << fmt(p.apex_xy.x()) << ", " << fmt(p.apex_xy.y()) << "]\n";
  if (p.orientation.mode == CavityOrientation::Mode::EqualAngle) o << "orientation = \"equal_angle\"\n";
  else
    o << "orientation = [" << fmt(p.orientation.angles_deg[0]) << ", " << fmt(p.orientation.angles_deg[1])
      << ", " << fmt(p.orientation.angles_deg[2]) << "]\n";
  o << "yaw_deg = " << fmt(p.orientation.yaw_deg) << "\n";
  o << "fillet_radius = " << fmt(p.fillet_radius) << "\n";
  o << "yaw_samples = " << p.yaw_samples << "\n";
  o << "settle_steps = " << p.settle_steps << "\n";
  o << "grasp_samples = " << p.grasp_samples << "\n";
  o << "mu_finger = " << fmt(p.mu_finger) << "\n";
  const auto& r = c.registration;
  o << "\n[registration]\n";
  o << "ransac_iterations = " << r.ransac_iterations << "\n";
  o << "ransac_sample_size = " << r.ransac_sample_size << "\n";
  o << "inlier_threshold = " << fmt(r.inlier_threshold) << "\n";
  o << "icp_max_iterations = " << r.icp_max_iterations << "\n";
  o << "icp_convergence = " << fmt(r.icp_convergence) << "\n";
  o << "max_correspondence = " << fmt(r.max_correspondence) << "\n";
  o << "feature_radius = " << fmt(r.feature_radius) << "\n";
  o << "target_spacing = " << fmt(r.target_spacing) << "\n";
  o << "\n[success]\n";
  o << "position_tolerance = " << fmt(c.success.position_tolerance) << "\n";
  o << "orientation_tolerance = " << fmt(c.success.orientation_tolerance) << "\n";
  o << "\n[stamp]\n";
  o << "handle_length = " << fmt(c.stamp.handle_length) << "\n";
  o << "handle_radius = " << fmt(c.stamp.handle_radius) << "\n";
  o << "handle_segments = " << c.stamp.handle_segments << "\n";
  return o.str();
}

namespace {

nlohmann::ordered_json to_json(const toml::node& n) {
  if (auto t = n.as_table()) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = to_json(v);
    return j;
  }
  if (auto a = n.as_array()) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& v : *a) j.push_back(to_json(v));
    return j;
  }
  if (auto i = n.as_integer()) return i->get();
  if (auto f = n.as_floating_point()) return f->get();
  if (auto b = n.as_boolean()) return b->get();
  if (auto s = n.as_string()) return s->get();
  return nullptr;
}

}  // namespace

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  return to_json(toml::parse(dump_config(cfg)));
}

RigidPart load_part(const RunConfig& cfg) {
  RigidPart part = RigidPart::from_mesh(read_mesh(cfg.object_mesh_path), cfg.object_mass);
  if (cfg.object_com) part.com = *cfg.object_com;
  return part;
}

}  // namespace softjig
