#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "softjig/config.hpp"
#include "softjig/mesh_io.hpp"
#include "softjig/report.hpp"

namespace fs = std::filesystem;
using namespace softjig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitInvalid = 3;

struct Options {
  std::string config;
  std::optional<std::int64_t> seed;
  std::optional<std::string> out;
  std::optional<double> lambda;
  double depth = 0.0;
  std::string source, target;
  std::string measured, reference, object_id, verdict_name = "verdict";
  std::string verdicts;
};

// Writes through a temporary file so a failed run never leaves a truncated output.
void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_stl(const fs::path& path, const TriMesh& mesh) {
  const fs::path tmp = path.string() + ".tmp";
  write_stl_binary(tmp, mesh, "softjig stamp tool");
  fs::rename(tmp, path);
}

RunConfig resolve(const Options& o, bool required) {
  RunConfig cfg;
  if (!o.config.empty()) cfg = load_config(o.config);
  else if (required) throw ConfigError("--config is required for this subcommand");
  if (o.seed) {
    if (*o.seed < 0) throw ConfigError("--seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*o.seed);
    cfg.planner.seed = cfg.seed;
  }
  if (o.lambda) {
    if (!(*o.lambda >= 0.0 && *o.lambda <= 1.0)) throw ConfigError("--lambda must lie in [0, 1]");
    cfg.planner.lambda = *o.lambda;
  }
  if (o.out) cfg.output_dir = *o.out;
  return cfg;
}

fs::path out_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  return cfg.output_dir;
}

double checked_depth(const Options& o, const RunConfig& cfg) {
  if (!(o.depth > 0.0) || o.depth > cfg.jig.jig_thickness)
    throw ConfigError("--depth must lie in (0, jig_thickness]");
  return quantize_length(o.depth);
}

// Handle radius reduced to fit the stamp base when the configured one is too wide.
TriMesh stamp_mesh(const CavitySpec& cavity, const StampSpec& stamp) {
  const Vec3 a = cavity.rim[0], b = cavity.rim[1], c = cavity.rim[2];
  const double area = 0.5 * (b - a).cross(c - a).norm();
  const double inradius = 2.0 * area / ((b - a).norm() + (c - b).norm() + (a - c).norm()) - cavity.fillet_radius;
  double radius = stamp.handle_radius;
  double length = stamp.handle_length;
  if (radius >= inradius) {
    radius = 0.5 * inradius;
    std::cerr << "note: handle radius reduced to " << format_number(radius) << " mm to fit the stamp base\n";
  }
  if (!(radius > 0.0)) length = 0.0;
  return build_stamp_tool(cavity, length, radius, stamp.handle_segments);
}

CavitySpec cavity_at(const RunConfig& cfg, double depth) {
  return build_cavity(depth, cfg.planner.apex_xy, cfg.planner.orientation, cfg.planner.fillet_radius, cfg.jig);
}

std::size_t best_index(const PlanResult& plan) {
  for (std::size_t i = 0; i < plan.sweep.size(); ++i)
    if (plan.sweep[i].depth == plan.best_depth) return i;
  return plan.sweep.size();
}

int cmd_plan(const Options& o, bool sweep_only) {
  const RunConfig cfg = resolve(o, true);
  const RigidPart part = load_part(cfg);
  const PlanResult plan = optimize_depth(part, cfg.planner, cfg.gripper, cfg.jig);

  std::ostringstream csv;
  write_sweep_csv(csv, plan.sweep, best_index(plan), cfg);
  const fs::path dir = out_dir(cfg);
  if (!sweep_only) {
    const TriMesh stamp = stamp_mesh(plan.cavity, cfg.stamp);
    write_file(dir / "plan.json", plan_to_json(plan, cfg, part).dump(2) + "\n");
    write_file(dir / "resolved_config.toml", dump_config(cfg));
    write_stl(dir / "stamp.stl", stamp);
  }
  write_file(dir / "sweep.csv", csv.str());
  const auto& best = plan.sweep[best_index(plan)];
  std::cout << "D* = " << format_number(plan.best_depth) << " mm (lambda " << format_number(plan.lambda)
            << ", M = " << format_number(best.margin) << ", N_g = " << best.grasp_count << "/"
            << plan.grasp_total << ", " << to_string(best.kind) << ")\n";
  return kExitOk;
}

int cmd_stamp(const Options& o) {
  const RunConfig cfg = resolve(o, true);
  const CavitySpec cavity = cavity_at(cfg, checked_depth(o, cfg));
  const TriMesh stamp = stamp_mesh(cavity, cfg.stamp);
  write_stl(out_dir(cfg) / "stamp.stl", stamp);
  std::cout << "stamp.stl: " << stamp.triangles().size() << " triangles, depth " << format_number(cavity.depth)
            << " mm\n";
  return kExitOk;
}

int cmd_stability(const Options& o) {
  const RunConfig cfg = resolve(o, true);
  const RigidPart part = load_part(cfg);
  const CavitySpec cavity = cavity_at(cfg, checked_depth(o, cfg));
  const auto cands = candidate_spps(part, cavity, cfg.planner);
  nlohmann::ordered_json j = run_header(cfg);
  j["depth"] = cavity.depth;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& c : cands) {
    nlohmann::ordered_json e;
    e["pose"] = pose_to_json(c.pose);
    e["kind"] = to_string(c.verdict.kind);
    e["margin"] = c.margin;
    e["raw_margin"] = c.verdict.margin;
    std::set<int> faces;
    for (const auto& p : c.verdict.contacts) faces.insert(p.face_id);
    e["contact_count"] = c.verdict.contacts.size();
    e["contact_faces"] = faces;
    list.push_back(e);
  }
  j["candidates"] = list;
  write_file(out_dir(cfg) / "stability.json", j.dump(2) + "\n");
  std::cout << cands.size() << " stable placement(s) at D = " << format_number(cavity.depth) << " mm; best "
            << to_string(cands.front().verdict.kind) << " with margin " << format_number(cands.front().margin)
            << " N\n";
  return kExitOk;
}

int cmd_grasps(const Options& o) {
  const RunConfig cfg = resolve(o, true);
  const RigidPart part = load_part(cfg);
  const auto grasps = generate_grasps(part.mesh, cfg.gripper, cfg.planner.mu_finger, cfg.planner.grasp_samples,
                                      cfg.planner.seed);
  std::set<int> pairs;
  for (const auto& g : grasps) pairs.insert(g.pair_id);
  nlohmann::ordered_json j = run_header(cfg);
  j["antipodal_pairs"] = pairs.size();
  j["candidates"] = grasps.size();
  if (o.depth > 0.0) {
    const DepthEvaluation e = evaluate_depth(part, checked_depth(o, cfg), cfg.planner, cfg.gripper, cfg.jig, grasps);
    if (!e.valid) throw NoStablePose("no stable placement at depth " + format_number(e.depth));
    j["depth"] = e.depth;
    j["feasible_pairs"] = e.grasp_count;
    j["spp"] = pose_to_json(e.spp);
    std::cout << "N_g = " << e.grasp_count << " of " << pairs.size() << " pairs at D = " << format_number(e.depth)
              << " mm\n";
  } else {
    std::cout << pairs.size() << " antipodal pairs, " << grasps.size() << " candidates\n";
  }
  write_file(out_dir(cfg) / "grasps.json", j.dump(2) + "\n");
  return kExitOk;
}

int cmd_register(const Options& o) {
  const RunConfig cfg = resolve(o, true);
  const PointCloud source = read_xyz(o.source);
  if (source.empty()) throw IoError(o.source + ": no points");
  RegistrationResult r;
  std::string target_name;
  if (!o.target.empty()) {
    const PointCloud target = read_xyz(o.target);
    if (target.empty()) throw IoError(o.target + ": no points");
    const Pose coarse = ransac_align(source, target, cfg.registration, cfg.seed);
    r = icp_refine(source, target, coarse, cfg.registration);
    target_name = o.target;
  } else {
    const CavitySpec cavity = cavity_at(cfg, checked_depth(o, cfg));
    r = shape_error(source, cavity, cfg.registration, cfg.seed);
    target_name = "cavity depth " + format_number(cavity.depth) + " mm";
  }
  write_file(out_dir(cfg) / "register.json", registration_to_json(r, cfg, o.source, target_name).dump(2) + "\n");
  std::cout << "rmse " << format_number(r.rmse) << " mm over " << r.iterations_used << " ICP iteration(s); "
            << (r.rmse <= kReportedShapeErrorMm ? "within" : "above") << " the reported 4.4 mm bound\n";
  return kExitOk;
}

int cmd_check_pose(const Options& o) {
  const RunConfig cfg = resolve(o, false);
  const Pose measured = parse_pose_spec(o.measured);
  const Pose reference = parse_pose_spec(o.reference);
  const PoseCheck c = check_pose(measured, reference, cfg.success);
  std::string id = o.object_id;
  if (!id.empty()) {
    const ObjectInfo* info = find_object(id);
    if (info) id = std::string(1, info->id);
  }
  const auto j = verdict_to_json(c, measured, reference, id, cfg.success);
  write_file(out_dir(cfg) / (o.verdict_name + ".json"), j.dump(2) + "\n");
  std::cout << (c.success ? "SUCCESS" : "FAILURE") << " position " << format_number(c.position_error)
            << " mm, orientation " << format_number(c.orientation_error) << " deg\n";
  return kExitOk;
}

int cmd_report(const Options& o) {
  const RunConfig cfg = resolve(o, false);
  const auto rows = aggregate_verdicts(read_verdicts(o.verdicts));
  std::ostringstream csv;
  write_report_csv(csv, rows, o.verdicts);
  write_file(out_dir(cfg) / "report.csv", csv.str());
  for (const auto& r : rows)
    std::cout << r.object_id << " " << r.type << ": " << r.successes << "/" << r.trials << " ("
              << format_number(r.rate_percent) << "%)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softjig: cavity depth planning and evaluation for a jamming regrasp jig"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "TOML run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Override the config seed");
  app.add_option("--out", o.out, "Output directory (overrides output_dir)");
  app.add_option("--lambda", o.lambda, "Override planner.lambda, in [0, 1]");
  app.fallthrough();

  auto* plan = app.add_subcommand("plan", "Optimise the cavity depth; writes plan.json, sweep.csv, stamp.stl");
  auto* sweep = app.add_subcommand("sweep", "Evaluate and score every grid depth; writes sweep.csv");
  auto* stamp = app.add_subcommand("stamp", "Stamp tool mesh for one depth; writes stamp.stl");
  stamp->add_option("--depth", o.depth, "Cavity depth in mm")->required();
  auto* stability = app.add_subcommand("stability", "Stable placements at one depth; writes stability.json");
  stability->add_option("--depth", o.depth, "Cavity depth in mm")->required();
  auto* grasps = app.add_subcommand("grasps", "Antipodal grasps, optionally N_g at a depth; writes grasps.json");
  grasps->add_option("--depth", o.depth, "Cavity depth in mm");
  auto* reg = app.add_subcommand("register", "Shape error of a scanned cavity; writes register.json");
  reg->add_option("--source", o.source, "Measured cloud (.xyz)")->required()->check(CLI::ExistingFile);
  auto* tgt = reg->add_option("--target", o.target, "Target cloud (.xyz)")->check(CLI::ExistingFile);
  reg->add_option("--depth", o.depth, "Compare against the planned cavity of this depth")->excludes(tgt);
  auto* check = app.add_subcommand("check-pose", "Success check within 5 mm and 5 deg; writes <name>.json");
  check->add_option("--measured", o.measured, "x,y,z,roll,pitch,yaw (mm, deg)")->required();
  check->add_option("--reference", o.reference, "x,y,z,roll,pitch,yaw (mm, deg)")->required();
  check->add_option("--object", o.object_id, "Object ID a-j");
  check->add_option("--name", o.verdict_name, "Verdict file name without extension");
  auto* report = app.add_subcommand("report", "Success rate per object; writes report.csv");
  report->add_option("--verdicts", o.verdicts, "Directory of check-pose verdicts")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*plan) return cmd_plan(o, false);
    if (*sweep) return cmd_plan(o, true);
    if (*stamp) return cmd_stamp(o);
    if (*stability) return cmd_stability(o);
    if (*grasps) return cmd_grasps(o);
    if (*reg) {
      if (o.target.empty() && !(o.depth > 0.0)) throw ConfigError("register needs --target or --depth");
      return cmd_register(o);
    }
    if (*check) return cmd_check_pose(o);
    if (*report) return cmd_report(o);
  } catch (const NoStablePose& e) {
    std::cerr << "planning infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const NoConsensus& e) {
    std::cerr << "registration failed: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Diverged& e) {
    std::cerr << "registration failed: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const CapExceeded& e) {
    std::cerr << "planning infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
