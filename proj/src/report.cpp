#include "softjig/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

namespace softjig {

PoseCheck check_pose(const Pose& measured, const Pose& reference, const SuccessCriterion& criterion) {
  criterion.validate();
  PoseCheck c;
  c.position_error = (measured.translation() - reference.translation()).norm();
  c.orientation_error = rad2deg(Pose::rotation_angle_between(measured, reference));
  c.success = c.position_error <= criterion.position_tolerance + kThresholdSlack &&
              c.orientation_error <= criterion.orientation_tolerance + kThresholdSlack;
  return c;
}

Pose parse_pose_spec(std::string_view spec) {
  const auto bad = [&] {
    return InvalidArgument("pose must be six numbers x,y,z,roll,pitch,yaw; got '" + std::string(spec) + "'");
  };
  std::vector<double> v;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = std::min(spec.find(',', pos), spec.size());
    std::string_view item = spec.substr(pos, end - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double x = 0.0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), x);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size() || !std::isfinite(x))
      throw bad();
    v.push_back(x);
    if (end == spec.size()) break;
    pos = end + 1;
  }
  if (v.size() != 6) throw bad();
  return Pose::from_rpy(deg2rad(v[3]), deg2rad(v[4]), deg2rad(v[5]), Vec3(v[0], v[1], v[2]));
}

nlohmann::ordered_json pose_to_json(const Pose& pose) {
  nlohmann::ordered_json j;
  const Vec3& t = pose.translation();
  j["translation"] = {t.x(), t.y(), t.z()};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int r = 0; r < 3; ++r)
    rows.push_back({pose.rotation()(r, 0), pose.rotation()(r, 1), pose.rotation()(r, 2)});
  j["rotation"] = rows;
  return j;
}

Pose pose_from_json(const nlohmann::json& j) {
  try {
    const auto& t = j.at("translation");
    const auto& r = j.at("rotation");
    if (t.size() != 3 || r.size() != 3) throw InvalidArgument("pose needs 3 translation entries and 3 rotation rows");
    Mat3 m;
    for (int a = 0; a < 3; ++a) {
      if (r[a].size() != 3) throw InvalidArgument("rotation rows need 3 entries");
      for (int b = 0; b < 3; ++b) m(a, b) = r[a][b].get<double>();
    }
    return Pose(m, Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed pose: ") + e.what());
  }
}

nlohmann::ordered_json run_header(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["tool"] = "softjig";
  j["version"] = kVersion;
  j["seed"] = cfg.seed;
  j["config"] = config_to_json(cfg);
  return j;
}

namespace {

nlohmann::ordered_json vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

nlohmann::ordered_json verdict_json(const StabilityVerdict& v) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(v.kind);
  j["margin"] = v.margin;
  j["margin_unit"] = v.kind == StabilityKind::WrenchStable ? "N" : "mm";
  nlohmann::ordered_json contacts = nlohmann::ordered_json::array();
  for (const auto& c : v.contacts) {
    nlohmann::ordered_json cj;
    cj["position"] = vec(c.position);
    cj["normal"] = vec(c.normal);
    cj["face"] = c.face_id;
    cj["penetration"] = c.penetration;
    contacts.push_back(cj);
  }
  j["contacts"] = contacts;
  return j;
}

}  // namespace

nlohmann::ordered_json plan_to_json(const PlanResult& plan, const RunConfig& cfg, const RigidPart& part) {
  nlohmann::ordered_json j = run_header(cfg);
  nlohmann::ordered_json obj;
  obj["mesh"] = cfg.object_mesh_path.generic_string();
  obj["id"] = cfg.object_id;
  obj["mass_kg"] = part.mass_kg;
  obj["com"] = vec(part.com);
  j["object"] = obj;

  nlohmann::ordered_json r;
  r["best_depth"] = plan.best_depth;
  r["lambda"] = plan.lambda;
  r["spp"] = pose_to_json(plan.spp);
  r["ddp"] = pose_to_json(plan.ddp);
  r["drop_height"] = plan.ddp.translation().z() - plan.spp.translation().z();
  r["stamp_transform"] = pose_to_json(plan.stamp_transform);
  r["verdict"] = verdict_json(plan.verdict_at_best);
  r["grasp_total"] = plan.grasp_total;
  const auto best = std::find_if(plan.sweep.begin(), plan.sweep.end(),
                                 [&](const DepthEvaluation& e) { return e.depth == plan.best_depth; });
  if (best != plan.sweep.end()) {
    r["margin"] = best->margin;
    r["grasp_count"] = best->grasp_count;
    r["score"] = best->score;
  }
  j["result"] = r;

  nlohmann::ordered_json cav;
  cav["depth"] = plan.cavity.depth;
  cav["apex"] = vec(plan.cavity.apex);
  nlohmann::ordered_json axes = nlohmann::ordered_json::array(), rim = nlohmann::ordered_json::array();
  for (int i = 0; i < 3; ++i) {
    axes.push_back(vec(plan.cavity.axis(i)));
    rim.push_back(vec(plan.cavity.rim[i]));
  }
  cav["axes"] = axes;
  cav["rim"] = rim;
  cav["frame"] = pose_to_json(plan.cavity.frame);
  j["cavity"] = cav;
  return j;
}

nlohmann::ordered_json registration_to_json(const RegistrationResult& result, const RunConfig& cfg,
                                            const std::string& source, const std::string& target) {
  nlohmann::ordered_json j = run_header(cfg);
  j["source"] = source;
  j["target"] = target;
  nlohmann::ordered_json r;
  r["transform"] = pose_to_json(result.transform);
  r["rmse"] = result.rmse;
  r["initial_rmse"] = result.initial_rmse;
  r["inlier_fraction"] = result.inlier_fraction;
  r["iterations_used"] = result.iterations_used;
  r["reported_bound_mm"] = kReportedShapeErrorMm;
  r["within_reported_bound"] = result.rmse <= kReportedShapeErrorMm;
  j["result"] = r;
  return j;
}

nlohmann::ordered_json verdict_to_json(const PoseCheck& check, const Pose& measured, const Pose& reference,
                                       const std::string& object_id, const SuccessCriterion& criterion) {
  nlohmann::ordered_json j;
  j["tool"] = "softjig";
  j["version"] = kVersion;
  j["object_id"] = object_id;
  j["success"] = check.success;
  j["position_error_mm"] = check.position_error;
  j["orientation_error_deg"] = check.orientation_error;
  j["position_tolerance_mm"] = criterion.position_tolerance;
  j["orientation_tolerance_deg"] = criterion.orientation_tolerance;
  j["measured"] = pose_to_json(measured);
  j["reference"] = pose_to_json(reference);
  return j;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_sweep_csv(std::ostream& out, const std::vector<DepthEvaluation>& sweep, std::size_t best,
                     const RunConfig& cfg) {
  out << "# softjig " << kVersion << " depth sweep\n";
  out << "# seed=" << cfg.seed << " lambda=" << format_number(cfg.planner.lambda) << "\n";
  out << "# config=" << config_to_json(cfg).dump() << "\n";
  out << "depth,valid,kind,margin,raw_margin,grasp_count,margin_norm,count_norm,score,best\n";
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& e = sweep[i];
    out << format_number(e.depth) << ',' << (e.valid ? 1 : 0) << ',' << to_string(e.kind) << ',';
    if (e.valid)
      out << format_number(e.margin) << ',' << format_number(e.raw_margin) << ',' << e.grasp_count << ','
          << format_number(e.margin_norm) << ',' << format_number(e.count_norm) << ','
          << format_number(e.score);
    else
      out << ",,,,,";
    out << ',' << (i == best ? 1 : 0) << '\n';
  }
}

std::vector<Verdict> read_verdicts(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  if (files.empty()) throw IoError("no verdict files (*.json) in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<Verdict> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw IoError("cannot read " + f.string());
    try {
      const auto j = nlohmann::json::parse(in);
      Verdict v;
      v.object_id = j.value("object_id", std::string());
      v.success = j.at("success").get<bool>();
      out.push_back(std::move(v));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed verdict " + f.string() + ": " + e.what());
    }
  }
  return out;
}

std::vector<SuccessRow> aggregate_verdicts(const std::vector<Verdict>& verdicts) {
  std::map<std::string, SuccessRow> rows;
  for (const auto& v : verdicts) {
    const std::string id = v.object_id.empty() ? "-" : v.object_id;
    SuccessRow& row = rows[id];
    row.object_id = id;
    if (const ObjectInfo* info = find_object(id)) row.type = std::string(info->type);
    ++row.trials;
    row.successes += v.success ? 1 : 0;
  }
  std::vector<SuccessRow> out;
  for (auto& [id, row] : rows) {
    row.rate_percent = 100.0 * row.successes / row.trials;
    out.push_back(row);
  }
  return out;
}

void write_report_csv(std::ostream& out, const std::vector<SuccessRow>& rows, const std::string& source) {
  int trials = 0;
  for (const auto& r : rows) trials += r.trials;
  out << "# softjig " << kVersion << " success report\n";
  out << "# source=" << source << " verdicts=" << trials << "\n";
  out << "object_id,type,trials,successes,success_rate_percent\n";
  for (const auto& r : rows)
    out << r.object_id << ',' << r.type << ',' << r.trials << ',' << r.successes << ','
        << format_number(r.rate_percent) << '\n';
}

}  // namespace softjig
