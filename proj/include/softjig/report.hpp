#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "softjig/config.hpp"
#include "softjig/planner.hpp"
#include "softjig/registration.hpp"

namespace softjig {

inline constexpr const char* kVersion = "0.1.0";

/// Absolute slack on the closed thresholds: 5 degrees built from an axis-angle
/// pose reads back as 5 + a few ulp.
inline constexpr double kThresholdSlack = 1e-9;

struct PoseCheck {
  bool success = false;
  double position_error = 0.0;     ///< mm
  double orientation_error = 0.0;  ///< degrees, geodesic
};

/// Success iff position error <= position_tolerance and geodesic angle <= orientation_tolerance.
PoseCheck check_pose(const Pose& measured, const Pose& reference, const SuccessCriterion& criterion = {});

/// "x,y,z,roll,pitch,yaw" in mm and degrees, applied as Rz(yaw) Ry(pitch) Rx(roll).
Pose parse_pose_spec(std::string_view spec);

nlohmann::ordered_json pose_to_json(const Pose& pose);
/// Accepts {"translation": [3], "rotation": [[3],[3],[3]]}; InvalidArgument otherwise.
Pose pose_from_json(const nlohmann::json& j);

/// Reproducibility header: tool version, seed and the fully resolved config.
nlohmann::ordered_json run_header(const RunConfig& cfg);

nlohmann::ordered_json plan_to_json(const PlanResult& plan, const RunConfig& cfg, const RigidPart& part);
nlohmann::ordered_json registration_to_json(const RegistrationResult& result, const RunConfig& cfg,
                                            const std::string& source, const std::string& target);
nlohmann::ordered_json verdict_to_json(const PoseCheck& check, const Pose& measured, const Pose& reference,
                                       const std::string& object_id, const SuccessCriterion& criterion);

/// Comment lines ("# ...") carrying the run header, then one row per depth.
void write_sweep_csv(std::ostream& out, const std::vector<DepthEvaluation>& sweep, std::size_t best,
                     const RunConfig& cfg);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

struct Verdict {
  std::string object_id;
  bool success = false;
};

/// Every *.json verdict file in `dir`. IoError when the directory is missing,
/// holds no verdicts, or a file cannot be parsed.
std::vector<Verdict> read_verdicts(const std::filesystem::path& dir);

struct SuccessRow {
  std::string object_id;
  std::string type;  ///< catalog name, empty for IDs outside the catalog
  int trials = 0;
  int successes = 0;
  double rate_percent = 0.0;
};

/// One row per object ID, sorted by ID.
std::vector<SuccessRow> aggregate_verdicts(const std::vector<Verdict>& verdicts);

void write_report_csv(std::ostream& out, const std::vector<SuccessRow>& rows, const std::string& source);

}  // namespace softjig
