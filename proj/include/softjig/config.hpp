#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "softjig/cavity.hpp"
#include "softjig/grasp.hpp"
#include "softjig/planner.hpp"
#include "softjig/registration.hpp"

namespace softjig {

/// One row of the evaluated object set: ID (a)-(j), type, mass and W x L x H.
struct ObjectInfo {
  char id;
  std::string_view type;
  double mass_g;
  std::array<double, 3> size_mm;
};

const std::array<ObjectInfo, 10>& object_catalog();
/// Lookup by single-letter ID ("g" or "(g)"); nullptr when unknown.
const ObjectInfo* find_object(std::string_view id);

/// Pick-and-place success thresholds, both closed.
struct SuccessCriterion {
  double position_tolerance = 5.0;     ///< mm
  double orientation_tolerance = 5.0;  ///< degrees

  void validate() const;
};

/// Stamp handle used when writing the stamp tool mesh.
struct StampSpec {
  double handle_length = 20.0;  ///< mm
  double handle_radius = 3.0;   ///< mm, reduced to half the rim inradius when larger
  int handle_segments = 8;
};

struct RunConfig {
  std::filesystem::path object_mesh_path;  ///< absolute after loading
  std::string object_id;                   ///< optional catalog ID
  double object_mass = 0.0;                ///< kg (the file gives grams)
  std::optional<Vec3> object_com;          ///< mm, mesh frame; solid centroid when absent
  JigSpec jig;
  GripperSpec gripper;
  PlannerConfig planner;
  RegistrationParams registration;
  SuccessCriterion success;
  StampSpec stamp;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";

  /// Cross-field checks; field-level ones happen while parsing.
  void validate() const;
};

/// Parses TOML text. Relative paths resolve against `base_dir`. Errors are
/// ConfigError with a "<source>:<line>: <field>: <reason>" message.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                       const std::string& source_name = "config");

/// Reads and parses a config file; IoError when it cannot be read.
RunConfig load_config(const std::filesystem::path& path);

/// TOML that parse_config maps back to the same RunConfig (output_dir excluded).
std::string dump_config(const RunConfig& cfg);

/// The dump_config content as JSON, keys sorted within each table.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

/// The part described by the config: mesh, mass and centre of mass.
RigidPart load_part(const RunConfig& cfg);

}  // namespace softjig
