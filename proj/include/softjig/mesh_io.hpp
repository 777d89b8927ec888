#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "softjig/geom.hpp"

namespace softjig {

/// Receives non-fatal loader diagnostics (skipped records, dropped slivers).
using WarningSink = std::function<void(const std::string&)>;

/// Binary or ASCII STL; coincident vertices are welded.
TriMesh read_stl(const std::filesystem::path& path, const WarningSink& warn = {});
/// OBJ `v` and `f` records; polygons are fan-triangulated, other records ignored.
TriMesh read_obj(const std::filesystem::path& path, const WarningSink& warn = {});
/// Dispatch on extension (.stl / .obj).
TriMesh read_mesh(const std::filesystem::path& path, const WarningSink& warn = {});

void write_stl_binary(const std::filesystem::path& path, const TriMesh& mesh,
                      const std::string& header = "softjig");

/// Whitespace-separated `x y z` per line, millimetres. `#` starts a comment.
PointCloud read_xyz(const std::filesystem::path& path);
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace softjig
