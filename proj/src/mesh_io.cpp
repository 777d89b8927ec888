#include "softjig/mesh_io.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

namespace softjig {

namespace {

class MeshBuilder {
 public:
  explicit MeshBuilder(const WarningSink& warn) : warn_(warn) {}

  int vertex(const Vec3& p) {
    auto key = std::array<double, 3>{p.x(), p.y(), p.z()};
    auto [it, inserted] = index_.emplace(key, static_cast<int>(verts_.size()));
    if (inserted) verts_.push_back(p);
    return it->second;
  }

  int raw_vertex(const Vec3& p) {
    verts_.push_back(p);
    return static_cast<int>(verts_.size()) - 1;
  }

  void triangle(int a, int b, int c) {
    const Vec3& pa = verts_[a];
    double area = 0.5 * (verts_[b] - pa).cross(verts_[c] - pa).norm();
    if (a == b || b == c || a == c || !(area >= TriMesh::kMinTriangleArea)) {
      ++skipped_;
      return;
    }
    tris_.push_back({a, b, c});
  }

  TriMesh finish(const std::filesystem::path& path) {
    if (skipped_ > 0 && warn_)
      warn_(path.string() + ": dropped " + std::to_string(skipped_) + " degenerate triangle(s)");
    if (tris_.empty()) throw IoError(path.string() + ": no triangles");
    // Drop vertices no triangle references.
    std::vector<int> remap(verts_.size(), -1);
    std::vector<Vec3> used;
    for (auto& t : tris_) {
      for (int& i : t) {
        if (remap[i] < 0) {
          remap[i] = static_cast<int>(used.size());
          used.push_back(verts_[i]);
        }
        i = remap[i];
      }
    }
    return TriMesh(std::move(used), std::move(tris_));
  }

 private:
  const WarningSink& warn_;
  std::map<std::array<double, 3>, int> index_;
  std::vector<Vec3> verts_;
  std::vector<TriMesh::Triangle> tris_;
  int skipped_ = 0;
};

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool looks_binary_stl(const std::string& data) {
  if (data.size() < 84) return false;
  std::uint32_t count = 0;
  std::memcpy(&count, data.data() + 80, 4);
  if (84 + 50ull * count == data.size()) return true;
  return data.compare(0, 5, "solid") != 0;
}

float read_f32(const char* p) {
  float f;
  std::memcpy(&f, p, 4);
  return f;
}

}  // namespace

TriMesh read_stl(const std::filesystem::path& path, const WarningSink& warn) {
  std::string data = read_all(path);
  MeshBuilder mb(warn);
  if (looks_binary_stl(data)) {
    if (data.size() < 84) throw IoError(path.string() + ": truncated STL header");
    std::uint32_t count = 0;
    std::memcpy(&count, data.data() + 80, 4);
    if (data.size() < 84 + 50ull * count) throw IoError(path.string() + ": truncated STL body");
    for (std::uint32_t i = 0; i < count; ++i) {
      const char* rec = data.data() + 84 + 50ull * i;
      std::array<int, 3> idx{};
      for (int k = 0; k < 3; ++k) {
        const char* v = rec + 12 + 12 * k;
        idx[k] = mb.vertex(Vec3(read_f32(v), read_f32(v + 4), read_f32(v + 8)));
      }
      mb.triangle(idx[0], idx[1], idx[2]);
    }
    return mb.finish(path);
  }

  std::istringstream in(data);
  std::string token;
  std::vector<int> facet;
  while (in >> token) {
    if (token == "vertex") {
      double x, y, z;
      if (!(in >> x >> y >> z)) throw IoError(path.string() + ": malformed vertex record");
      facet.push_back(mb.vertex(Vec3(x, y, z)));
    } else if (token == "endfacet") {
      if (facet.size() != 3) throw IoError(path.string() + ": facet without three vertices");
      mb.triangle(facet[0], facet[1], facet[2]);
      facet.clear();
    }
  }
  return mb.finish(path);
}

TriMesh read_obj(const std::filesystem::path& path, const WarningSink& warn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  MeshBuilder mb(warn);
  std::vector<int> ids;
  std::map<std::string, int> ignored;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed vertex");
      ids.push_back(mb.raw_vertex(Vec3(x, y, z)));
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string ref;
      while (ls >> ref) {
        const std::string head = ref.substr(0, ref.find('/'));
        int idx = 0;
        auto res = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (head.empty() || res.ec != std::errc() || res.ptr != head.data() + head.size())
          throw IoError(path.string() + ":" + std::to_string(lineno) + ": bad face index '" + ref + "'");
        idx = idx < 0 ? static_cast<int>(ids.size()) + idx : idx - 1;
        if (idx < 0 || idx >= static_cast<int>(ids.size()))
          throw IoError(path.string() + ":" + std::to_string(lineno) + ": face index out of range");
        poly.push_back(ids[idx]);
      }
      if (poly.size() < 3)
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": face with < 3 vertices");
      if (poly.size() > 3) ++ignored["non-triangular face (fan-triangulated)"];
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) mb.triangle(poly[0], poly[k], poly[k + 1]);
    } else {
      ++ignored["'" + tag + "' record"];
    }
  }
  if (warn) {
    for (const auto& [what, n] : ignored)
      warn(path.string() + ": ignored " + std::to_string(n) + " " + what);
  }
  return mb.finish(path);
}

TriMesh read_mesh(const std::filesystem::path& path, const WarningSink& warn) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (!std::filesystem::exists(path)) throw IoError("mesh not found: " + path.string());
  if (ext == ".stl") return read_stl(path, warn);
  if (ext == ".obj") return read_obj(path, warn);
  throw IoError("unsupported mesh format: " + path.string());
}

void write_stl_binary(const std::filesystem::path& path, const TriMesh& mesh,
                      const std::string& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  char head[80] = {};
  std::memcpy(head, header.data(), std::min<std::size_t>(header.size(), 80));
  out.write(head, 80);
  auto count = static_cast<std::uint32_t>(mesh.triangles().size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  auto put = [&](const Vec3& v) {
    float f[3] = {static_cast<float>(v.x()), static_cast<float>(v.y()), static_cast<float>(v.z())};
    out.write(reinterpret_cast<const char*>(f), 12);
  };
  for (std::size_t i = 0; i < mesh.triangles().size(); ++i) {
    put(mesh.triangle_normal(i));
    for (int idx : mesh.triangles()[i]) put(mesh.vertices()[idx]);
    const char attr[2] = {0, 0};
    out.write(attr, 2);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

PointCloud read_xyz(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  PointCloud cloud;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x)) continue;
    if (!(ls >> y >> z))
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected 'x y z'");
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

void write_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : cloud.points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace softjig
