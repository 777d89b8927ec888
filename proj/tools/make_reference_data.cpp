// Regenerates the files in data/: reference meshes and a synthetic cavity scan.
#include <iostream>
#include <random>

#include "softjig/cavity.hpp"
#include "softjig/mesh_io.hpp"
#include "softjig/shapes.hpp"

using namespace softjig;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_reference_data <data-dir>\n";
    return 3;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);

  // Object (g) of the evaluated set: a 10 mm x 75 mm shaft.
  write_stl_binary(dir / "shaft.stl", make_cylinder(10.0, 75.0, 24), "softjig reference shaft");
  // 40 mm cube; printed in PLA (1.24 g/cm^3) it weighs 79.36 g.
  write_stl_binary(dir / "cube40.stl", make_box(Vec3::Constant(40.0)), "softjig reference cube");

  // Scan of a 20 mm EqualAngle cavity: 1.5 mm pitch, displaced, 0.5 mm noise.
  const CavitySpec cavity = build_cavity(20.0, Vec2::Zero(), CavityOrientation::equal_angle(), 0.0, JigSpec{});
  PointCloud scan = cavity_point_cloud(cavity, 1.5).transformed(
      Pose::from_rpy(deg2rad(5.0), deg2rad(-3.0), deg2rad(20.0), Vec3(4.0, -2.0, 1.0)));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (auto& p : scan.points) p += Vec3(noise(rng), noise(rng), noise(rng));
  write_xyz(dir / "cavity_scan.xyz", scan);
  return 0;
}
