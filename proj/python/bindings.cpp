#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "softjig/config.hpp"
#include "softjig/mesh_io.hpp"
#include "softjig/planner.hpp"
#include "softjig/registration.hpp"
#include "softjig/report.hpp"

namespace py = pybind11;
using namespace softjig;

namespace {

PointCloud to_cloud(const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>& pts) {
  PointCloud c;
  c.points.reserve(pts.rows());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) c.points.emplace_back(pts(i, 0), pts(i, 1), pts(i, 2));
  return c;
}

Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> to_array(const PointCloud& c) {
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> out(c.size(), 3);
  for (std::size_t i = 0; i < c.size(); ++i) out.row(i) = c.points[i].transpose();
  return out;
}

CavityOrientation orientation_from(const std::optional<std::array<double, 3>>& angles, double yaw) {
  return angles ? CavityOrientation::explicit_angles((*angles)[0], (*angles)[1], (*angles)[2], yaw)
                : CavityOrientation::equal_angle(yaw);
}

}  // namespace

PYBIND11_MODULE(_softjig, m) {
  m.doc() = "Depth planning for jamming-jig stamping.";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DegenerateInput>(m, "DegenerateInput", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<CapExceeded>(m, "CapExceeded", base.ptr());
  py::register_exception<InfeasibleOrientation>(m, "InfeasibleOrientation", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<PenetrationTooDeep>(m, "PenetrationTooDeep", base.ptr());
  py::register_exception<NoContacts>(m, "NoContacts", base.ptr());
  py::register_exception<NoStablePose>(m, "NoStablePose", base.ptr());
  py::register_exception<NoConsensus>(m, "NoConsensus", base.ptr());
  py::register_exception<Diverged>(m, "Diverged", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init<const Mat3&, const Vec3&>(), py::arg("rotation"), py::arg("translation"))
      .def_static("from_rpy",
                  [](double r, double p, double y, const Vec3& t) { return Pose::from_rpy(r, p, y, t); },
                  py::arg("roll"), py::arg("pitch"), py::arg("yaw"), py::arg("translation") = Vec3::Zero())
      .def_static("parse", [](const std::string& s) { return parse_pose_spec(s); }, py::arg("spec"))
      .def_property_readonly("rotation", &Pose::rotation)
      .def_property_readonly("translation", &Pose::translation)
      .def("apply", &Pose::apply)
      .def("inverse", &Pose::inverse)
      .def("__matmul__", [](const Pose& a, const Pose& b) { return compose(a, b); });

  py::class_<PoseCheck>(m, "PoseCheck")
      .def_readonly("success", &PoseCheck::success)
      .def_readonly("position_error", &PoseCheck::position_error)
      .def_readonly("orientation_error", &PoseCheck::orientation_error);

  m.def(
      "check_pose",
      [](const Pose& measured, const Pose& reference, double pos_tol, double ori_tol) {
        SuccessCriterion c{pos_tol, ori_tol};
        c.validate();
        return check_pose(measured, reference, c);
      },
      py::arg("measured"), py::arg("reference"), py::arg("position_tolerance") = 5.0,
      py::arg("orientation_tolerance") = 5.0,
      "Closed thresholds: errors equal to a tolerance pass.");

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("seed", &RunConfig::seed)
      .def_property(
          "lambda_", [](const RunConfig& c) { return c.planner.lambda; },
          [](RunConfig& c, double v) {
            c.planner.lambda = v;
            c.validate();
          })
      .def_property_readonly("mesh_path", [](const RunConfig& c) { return c.object_mesh_path.string(); })
      .def("to_toml", &dump_config)
      .def("to_json", [](const RunConfig& c) { return config_to_json(c).dump(); });

  m.def("load_config", [](const std::string& path) { return load_config(path); }, py::arg("path"));
  m.def(
      "parse_config",
      [](const std::string& text, const std::string& base_dir) { return parse_config(text, base_dir); },
      py::arg("text"), py::arg("base_dir") = ".");

  m.def(
      "plan_json",
      [](const RunConfig& cfg) {
        const RigidPart part = load_part(cfg);
        PlanResult plan;
        {
          py::gil_scoped_release release;
          plan = optimize_depth(part, cfg.planner, cfg.gripper, cfg.jig);
        }
        return plan_to_json(plan, cfg, part).dump();
      },
      py::arg("config"), "Full depth plan as a JSON string (the content of plan.json).");

  m.def(
      "cavity_points",
      [](double depth, double spacing, std::optional<std::array<double, 3>> angles, double yaw) {
        const CavitySpec cav = build_cavity(depth, Vec2::Zero(), orientation_from(angles, yaw), 0.0, JigSpec{});
        return to_array(cavity_point_cloud(cav, spacing));
      },
      py::arg("depth"), py::arg("spacing") = 1.0, py::arg("angles") = py::none(), py::arg("yaw") = 0.0,
      "Points on the faces of a cavity with its apex at the origin, N x 3.");

  m.def(
      "shape_error",
      [](const Eigen::Ref<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>& points,
         double depth, std::uint64_t seed) {
        const CavitySpec cav = build_cavity(depth, Vec2::Zero(), CavityOrientation::equal_angle(), 0.0, JigSpec{});
        const PointCloud cloud = to_cloud(points);
        RegistrationResult r;
        {
          py::gil_scoped_release release;
          r = shape_error(cloud, cav, RegistrationParams{}, seed);
        }
        py::dict out;
        out["transform"] = r.transform;
        out["rmse"] = r.rmse;
        out["initial_rmse"] = r.initial_rmse;
        out["inlier_fraction"] = r.inlier_fraction;
        out["iterations"] = r.iterations_used;
        return out;
      },
      py::arg("points"), py::arg("depth"), py::arg("seed") = 1,
      "Registers an N x 3 cloud against an EqualAngle cavity of the given depth.");

  m.def("read_points", [](const std::string& path) { return to_array(read_xyz(path)); }, py::arg("path"));
}
