import math
import os
import pathlib

import numpy as np
import pytest

import softjig

DATA = pathlib.Path(os.environ.get("SOFTJIG_DATA", pathlib.Path(__file__).resolve().parents[2] / "data"))


def test_version():
    assert softjig.__version__ == "0.1.0"


def test_check_pose_closed_thresholds():
    ref = softjig.Pose()
    assert softjig.check_pose(softjig.Pose.parse("5,0,0,0,0,0"), ref).success
    assert softjig.check_pose(softjig.Pose.parse("0,0,0,0,0,5"), ref).success
    assert not softjig.check_pose(softjig.Pose.parse("5.001,0,0,0,0,0"), ref).success
    assert not softjig.check_pose(softjig.Pose.parse("0,0,0,0,0,5.001"), ref).success


def test_pose_composition():
    a = softjig.Pose.from_rpy(0.1, -0.2, 0.3, [1.0, 2.0, 3.0])
    ident = a @ a.inverse()
    assert np.allclose(ident.rotation, np.eye(3), atol=1e-12)
    assert np.allclose(ident.translation, 0.0, atol=1e-12)


def test_infeasible_orientation():
    with pytest.raises(softjig.InfeasibleOrientation):
        softjig.cavity_points(20.0, angles=[45.0, 45.0, 45.0])


def test_config_errors_carry_line_numbers():
    text = '[object]\nmesh = "shaft.stl"\nmass_g = 45\n[planner]\nlambda = 1.5\n'
    with pytest.raises(softjig.ConfigError, match=r":5: planner.lambda"):
        softjig.parse_config(text, str(DATA))


def test_shape_error_recovers_a_displaced_cavity():
    pts = softjig.cavity_points(20.0, spacing=1.0)
    motion = softjig.Pose.from_rpy(math.radians(8), 0.0, math.radians(-12), [3.0, 1.0, -2.0])
    moved = np.array([motion.apply(p) for p in pts])
    res = softjig.shape_error(moved, 20.0, seed=1)
    assert res["rmse"] < 1e-3


def test_plan_on_reference_shaft():
    cfg = softjig.load_config(str(DATA / "shaft.toml"))
    plan = softjig.plan(cfg)
    result = plan["result"]
    assert 5.0 <= result["best_depth"] <= 40.0
    assert result["verdict"]["kind"] in ("WrenchStable", "GeometricStable")
    assert math.isclose(result["ddp"]["translation"][2] - result["spp"]["translation"][2],
                        2.0 * result["best_depth"], abs_tol=0.0)


def test_missing_mesh_is_io_error(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('[object]\nmesh = "nope.stl"\nmass_g = 10\n')
    with pytest.raises(softjig.IoError):
        softjig.load_config(str(cfg))
