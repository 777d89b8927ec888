"""Depth planning for stamping objects into a jamming jig."""

import json as _json

from ._softjig import (  # noqa: F401
    CapExceeded,
    ConfigError,
    DegenerateInput,
    DimensionMismatch,
    Diverged,
    Error,
    InfeasibleOrientation,
    InvalidArgument,
    IoError,
    NoConsensus,
    NoContacts,
    NoStablePose,
    PenetrationTooDeep,
    Pose,
    PoseCheck,
    RunConfig,
    __version__,
    cavity_points,
    check_pose,
    load_config,
    parse_config,
    read_points,
    shape_error,
)
from ._softjig import plan_json as _plan_json


def plan(config):
    """Runs the depth sweep and returns the plan.json content as a dict."""
    return _json.loads(_plan_json(config))
