"""Base placement for two RCM-constrained surgical arms."""

import json

from ._core import (
    BasePose,
    ConfigError,
    DataError,
    IkResult,
    JointConfig,
    SetupPose,
    WorldLayout,
    __version__,
    canonical_trajectories,
    check_setup,
    fit_score_maps,
    forward_kinematics,
    rcm,
    reachability_score,
    sample_dataset_csv,
    solve_ik,
)
from . import _core


def optimize(models_dir, layout=None, w_reach=1.0, w_self=1.0, w_env=1.0, starts=100, seed=0):
    """Multi-start optimization over both bases; returns the solution record."""
    layout = layout or WorldLayout.defaults()
    return json.loads(_core.optimize(str(models_dir), layout, w_reach, w_self, w_env, starts, seed))


def evaluate_setup(setup, layout=None):
    """Trajectory metrics (mean and std over the canonical circles) for a setup."""
    layout = layout or WorldLayout.defaults()
    return json.loads(_core.evaluate_setup(setup, layout))


__all__ = [
    "BasePose",
    "ConfigError",
    "DataError",
    "IkResult",
    "JointConfig",
    "SetupPose",
    "WorldLayout",
    "__version__",
    "canonical_trajectories",
    "check_setup",
    "evaluate_setup",
    "fit_score_maps",
    "forward_kinematics",
    "optimize",
    "rcm",
    "reachability_score",
    "sample_dataset_csv",
    "solve_ik",
]
