"""Task-priority shape fitting and teleoperation for a tube-fed snake robot."""

from .params import SnakeParams, make_params, load_params, params_from_dict
from .kinematics import (
    Pose,
    EE,
    dh_row,
    forward_kinematics,
    backbone,
    geometric_jacobian,
    tait_bryan_xyz,
    tait_bryan_zyx,
)
from .frechet import discrete_frechet, frechet_jacobian
from .tasks import Task, TaskEval, evaluate_task, stack
from .solver import SolveReport, pseudo_inverse, clik_step, step_and_clamp, shape_fit
from .shaping import ftl_targets, select_correspondences, pivot_target, cone_direction
from .teleop import TeleopInput, TeleopState, emergence_mask, teleop_tick

__all__ = [
    "SnakeParams",
    "make_params",
    "load_params",
    "params_from_dict",
    "Pose",
    "EE",
    "dh_row",
    "forward_kinematics",
    "backbone",
    "geometric_jacobian",
    "tait_bryan_xyz",
    "tait_bryan_zyx",
    "discrete_frechet",
    "frechet_jacobian",
    "Task",
    "TaskEval",
    "evaluate_task",
    "stack",
    "SolveReport",
    "pseudo_inverse",
    "clik_step",
    "step_and_clamp",
    "shape_fit",
    "ftl_targets",
    "select_correspondences",
    "pivot_target",
    "cone_direction",
    "TeleopInput",
    "TeleopState",
    "emergence_mask",
    "teleop_tick",
]

__version__ = "0.1.0"
