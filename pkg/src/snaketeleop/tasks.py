"""Prioritized task definitions: residuals and task Jacobians.

Five task kinds are supported: full position (3T), scalar point distance
(1T), full orientation (3R), pointing (2R) and backbone similarity
(frechet). Orientation residuals are intrinsic z-y'-x'' angles of the
difference rotation between desired and current frame, signed so that the
feedback step gain * pinv(J) * residual shrinks the residual. All Jacobians
carry n+1 columns, zero-padded beyond the task's link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .frechet import discrete_frechet, frechet_jacobian
from .kinematics import backbone, geometric_jacobian, link_frames, tait_bryan_zyx, _resolve_frame
from .params import SnakeParams

TaskKind = Literal["3T", "1T", "3R", "2R", "frechet"]

TASK_DIM = {"3T": 3, "1T": 1, "3R": 3, "2R": 2, "frechet": 1}


@dataclass
class Task:
    """One prioritized objective.

    link is the 1-based chain index the task acts on (EE / n+2 for the tool
    frame); target is a point (3T/1T), rotation or unit pointing vector
    (3R/2R), or desired curve (frechet).
    """

    kind: TaskKind
    target: np.ndarray
    link: int = -1
    priority: int = 1
    gain: float = 1.0

    def __post_init__(self):
        if self.kind not in TASK_DIM:
            raise ValueError(f"unknown task kind {self.kind!r}")
        if self.gain <= 0:
            raise ValueError("task gain must be positive")
        self.target = np.asarray(self.target, dtype=float)

    @property
    def dim(self) -> int:
        return TASK_DIM[self.kind]


@dataclass
class TaskEval:
    """Residual vector and dim x (n+1) task Jacobian at one configuration."""

    residual: np.ndarray
    jacobian: np.ndarray


def rotation_from_pointing(z_d: np.ndarray) -> np.ndarray:
    """Complete a unit pointing direction into a full rotation matrix.

    The completion is deterministic but otherwise arbitrary; pointing
    residuals are invariant to the roll of the desired frame.
    """
    z = np.asarray(z_d, dtype=float)
    nrm = np.linalg.norm(z)
    if nrm < 1e-12:
        raise ValueError("pointing direction must be nonzero")
    z = z / nrm
    helper = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    x = helper - np.dot(helper, z) * z
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def _rates_to_omega_zyx(angles: np.ndarray) -> np.ndarray:
    """Matrix mapping z-y'-x'' angle rates to angular velocity (in the
    frame the angles are measured in)."""
    a, b, _ = angles
    sa, ca = math.sin(a), math.cos(a)
    sb, cb = math.sin(b), math.cos(b)
    return np.array([
        [0.0, -sa, ca * cb],
        [0.0, ca, sa * cb],
        [1.0, 0.0, -sb],
    ])


def _orientation_eval(R_d: np.ndarray, R_i: np.ndarray, J_r: np.ndarray):
    """Residual angles and angle-rate Jacobian for the difference rotation."""
    E = R_d.T @ R_i
    if E[2, 2] <= -1.0 + 1e-12:
        # pointing exactly antiparallel: representation boundary, fixed branch
        phi = np.array([0.0, math.pi, 0.0])
        residual = np.array([0.0, math.pi, 0.0])
    else:
        phi = tait_bryan_zyx(E)
        residual = -phi
    W = _rates_to_omega_zyx(phi)
    if abs(W[0, 2] * W[1, 1] - W[1, 2] * W[0, 1]) < 1e-9:  # cos(b) ~ 0, gimbal lock
        T = np.linalg.pinv(W) @ R_d.T
    else:
        T = np.linalg.solve(W, R_d.T)
    return residual, T @ J_r


def eval_3T(task: Task, q: np.ndarray, params: SnakeParams, frames=None) -> TaskEval:
    if frames is None:
        frames = link_frames(q, params)
    J = geometric_jacobian(task.link, q, params, frames=frames)
    p = frames[_resolve_frame(task.link, params)][:3, 3]
    return TaskEval(task.target - p, J[:3, :].copy())


def eval_1T(task: Task, q: np.ndarray, params: SnakeParams, frames=None) -> TaskEval:
    if frames is None:
        frames = link_frames(q, params)
    J = geometric_jacobian(task.link, q, params, frames=frames)
    p = frames[_resolve_frame(task.link, params)][:3, 3]
    diff = task.target - p
    sigma = float(np.linalg.norm(diff))
    if sigma < 1e-12:
        # converged task: the 1/sigma direction is undefined, treat as done
        return TaskEval(np.zeros(1), np.zeros((1, params.dof)))
    jac = (diff / -sigma)[None, :] @ J[:3, :]
    return TaskEval(np.array([-sigma]), jac)


def _desired_rotation(task: Task) -> np.ndarray:
    if task.target.shape == (3, 3):
        return task.target
    if task.target.shape == (3,):
        return rotation_from_pointing(task.target)
    raise ValueError("orientation target must be a 3x3 rotation or a 3-vector")


def eval_3R(task: Task, q: np.ndarray, params: SnakeParams, frames=None) -> TaskEval:
    if frames is None:
        frames = link_frames(q, params)
    R_d = _desired_rotation(task)
    R_i = frames[_resolve_frame(task.link, params)][:3, :3]
    J = geometric_jacobian(task.link, q, params, frames=frames)
    residual, jac = _orientation_eval(R_d, R_i, J[3:, :])
    return TaskEval(residual, jac)


def eval_2R(task: Task, q: np.ndarray, params: SnakeParams, frames=None) -> TaskEval:
    full = eval_3R(task, q, params, frames=frames)
    return TaskEval(full.residual[1:].copy(), full.jacobian[1:, :].copy())


def eval_frechet(
    task: Task, q: np.ndarray, params: SnakeParams, mask: np.ndarray | None = None
) -> TaskEval:
    P = backbone(q, params)
    d = discrete_frechet(task.target, P)
    jac = frechet_jacobian(q, params.delta, task.target, params, mask=mask)
    return TaskEval(np.array([-d]), jac)


def evaluate_task(
    task: Task,
    q: np.ndarray,
    params: SnakeParams,
    mask: np.ndarray | None = None,
    frames=None,
) -> TaskEval:
    """Evaluate residual and Jacobian of one task at configuration q."""
    q = np.asarray(q, dtype=float)
    if task.kind == "3T":
        return eval_3T(task, q, params, frames=frames)
    if task.kind == "1T":
        return eval_1T(task, q, params, frames=frames)
    if task.kind == "3R":
        return eval_3R(task, q, params, frames=frames)
    if task.kind == "2R":
        return eval_2R(task, q, params, frames=frames)
    return eval_frechet(task, q, params, mask=mask)


def stack(evals: list[TaskEval]) -> TaskEval:
    """Combine equal-priority evaluations by stacking residuals and Jacobians."""
    if not evals:
        raise ValueError("nothing to stack")
    if len(evals) == 1:
        return evals[0]
    return TaskEval(
        np.concatenate([e.residual for e in evals]),
        np.vstack([e.jacobian for e in evals]),
    )
