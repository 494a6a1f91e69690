"""Robot geometry, joint limits and solver settings for one snake instance."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

CONFIG_ENV_VAR = "SNAKETTP_CONFIG"


def aligned_tool_transform() -> np.ndarray:
    """Pure rotation taking the chain-tip frame to a tool frame whose z-axis
    points forward along the body (Rot_y(pi/2), no translation).

    With this default the straight configuration has the identity EE
    rotation, so the pointing direction is the base z-axis.
    """
    T = np.eye(4)
    T[:3, :3] = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
    return T


@dataclass(frozen=True)
class SnakeParams:
    """Geometry, limits and per-iteration solver settings.

    The joint vector q has length n+1: q[0] is the prismatic feed in meters,
    q[1:] are the n actuator angles in radians. Actuators come in modules of
    two single-axis joints, so n must be even.
    """

    n: int
    h: float
    q_min: np.ndarray
    q_max: np.ndarray
    tool_transform: np.ndarray = field(default_factory=aligned_tool_transform)
    delta: float = 1e-4
    n_iter: int = 150
    dt: float = 1.0
    dq_r_max: float = np.deg2rad(2.0)
    dq_1_max: float = 2e-3
    dq_null_max: float = 2e-3

    def __post_init__(self):
        object.__setattr__(self, "q_min", np.asarray(self.q_min, dtype=float))
        object.__setattr__(self, "q_max", np.asarray(self.q_max, dtype=float))
        object.__setattr__(self, "tool_transform", np.asarray(self.tool_transform, dtype=float))
        if self.n < 2 or self.n % 2 != 0:
            raise ValueError(f"n must be even and >= 2, got {self.n}")
        if not self.h > 0:
            raise ValueError("actuator height h must be positive")
        if self.q_min.shape != (self.n + 1,) or self.q_max.shape != (self.n + 1,):
            raise ValueError("q_min and q_max must have length n+1")
        if not np.all(self.q_min < self.q_max):
            raise ValueError("q_min must be elementwise below q_max")
        if self.q_min[0] < 0:
            raise ValueError("feeder lower limit must be >= 0")
        if self.tool_transform.shape != (4, 4):
            raise ValueError("tool_transform must be a 4x4 rigid transform")
        if not (self.delta > 0 and self.dq_r_max > 0 and self.dq_1_max > 0
                and self.dq_null_max > 0):
            raise ValueError("delta and step caps must be positive")
        if self.n_iter < 1:
            raise ValueError("n_iter must be >= 1")

    @property
    def dof(self) -> int:
        return self.n + 1

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.q_min, self.q_max)

    def with_solver(self, **kwargs) -> "SnakeParams":
        """Copy with solver settings (n_iter, dt, caps, delta) replaced."""
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "h": self.h,
            "q_min": self.q_min.tolist(),
            "q_max": self.q_max.tolist(),
            "tool_transform": self.tool_transform.tolist(),
            "delta": self.delta,
            "n_iter": self.n_iter,
            "dt": self.dt,
            "dq_r_max": self.dq_r_max,
            "dq_1_max": self.dq_1_max,
            "dq_null_max": self.dq_null_max,
        }


def make_params(
    n: int = 30,
    h: float = 0.01,
    joint_limit: float = np.deg2rad(30.0),
    feed_max: float | None = None,
    **kwargs,
) -> SnakeParams:
    """Build parameters with symmetric actuator limits and a feed range.

    The defaults match the validation robot: 30 actuators of height 10 mm
    with +-30 deg symmetric limits.
    """
    if feed_max is None:
        feed_max = (n + 2) * h
    q_min = np.concatenate(([0.0], np.full(n, -joint_limit)))
    q_max = np.concatenate(([feed_max], np.full(n, joint_limit)))
    kwargs.setdefault("dq_1_max", h / 5.0)
    return SnakeParams(n=n, h=h, q_min=q_min, q_max=q_max, **kwargs)


def params_from_dict(data: dict) -> SnakeParams:
    """Parameters from a dict mirroring the SnakeParams field names.

    q_min / q_max may be omitted (symmetric defaults are derived from
    joint_limit_deg and feed_max) or given as full n+1 arrays.
    """
    data = dict(data)
    n = int(data.pop("n", 30))
    h = float(data.pop("h", 0.01))
    joint_limit = np.deg2rad(float(data.pop("joint_limit_deg", 30.0)))
    feed_max = data.pop("feed_max", None)
    q_min = data.pop("q_min", None)
    q_max = data.pop("q_max", None)
    known = {"tool_transform", "delta", "n_iter", "dt", "dq_r_max", "dq_1_max",
             "dq_null_max"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if q_min is None and q_max is None:
        base = make_params(n=n, h=h, joint_limit=joint_limit,
                           feed_max=None if feed_max is None else float(feed_max))
        return replace(base, **data) if data else base
    if q_min is None or q_max is None:
        raise ValueError("q_min and q_max must be given together")
    return SnakeParams(n=n, h=h, q_min=np.asarray(q_min, float),
                       q_max=np.asarray(q_max, float), **data)


def load_params(path: str | os.PathLike | None = None) -> SnakeParams:
    """Load parameters from a JSON file, falling back to the env var."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return make_params()
    with open(Path(path)) as f:
        return params_from_dict(json.load(f))
