"""Forward kinematics, link frames and geometric Jacobians for the snake chain.

The chain is one prismatic feed joint followed by n single-axis actuators
with alternating +-pi/2 twists, so each pair of actuators forms a pitch/yaw
module. Link indices are 1-based (1..n+1); the tool frame E is addressed as
index n+2. Joint arrays are plain 0-based numpy vectors of length n+1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .params import SnakeParams


@dataclass(frozen=True)
class Pose:
    """Position and rotation of one frame in base coordinates."""

    p: np.ndarray
    R: np.ndarray


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def dh_transform(theta: float, d: float, a: float, alpha: float) -> np.ndarray:
    """Standard (distal) four-parameter transform Rz(theta) Tz(d) Tx(a) Rx(alpha)."""
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array([
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def dh_parameters(i: int, q: np.ndarray, params: SnakeParams) -> tuple[float, float, float, float]:
    """(theta, d, a, alpha) of chain row i (1-based, 1..n+1)."""
    n = params.n
    if not 1 <= i <= n + 1:
        raise IndexError(f"link index {i} out of range 1..{n + 1}")
    if i == 1:
        return 0.0, q[0] + params.h / 2.0, 0.0, -math.pi / 2.0
    if i == n + 1:
        return float(q[n]), 0.0, params.h / 2.0, 0.0
    theta = float(q[i - 1]) - (math.pi / 2.0 if i == 2 else 0.0)
    alpha = math.pi / 2.0 if i % 2 == 0 else -math.pi / 2.0
    return theta, 0.0, params.h, alpha


def dh_row(i: int, q: np.ndarray, params: SnakeParams) -> np.ndarray:
    """Homogeneous transform of chain row i (1-based)."""
    return dh_transform(*dh_parameters(i, q, params))


def link_frames(q: np.ndarray, params: SnakeParams) -> list[np.ndarray]:
    """Frames of links 1..n+1 plus the tool frame E as 4x4 transforms."""
    q = np.asarray(q, dtype=float)
    if q.shape != (params.dof,):
        raise ValueError(f"q must have length {params.dof}, got {q.shape}")
    frames = []
    T = np.eye(4)
    for i in range(1, params.n + 2):
        T = T @ dh_row(i, q, params)
        frames.append(T)
    frames.append(T @ params.tool_transform)
    return frames


def forward_kinematics(q: np.ndarray, params: SnakeParams) -> list[Pose]:
    """Poses of links 1..n+1 plus E; the positions form the backbone curve."""
    return [Pose(T[:3, 3].copy(), T[:3, :3].copy()) for T in link_frames(q, params)]


@njit(cache=True)
def _backbone_kernel(q: np.ndarray, h: float, t_tool: np.ndarray) -> np.ndarray:
    # Same chain as dh_row/link_frames, positions only; kept in one njit body
    # because it sits on the hot path of the Frechet task Jacobian.
    nq = q.shape[0]
    n = nq - 1
    out = np.empty((nq + 1, 3))
    T = np.eye(4)
    A = np.empty((4, 4))
    half_pi = 0.5 * np.pi
    for i in range(1, nq + 1):
        if i == 1:
            theta = 0.0
            d = q[0] + 0.5 * h
            a = 0.0
            alpha = -half_pi
        elif i == n + 1:
            theta = q[n]
            d = 0.0
            a = 0.5 * h
            alpha = 0.0
        else:
            theta = q[i - 1] - (half_pi if i == 2 else 0.0)
            d = 0.0
            a = h
            alpha = half_pi if i % 2 == 0 else -half_pi
        ct, st = np.cos(theta), np.sin(theta)
        ca, sa = np.cos(alpha), np.sin(alpha)
        A[0, 0] = ct
        A[0, 1] = -st * ca
        A[0, 2] = st * sa
        A[0, 3] = a * ct
        A[1, 0] = st
        A[1, 1] = ct * ca
        A[1, 2] = -ct * sa
        A[1, 3] = a * st
        A[2, 0] = 0.0
        A[2, 1] = sa
        A[2, 2] = ca
        A[2, 3] = d
        A[3, 0] = 0.0
        A[3, 1] = 0.0
        A[3, 2] = 0.0
        A[3, 3] = 1.0
        T = np.dot(T, A)
        out[i - 1, 0] = T[0, 3]
        out[i - 1, 1] = T[1, 3]
        out[i - 1, 2] = T[2, 3]
    for k in range(3):
        out[nq, k] = T[k, 3] + T[k, 0] * t_tool[0] + T[k, 1] * t_tool[1] + T[k, 2] * t_tool[2]
    return out


def backbone(q: np.ndarray, params: SnakeParams) -> np.ndarray:
    """Backbone curve vertices (n+2, 3): links 1..n+1 plus E, base to tip."""
    q = np.asarray(q, dtype=float)
    return _backbone_kernel(q, params.h, np.ascontiguousarray(params.tool_transform[:3, 3]))


EE = -1  # sentinel accepted wherever a link index is expected


def _resolve_frame(i: int, params: SnakeParams) -> int:
    """Map a 1-based link index (or EE / n+2 for the tool frame) to a list index."""
    if i == EE or i == params.n + 2:
        return params.n + 1
    if not 1 <= i <= params.n + 1:
        raise IndexError(f"link index {i} out of range 1..{params.n + 2}")
    return i - 1


def geometric_jacobian(
    i: int,
    q: np.ndarray,
    params: SnakeParams,
    frames: list[np.ndarray] | None = None,
) -> np.ndarray:
    """6 x (n+1) geometric Jacobian of link i (or EE) with zero-padded columns.

    Rows 0..2 map joint rates to the linear velocity of the frame origin,
    rows 3..5 to its angular velocity. Columns for joints beyond link i are
    zero. Precomputed link_frames may be passed to amortize the FK cost.
    """
    if frames is None:
        frames = link_frames(q, params)
    idx = _resolve_frame(i, params)
    # joints affecting the tool frame are exactly those of link n+1
    last_joint = min(idx + 1, params.n + 1)
    p = frames[idx][:3, 3]
    J = np.zeros((6, params.dof))
    J[:3, 0] = np.array([0.0, 0.0, 1.0])  # prismatic feed along base z
    if last_joint >= 2:
        # revolute joint j turns about the z-axis of frame j-1
        prev = np.asarray(frames[: last_joint - 1])
        Z = prev[:, :3, 2]
        O = prev[:, :3, 3]
        J[:3, 1:last_joint] = np.cross(Z, p[None, :] - O).T
        J[3:, 1:last_joint] = Z.T
    return J


def tait_bryan_xyz(R: np.ndarray) -> np.ndarray:
    """Intrinsic x-y'-z'' angles (a, b, c) with R = Rx(a) Ry(b) Rz(c).

    At gimbal lock (|cos b| < 1e-9) the c angle is set to zero and the
    remaining rotation folded into a.
    """
    sb = min(1.0, max(-1.0, float(R[0, 2])))
    b = math.asin(sb)
    cb = math.sqrt(max(0.0, 1.0 - sb * sb))
    if cb < 1e-9:
        return np.array([math.atan2(R[1, 0], R[1, 1]), b, 0.0])
    a = math.atan2(-R[1, 2], R[2, 2])
    c = math.atan2(-R[0, 1], R[0, 0])
    return np.array([a, b, c])


def tait_bryan_zyx(R: np.ndarray) -> np.ndarray:
    """Intrinsic z-y'-x'' angles (a, b, c) with R = Rz(a) Ry(b) Rx(c).

    Same gimbal-lock convention as tait_bryan_xyz: c = 0, remainder in a.
    """
    sb = min(1.0, max(-1.0, float(-R[2, 0])))
    b = math.asin(sb)
    cb = math.sqrt(max(0.0, 1.0 - sb * sb))
    if cb < 1e-9:
        return np.array([math.atan2(-R[0, 1], R[1, 1]), b, 0.0])
    a = math.atan2(R[1, 0], R[0, 0])
    c = math.atan2(R[2, 1], R[2, 2])
    return np.array([a, b, c])


def compose_xyz(angles: np.ndarray) -> np.ndarray:
    a, b, c = angles
    return rot_x(a) @ rot_y(b) @ rot_z(c)


def compose_zyx(angles: np.ndarray) -> np.ndarray:
    a, b, c = angles
    return rot_z(a) @ rot_y(b) @ rot_x(c)
