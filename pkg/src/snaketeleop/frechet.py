"""Discrete Frechet distance between backbone curves and its task Jacobian.

The distance is the classic dynamic program over order-preserving vertex
couplings (min over couplings of the max pairwise distance). The task
Jacobian is a one-sided numerical derivative: each active joint is perturbed
by +delta, the backbone recomputed, and the distance re-evaluated.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .kinematics import _backbone_kernel
from .params import SnakeParams


@njit(cache=True)
def _dfd(P: np.ndarray, Q: np.ndarray) -> float:
    p = P.shape[0]
    q = Q.shape[0]
    ca = np.empty((p, q))
    for i in range(p):
        for j in range(q):
            d = 0.0
            for k in range(P.shape[1]):
                t = P[i, k] - Q[j, k]
                d += t * t
            ca[i, j] = np.sqrt(d)
    for i in range(1, p):
        ca[i, 0] = max(ca[i - 1, 0], ca[i, 0])
    for j in range(1, q):
        ca[0, j] = max(ca[0, j - 1], ca[0, j])
    for i in range(1, p):
        for j in range(1, q):
            ca[i, j] = max(min(ca[i - 1, j], ca[i, j - 1], ca[i - 1, j - 1]), ca[i, j])
    return ca[p - 1, q - 1]


def discrete_frechet(P_d: np.ndarray, P: np.ndarray, return_coupling_matrix: bool = False):
    """Discrete Frechet distance between two polygonal curves.

    Parameters
    ----------
    P_d, P : (m, 3) and (k, 3) arrays of curve vertices, ordered base to tip.
    return_coupling_matrix : also return the DP matrix for diagnostics.

    Returns the scalar distance (and optionally the full DP matrix).
    """
    P_d = np.ascontiguousarray(np.atleast_2d(np.asarray(P_d, dtype=float)))
    P = np.ascontiguousarray(np.atleast_2d(np.asarray(P, dtype=float)))
    if P_d.shape[0] == 0 or P.shape[0] == 0:
        raise ValueError("curves must have at least one vertex")
    if not return_coupling_matrix:
        return float(_dfd(P_d, P))
    dist = np.linalg.norm(P_d[:, None, :] - P[None, :, :], axis=2)
    ca = dist.copy()
    ca[:, 0] = np.maximum.accumulate(dist[:, 0])
    ca[0, :] = np.maximum.accumulate(dist[0, :])
    for i in range(1, ca.shape[0]):
        for j in range(1, ca.shape[1]):
            ca[i, j] = max(min(ca[i - 1, j], ca[i, j - 1], ca[i - 1, j - 1]), dist[i, j])
    return float(ca[-1, -1]), ca


@njit(cache=True)
def _frechet_jacobian_kernel(
    q: np.ndarray, delta: float, P_d: np.ndarray, h: float, t_tool: np.ndarray, mask: np.ndarray
) -> np.ndarray:
    P = _backbone_kernel(q, h, t_tool)
    s0 = _dfd(P_d, P)
    J = np.zeros(q.shape[0])
    for i in range(q.shape[0]):
        if mask[i] == 0:
            continue
        qd = q.copy()
        qd[i] += delta
        Pd = _backbone_kernel(qd, h, t_tool)
        J[i] = (_dfd(P_d, Pd) - s0) / delta
    return J


def frechet_jacobian(
    q: np.ndarray,
    delta: float,
    P_d: np.ndarray,
    params: SnakeParams,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """1 x (n+1) one-sided derivative of the Frechet distance w.r.t. q.

    Entry i is (d_F(P_d, P_{+delta at i}) - d_F(P_d, P)) / delta. Entries of
    masked-out (locked) joints are zero. Perturbed configurations are not
    clamped to joint limits; the solver's locking mechanism owns limits.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    q = np.ascontiguousarray(np.asarray(q, dtype=float))
    P_d = np.ascontiguousarray(np.atleast_2d(np.asarray(P_d, dtype=float)))
    if mask is None:
        mask = np.ones(params.dof, dtype=np.int64)
    mask = np.ascontiguousarray(np.asarray(mask, dtype=np.int64))
    t_tool = np.ascontiguousarray(params.tool_transform[:3, 3])
    return _frechet_jacobian_kernel(q, delta, P_d, params.h, t_tool, mask).reshape(1, -1)
