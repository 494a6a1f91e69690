"""Singularity-robust task-priority CLIK iteration with joint-limit locking.

One outer iteration evaluates all tasks at the current configuration, then
repeats the feedback step with a shrinking active-joint set until a step
violates no joint limit: the first violating joint is set onto its limit,
its column removed from every task Jacobian, and the step recomputed. Lower
priorities act through null-space projectors of the stacked higher-priority
Jacobians, so they can never disturb the end-effector task to first order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .frechet import discrete_frechet
from .kinematics import EE, Pose, backbone, link_frames
from .params import SnakeParams
from .tasks import Task, TaskEval, eval_2R, eval_3R, evaluate_task, stack

DEFAULT_PINV_TOL = 1e-6

# early-exit thresholds (an optimization on top of the fixed iteration count;
# cannot change accepted outputs beyond these tolerances)
_CONVERGED_RESIDUAL = 1e-6
_CONVERGED_STEP = 1e-9

# null-space saturation schedule: full radius during the transport phase,
# then two shrink steps so the best-effort shape motion settles and stops
# disturbing the top-priority task through curvature. The transport phase is
# capped at an absolute iteration count so longer budgets refine instead of
# re-opening large steps.
_COARSE_MAX_ITER = 200
_COARSE_FRACTION = 0.6
_FINE_FRACTION = 0.85
_MID_SCALE = 0.4
_FINE_SCALE = 0.12


def _null_radius(it: int, n_iter: int, base: float) -> float:
    coarse_end = min(_COARSE_MAX_ITER, int(round(_COARSE_FRACTION * n_iter)))
    fine_start = max(coarse_end, int(round(_FINE_FRACTION * n_iter)))
    if it < coarse_end:
        return base
    if it < fine_start:
        return base * _MID_SCALE
    return base * _FINE_SCALE


@dataclass
class SolveReport:
    """Outcome summary of one shape-fitting solve."""

    iterations: int
    residual_norms: list[float]
    frechet: float | None
    ms_per_iter: float
    trace: dict[str, np.ndarray] = field(default_factory=dict)


def pseudo_inverse(M: np.ndarray, tol: float = DEFAULT_PINV_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values at or below tol times the largest one are truncated,
    which keeps steps bounded near kinematic singularities.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("pseudo_inverse expects a matrix")
    if M.size == 0:
        return np.zeros((M.shape[1], M.shape[0]))
    return np.linalg.pinv(M, rcond=tol)


def _pinv_cutoff(M: np.ndarray, cutoff: float) -> np.ndarray:
    """Pseudo-inverse truncating singular values at or below an absolute
    cutoff. Needed where a product like J @ P can be numerically zero: a
    cutoff relative to the product's own largest singular value would keep
    pure rounding noise and produce a garbage inverse."""
    if M.size == 0:
        return np.zeros((M.shape[1], M.shape[0]))
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    inv = np.where(s > cutoff, np.divide(1.0, s, out=np.zeros_like(s), where=s > 0), 0.0)
    return (Vt.T * inv) @ U.T


def clik_step(
    q: np.ndarray,
    task_evals: list[TaskEval],
    mask: np.ndarray,
    params: SnakeParams,
    gains: list[float] | None = None,
    pinv_tol: float = DEFAULT_PINV_TOL,
    null_step_max: float | None = None,
) -> np.ndarray:
    """Desired joint velocity from prioritized task evaluations.

    task_evals must be ordered by priority (highest first) and evaluated at
    q. Columns of locked joints (mask 0) are removed before inversion; the
    returned full-length vector has zeros there.

    null_step_max saturates the norm of the combined projected lower-priority
    contribution. A scalar task whose strong Jacobian entries were removed
    by locking asks for a step of length |residual| / |weak gradient|, far
    outside the region where its linearization holds; saturation bounds the
    best-effort shape motion without leaving the top-priority null space
    (scaling a null-space vector keeps it one).
    """
    mask = np.asarray(mask)
    active = np.flatnonzero(mask != 0)
    qdot = np.zeros(params.dof)
    if active.size == 0 or not task_evals:
        return qdot
    acc = np.zeros(active.size)
    null_acc = np.zeros(active.size)
    # running orthogonal projector onto the intersection of the null spaces
    # of all tasks seen so far; equals I - pinv(J_aug) @ J_aug for the
    # stacked (augmented) Jacobian but costs one small pinv per task
    P = np.eye(active.size)
    for j, ev in enumerate(task_evals):
        lam = 1.0 if gains is None else gains[j]
        Jr = ev.jacobian[:, active]
        contrib = pseudo_inverse(Jr, pinv_tol) @ (lam * ev.residual)
        if j == 0:
            acc += contrib
        else:
            null_acc += P @ contrib
        if j < len(task_evals) - 1:
            JP = Jr @ P
            # truncation scale must come from the task Jacobian itself: JP is
            # numerically zero when the task is already fully annihilated
            scale = float(np.linalg.norm(Jr))
            P = P - _pinv_cutoff(JP, pinv_tol * max(scale, 1e-300)) @ JP
    if null_step_max is not None:
        nrm = float(np.linalg.norm(null_acc))
        if nrm > null_step_max:
            null_acc *= null_step_max / nrm
    qdot[active] = acc + null_acc
    return qdot


def step_and_clamp(
    q: np.ndarray,
    qdot: np.ndarray,
    mask: np.ndarray,
    params: SnakeParams,
) -> tuple[np.ndarray, int | None]:
    """Integrate one step with capped increments and check joint limits.

    The rotational block is first scaled uniformly so its 2-norm stays
    within the trust region where the task linearization is valid (scaling
    preserves the step direction and with it the null-space structure;
    per-component clipping alone leaves a sqrt(n) loophole when a weak
    reduced Jacobian row demands a long move). Components are then clamped
    individually to the configured caps.

    Returns the candidate configuration and the first (lowest-index, 0-based)
    joint that would leave its limits, or None. On violation only that joint
    is moved -- pragmatically onto its limit -- and the caller is expected to
    lock it and recompute the step.
    """
    dq = np.asarray(qdot, dtype=float) * params.dt
    dq = np.where(np.asarray(mask) != 0, dq, 0.0)
    rot_norm = float(np.linalg.norm(dq[1:]))
    trust = math.sqrt(3.0) * params.dq_r_max
    if rot_norm > trust:
        dq[1:] *= trust / rot_norm
    caps = np.full(params.dof, params.dq_r_max)
    caps[0] = params.dq_1_max
    dq = np.clip(dq, -caps, caps)
    cand = q + dq
    below = cand < params.q_min
    above = cand > params.q_max
    violated = below | above
    if not violated.any():
        return cand, None
    j = int(np.argmax(violated))
    q_new = q.copy()
    q_new[j] = params.q_min[j] if below[j] else params.q_max[j]
    return q_new, j


def _default_point_correspondences(
    P_d: np.ndarray, n_s: int, params: SnakeParams
) -> list[tuple[int, np.ndarray]]:
    if n_s < 2 or n_s % 2 != 0:
        raise ValueError("n_s must be even and >= 2")
    if P_d.shape[0] != params.n + 2:
        raise ValueError(
            "point mode needs a full desired backbone (n+2 vertices) or "
            "explicit correspondences"
        )
    out = []
    link = params.n - n_s
    while link >= 2:
        out.append((link, P_d[link - 1]))
        link -= n_s
    return out


def _build_groups(
    P_d: np.ndarray,
    ee_pose: Pose,
    ee_task: str,
    mode: str,
    n_s: int,
    correspondences,
    gain: float,
    params: SnakeParams,
) -> list[list[Task]]:
    ee_tasks = [Task("3T", ee_pose.p, link=EE, priority=1, gain=gain)]
    if ee_task == "3T2R":
        ee_tasks.append(Task("2R", ee_pose.R, link=EE, priority=1, gain=gain))
    elif ee_task == "3T3R":
        ee_tasks.append(Task("3R", ee_pose.R, link=EE, priority=1, gain=gain))
    elif ee_task != "3T":
        raise ValueError(f"unknown ee_task {ee_task!r}")
    groups = [ee_tasks]
    if mode == "frechet":
        groups.append([Task("frechet", P_d, priority=2, gain=gain)])
    elif mode == "point":
        if correspondences is None:
            correspondences = _default_point_correspondences(P_d, n_s, params)
        for k, (link, point) in enumerate(correspondences):
            groups.append([Task("1T", point, link=int(link), priority=2 + k, gain=gain)])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return groups


def shape_fit(
    q0: np.ndarray,
    P_d: np.ndarray,
    ee_pose: Pose,
    params: SnakeParams,
    mode: str = "frechet",
    kappa_init: np.ndarray | None = None,
    *,
    ee_task: str = "3T",
    n_s: int = 4,
    correspondences: list[tuple[int, np.ndarray]] | None = None,
    gain: float = 1.0,
    n_iter: int | None = None,
    early_exit: bool = True,
    record_trace: bool = False,
    pinv_tol: float = DEFAULT_PINV_TOL,
) -> tuple[np.ndarray, SolveReport]:
    """Fit the snake to a desired backbone while solving the EE task.

    The EE pose task always runs at priority 1. mode='frechet' adds a single
    backbone-similarity task at priority 2; mode='point' adds one scalar
    distance task per selected link (every n_s-th link below the EE, tip to
    base in descending priority). Joint limits are enforced by lock-and-
    recompute inside each iteration; the returned configuration is always
    within limits. Non-convergence is reported, never raised.
    """
    q = np.asarray(q0, dtype=float).copy()
    if q.shape != (params.dof,):
        raise ValueError(f"q0 must have length {params.dof}")
    P_d = np.atleast_2d(np.asarray(P_d, dtype=float))
    if P_d.shape[0] < 2:
        raise ValueError("desired curve needs at least 2 vertices")
    if kappa_init is None:
        kappa_init = np.ones(params.dof, dtype=int)
    kappa_init = np.asarray(kappa_init, dtype=int)
    n_iter = params.n_iter if n_iter is None else n_iter

    groups = _build_groups(P_d, ee_pose, ee_task, mode, n_s, correspondences, gain, params)

    trace_keys = ("frechet", "x3t", "x2r", "x3r", "ms")
    trace: dict[str, list[float]] = {k: [] for k in trace_keys} if record_trace else {}

    def ee_errors(frames) -> tuple[float, float, float]:
        p_ee = frames[-1][:3, 3]
        x3t = float(np.linalg.norm(ee_pose.p - p_ee))
        x2r = x3r = float("nan")
        if ee_pose.R is not None:
            r2 = eval_2R(Task("2R", ee_pose.R, link=EE), q, params, frames=frames)
            r3 = eval_3R(Task("3R", ee_pose.R, link=EE), q, params, frames=frames)
            x2r = float(np.linalg.norm(r2.residual))
            x3r = float(np.linalg.norm(r3.residual))
        return x3t, x2r, x3r

    iterations = 0
    total_ms = 0.0
    evals: list[TaskEval] = []
    for it in range(n_iter):
        t_start = time.perf_counter()
        rho = _null_radius(it, n_iter, params.dq_null_max)
        frames = link_frames(q, params)
        evals = [
            stack([evaluate_task(t, q, params, mask=kappa_init, frames=frames) for t in g])
            for g in groups
        ]
        gains = [g[0].gain for g in groups]
        kappa = kappa_init.copy()
        q_before = q
        cur = evals
        while True:
            qdot = clik_step(q, cur, kappa, params, gains=gains, pinv_tol=pinv_tol,
                             null_step_max=rho)
            q_cand, violated = step_and_clamp(q, qdot, kappa, params)
            if violated is None:
                q = q_cand
                break
            # transport residuals through the snap so the recomputed step
            # compensates the locked joint's motion to first order
            snap = q_cand[violated] - q[violated]
            q = q_cand
            if snap != 0.0:
                cur = [
                    TaskEval(ev.residual - ev.jacobian[:, violated] * snap, ev.jacobian)
                    for ev in cur
                ]
            kappa[violated] = 0
            if not kappa.any():
                break
        iterations += 1
        iter_ms = (time.perf_counter() - t_start) * 1e3
        total_ms += iter_ms
        if record_trace:
            frames_after = link_frames(q, params)
            x3t, x2r, x3r = ee_errors(frames_after)
            verts = np.array([f[:3, 3] for f in frames_after])
            trace["frechet"].append(discrete_frechet(P_d, verts))
            trace["x3t"].append(x3t)
            trace["x2r"].append(x2r)
            trace["x3r"].append(x3r)
            trace["ms"].append(iter_ms)
        if early_exit:
            step_norm = float(np.linalg.norm(q - q_before))
            if step_norm < _CONVERGED_STEP and all(
                np.linalg.norm(e.residual) < _CONVERGED_RESIDUAL for e in evals
            ):
                break

    frames = link_frames(q, params)
    final_norms = [
        float(np.linalg.norm(
            stack([evaluate_task(t, q, params, mask=kappa_init, frames=frames) for t in g]).residual
        ))
        for g in groups
    ]
    d_final = discrete_frechet(P_d, backbone(q, params))
    report = SolveReport(
        iterations=iterations,
        residual_norms=final_norms,
        frechet=d_final,
        ms_per_iter=total_ms / max(iterations, 1),
        trace={k: np.array(v) for k, v in trace.items()},
    )
    return q, report
