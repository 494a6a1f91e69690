"""Teleoperation state machine: jog, follow-the-leader, pivot.

Button b1 runs one follow-the-leader locomotion step, b2 a pivot
reorientation, and with no button pressed only the last module tracks the
stylus pitch/yaw (the EE position is allowed to drift). Joints still inside
the feed tube are locked straight; the number of available joints grows as
the feed advances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .kinematics import Pose, link_frames
from .params import SnakeParams
from .shaping import ftl_targets, pointing_direction, pivot_target, select_correspondences
from .solver import SolveReport, shape_fit

# per-tick solver settings: few iterations suffice because each tick starts
# from the previous tick's solution, and tight caps keep the motion smooth
TICK_N_ITER = 50
TICK_DQ_R_MAX = math.radians(15.0) / TICK_N_ITER


@dataclass(frozen=True)
class TeleopInput:
    """One sampled operator input (latest-wins between ticks)."""

    pitch: float = 0.0
    yaw: float = 0.0
    b1: bool = False
    b2: bool = False
    seq: int = 0
    timestamp: float = 0.0


@dataclass
class TeleopState:
    """Full simulation state of one teleoperation session."""

    q: np.ndarray
    kappa_init: np.ndarray
    mode: str = "idle"
    target_path: np.ndarray | None = None
    report: SolveReport | None = None
    tick: int = 0
    # pivot episode anchors: captured when b2 is first pressed so that a held
    # pivot reorients about one fixed point and one fixed reference shape
    # instead of re-anchoring on its own convergence error every tick
    pivot_anchor: np.ndarray | None = None
    pivot_shape: np.ndarray | None = None


def emergence_mask(q1: float, params: SnakeParams) -> np.ndarray:
    """Active-joint mask for feed position q1: feeder plus the distal
    actuators that have left the tube (two at q1=0, one more per actuator
    height of feed)."""
    if q1 < 0:
        raise ValueError("feed position must be >= 0")
    n = params.n
    m = min(n, 2 + int(math.floor(q1 / params.h)))
    mask = np.zeros(params.dof, dtype=int)
    mask[0] = 1
    mask[params.dof - m:] = 1
    return mask


def initial_state(params: SnakeParams) -> TeleopState:
    q = np.zeros(params.dof)
    return TeleopState(q=q, kappa_init=emergence_mask(0.0, params))


def jog_last_module(state: TeleopState, pitch_yaw: tuple[float, float],
                    params: SnakeParams) -> TeleopState:
    """Drive only the last module's two joints to the stylus pitch/yaw,
    clamped to their limits. All other joints stay untouched."""
    q = state.q.copy()
    n = params.n
    q[n - 1] = float(np.clip(pitch_yaw[0], params.q_min[n - 1], params.q_max[n - 1]))
    q[n] = float(np.clip(pitch_yaw[1], params.q_min[n], params.q_max[n]))
    return replace(state, q=q, kappa_init=emergence_mask(q[0], params))


def ftl_tick(
    state: TeleopState,
    pitch_yaw: tuple[float, float],
    params: SnakeParams,
    ds: float | None = None,
    n_s: int = 4,
    n_iter: int = TICK_N_ITER,
) -> TeleopState:
    """One follow-the-leader locomotion step.

    Updates the pointing from the stylus, generates targets for every module
    by walking spheres down the current structure, and runs a point-mode fit
    with a 3T end-effector task. The feeder advance falls out of the fit.
    """
    if ds is None:
        ds = params.h / 20.0
    tick_params = params.with_solver(
        n_iter=n_iter, dq_r_max=TICK_DQ_R_MAX, dq_1_max=2.0 * ds / n_iter, dt=1.0
    )
    jogged = jog_last_module(state, pitch_yaw, params)
    q = jogged.q
    frames = link_frames(q, params)
    pointing = frames[-1][:3, :3][:, 2]
    P_d_all = ftl_targets(q, pointing, ds, params)
    correspondences = select_correspondences(P_d_all, n_s)
    kappa_init = emergence_mask(q[0], params)
    P_d_curve = P_d_all[::-1].copy()  # base-to-tip ordering for the curve
    ee_pose = Pose(P_d_all[0].copy(), frames[-1][:3, :3].copy())
    q_new, report = shape_fit(
        q, P_d_curve, ee_pose, tick_params,
        mode="point", kappa_init=kappa_init,
        ee_task="3T", correspondences=correspondences,
    )
    return TeleopState(
        q=q_new,
        kappa_init=emergence_mask(q_new[0], params),
        mode="ftl",
        target_path=P_d_curve,
        report=report,
        tick=state.tick + 1,
    )


def pivot_tick(
    state: TeleopState,
    pitch_yaw: tuple[float, float],
    params: SnakeParams,
    n_iter: int = TICK_N_ITER,
) -> TeleopState:
    """One pivot reorientation step: hold the EE position, rotate the
    pointing toward the stylus direction, and keep the backbone close to the
    shape at the start of the pivot episode through the similarity task."""
    ds = params.h / 20.0
    tick_params = params.with_solver(
        n_iter=n_iter, dq_r_max=TICK_DQ_R_MAX, dq_1_max=2.0 * ds / n_iter, dt=1.0
    )
    z_d = pointing_direction(*pitch_yaw)
    P_d, ee_pose = pivot_target(state.q, params, z_d=z_d)
    if state.mode == "pivot" and state.pivot_anchor is not None:
        # continuing a held pivot: keep the episode's anchors
        ee_pose = Pose(state.pivot_anchor.copy(), ee_pose.R)
        P_d = state.pivot_shape
    kappa_init = emergence_mask(state.q[0], params)
    q_new, report = shape_fit(
        state.q, P_d, ee_pose, tick_params,
        mode="frechet", kappa_init=kappa_init, ee_task="3T2R",
    )
    return TeleopState(
        q=q_new,
        kappa_init=emergence_mask(q_new[0], params),
        mode="pivot",
        target_path=P_d,
        report=report,
        tick=state.tick + 1,
        pivot_anchor=ee_pose.p.copy(),
        pivot_shape=P_d,
    )


def teleop_tick(state: TeleopState, inp: TeleopInput, params: SnakeParams,
                **kwargs) -> TeleopState:
    """Dispatch one tick: b1 wins over b2, neither means jog-only."""
    pitch_yaw = (inp.pitch, inp.yaw)
    if inp.b1:
        return ftl_tick(state, pitch_yaw, params, **kwargs)
    if inp.b2:
        return pivot_tick(state, pitch_yaw, params,
                          **{k: v for k, v in kwargs.items() if k == "n_iter"})
    jogged = jog_last_module(state, pitch_yaw, params)
    return replace(jogged, mode="idle", tick=state.tick + 1)
