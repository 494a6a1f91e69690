"""Desk-scale validation experiments with seeded determinism.

Three experiments mirror the validation protocol: batch shape fitting
against random feasible backbones, scripted follow-the-leader locomotion
along bundled synthetic paths, and a pivot-reorientation sweep over a cone
of pointing directions. Each run writes one CSV with a fixed header (plus a
rendered figure next to it); everything except the wall-time column is
byte-reproducible for a given seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kinematics import Pose, backbone, link_frames
from .params import SnakeParams, make_params
from .solver import shape_fit
from .teleop import TeleopInput, TeleopState, initial_state, teleop_tick

SHAPE_FITTING_HEADER = [
    "method", "iteration", "mean_frechet_over_h", "mean_x3t_over_h",
    "mean_x2r_rad", "mean_x3r_rad", "ms_per_iter",
]
PIVOT_HEADER = ["path", "method", "theta_deg", "phi_deg", "frechet_over_h"]
LOCOMOTION_HEADER = ["path", "final_frechet_over_h", "ticks"]

# solver settings for the batch fitting runs, found by calibration: small
# per-joint caps for robustness, a null-space radius large enough to
# transport the shape, and the smoothing increment for the distance gradient
FIT_DQ_R_MAX = math.radians(2.0)
FIT_DQ_1_MAX = 0.01
FIT_DQ_NULL_MAX = 3e-2
FIT_DELTA = 1e-3


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully determines one experiment run (reproducibility)."""

    seed: int = 0
    n: int = 30
    h: float = 0.01
    joint_limit_deg: float = 30.0
    n_shapes: int = 100
    n_iter: int = 550
    ee_task: str = "3T"
    methods: tuple[str, ...] = ("frechet", "point4", "point2")
    jobs: int = 1

    def params(self) -> SnakeParams:
        return make_params(
            n=self.n,
            h=self.h,
            joint_limit=np.deg2rad(self.joint_limit_deg),
            dq_r_max=FIT_DQ_R_MAX,
            dq_1_max=FIT_DQ_1_MAX,
            dq_null_max=FIT_DQ_NULL_MAX,
            delta=FIT_DELTA,
            n_iter=self.n_iter,
        )


def _method_mode(method: str) -> tuple[str, int]:
    if method == "frechet":
        return "frechet", 4
    if method.startswith("point"):
        return "point", int(method[len("point"):])
    raise ValueError(f"unknown method {method!r}")


def random_shapes(count: int, seed: int, params: SnakeParams) -> list[tuple[np.ndarray, np.ndarray]]:
    """Random feasible target configurations with the feeder at zero,
    paired with their backbone curves. Deterministic for a given seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        q_d = rng.uniform(params.q_min, params.q_max)
        q_d[0] = 0.0
        out.append((q_d, backbone(q_d, params)))
    return out


def _fit_one(args):
    params, method, n_iter, ee_task, q_d = args
    mode, n_s = _method_mode(method)
    P_d = backbone(q_d, params)
    frames = link_frames(q_d, params)
    ee = Pose(frames[-1][:3, 3].copy(), frames[-1][:3, :3].copy())
    kappa = np.ones(params.dof, dtype=int)
    kappa[0] = 0  # target set is generated without feeder
    _, report = shape_fit(
        np.zeros(params.dof), P_d, ee, params,
        mode=mode, kappa_init=kappa, ee_task=ee_task, n_s=n_s,
        n_iter=n_iter, early_exit=False, record_trace=True,
    )
    return report.trace


def run_shape_fitting_experiment(config: ExperimentConfig) -> list[dict]:
    """Batch shape fitting: all methods against the same seeded target set.

    Returns one row per (method, iteration) with metrics averaged over the
    target set, matching SHAPE_FITTING_HEADER.
    """
    params = config.params()
    shapes = random_shapes(config.n_shapes, config.seed, params)
    rows: list[dict] = []
    for method in config.methods:
        work = [(params, method, config.n_iter, config.ee_task, q_d) for q_d, _ in shapes]
        if config.jobs > 1:
            import multiprocessing as mp

            with mp.Pool(config.jobs) as pool:
                traces = pool.map(_fit_one, work)
        else:
            traces = [_fit_one(w) for w in work]
        frech = np.stack([t["frechet"] for t in traces])
        x3t = np.stack([t["x3t"] for t in traces])
        x2r = np.stack([t["x2r"] for t in traces])
        x3r = np.stack([t["x3r"] for t in traces])
        ms = np.stack([t["ms"] for t in traces])
        for it in range(frech.shape[1]):
            rows.append({
                "method": method,
                "iteration": it + 1,
                "mean_frechet_over_h": frech[:, it].mean() / params.h,
                "mean_x3t_over_h": x3t[:, it].mean() / params.h,
                "mean_x2r_rad": x2r[:, it].mean(),
                "mean_x3r_rad": x3r[:, it].mean(),
                "ms_per_iter": ms[:, it].mean(),
            })
    return rows


def tube_mouth_z(params: SnakeParams) -> float:
    """Base-frame z of the feed-tube exit: at zero feed exactly the last two
    actuators are outside, so the mouth sits at link n-1."""
    return backbone(np.zeros(params.dof), params)[params.n - 2, 2]


def synthetic_paths(params: SnakeParams, free_len: float | None = None,
                    segment: float | None = None) -> dict[str, np.ndarray]:
    """Three bundled free-space target curves spanning curvature regimes.

    Paths start at the tube mouth on the tube axis and extend about 18
    actuator heights into free space. The straight in-tube lead-in is not
    part of a path; it is appended per comparison via with_lead_in, matched
    to the backbone extent under comparison.
    """
    h = params.h
    if segment is None:
        segment = h / 2.0
    if free_len is None:
        free_len = 18.0 * h
    z0 = tube_mouth_z(params)
    m = int(round(free_len / segment))
    s = np.linspace(0.0, free_len, m + 1)

    straight = np.column_stack([np.zeros_like(s), np.zeros_like(s), z0 + s])

    # planar arc: curvature radius 25h in the x-z plane
    R_arc = 25.0 * h
    ang = s / R_arc
    arc = np.column_stack([R_arc * (1.0 - np.cos(ang)), np.zeros_like(s), z0 + R_arc * np.sin(ang)])

    # gentle out-of-plane sweep
    R_hel = 30.0 * h
    ang_h = s / R_hel
    helix = np.column_stack([
        R_hel * (1.0 - np.cos(ang_h)) * 0.8,
        R_hel * (1.0 - np.cos(ang_h)) * 0.45,
        z0 + R_hel * np.sin(ang_h),
    ])

    return {"straight": straight, "arc": arc, "helix": helix}


def resample_polyline(points: np.ndarray, spacing: float) -> np.ndarray:
    """Arc-length resampling anchored at the first vertex; the exact last
    vertex is always kept so curve endpoints are preserved."""
    points = np.asarray(points, dtype=float)
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    grid = np.arange(0.0, total, spacing)
    out = np.empty((grid.size + 1, 3))
    for k, sv in enumerate(grid):
        i = int(np.searchsorted(s, sv, side="right") - 1)
        i = min(i, len(seg) - 1)
        t = 0.0 if seg[i] == 0 else (sv - s[i]) / seg[i]
        out[k] = points[i] + t * (points[i + 1] - points[i])
    out[-1] = points[-1]
    return out


def with_lead_in(path: np.ndarray, params: SnakeParams, base_z: float) -> np.ndarray:
    """Prepend the straight tube-axis segment from base_z to the path start
    and resample everything at one actuator height anchored at base_z.

    The discrete Frechet distance couples curve endpoints and pairs every
    vertex, so the desired curve must span the backbone's extent (retracted
    links lie on the tube axis) and should carry the backbone's own vertex
    density and phase: finer or misaligned sampling adds a floor of half a
    link spacing to the distance even for a perfectly tracked path."""
    z_start = float(path[0, 2])
    if base_z < z_start:
        joined = np.vstack([[0.0, 0.0, base_z], path])
    else:
        joined = path
    return resample_polyline(joined, params.h)


def nominal_ticks(path: np.ndarray, params: SnakeParams, ds: float | None = None) -> int:
    """Tick count that brings the tip from its start to the path end."""
    if ds is None:
        ds = params.h / 20.0
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    arc_len = float(seg.sum())
    tip_start_z = params.n * params.h  # straight chain at zero feed
    travel = float(path[0, 2]) + arc_len - tip_start_z
    return max(1, int(round(travel / ds)))


def straight_policy(state: TeleopState, path: np.ndarray, params: SnakeParams) -> tuple[float, float]:
    return 0.0, 0.0


def pursuit_policy(state: TeleopState, path: np.ndarray, params: SnakeParams,
                   lookahead: float | None = None) -> tuple[float, float]:
    """Scripted stand-in for a human operator: steer the pointing toward a
    lookahead point on the path ahead of the tip.

    The returned pitch/yaw are last-module joint angles (that is what the
    jog consumes), found by one damped Newton step on the tip direction's
    sensitivity to the two module joints.
    """
    if lookahead is None:
        lookahead = 3.0 * params.h
    n = params.n
    frames = link_frames(state.q, params)
    p_ee = frames[-1][:3, 3]
    z_cur = frames[-1][:3, 2]
    d = np.linalg.norm(path - p_ee[None, :], axis=1)
    k = int(np.argmin(d))
    target = None
    for j in range(k, path.shape[0]):
        if np.linalg.norm(path[j] - path[k]) >= lookahead:
            target = path[j]
            break
    if target is None:
        target = path[-1]
    direction = target - p_ee
    nrm = np.linalg.norm(direction)
    if nrm < 1e-9:
        return float(state.q[n - 1]), float(state.q[n])
    z_des = direction / nrm
    # sensitivity of the tip direction to the module joints
    eps = 1e-6
    S = np.zeros((3, 2))
    for col, idx in enumerate((n - 1, n)):
        qp = state.q.copy()
        qp[idx] += eps
        S[:, col] = (link_frames(qp, params)[-1][:3, 2] - z_cur) / eps
    delta, *_ = np.linalg.lstsq(S, z_des - z_cur, rcond=None)
    delta = np.clip(delta, -0.2, 0.2)  # damped, human-like adjustment
    pitch = float(np.clip(state.q[n - 1] + delta[0], params.q_min[n - 1], params.q_max[n - 1]))
    yaw = float(np.clip(state.q[n] + delta[1], params.q_min[n], params.q_max[n]))
    return pitch, yaw


@dataclass
class LocomotionResult:
    path_name: str
    final_frechet_over_h: float
    ticks: int
    limits_ok: bool
    backbone: np.ndarray
    path: np.ndarray


def run_locomotion_experiment(
    config: ExperimentConfig,
    path: np.ndarray,
    scripted_input,
    n_ticks: int | None = None,
    path_name: str = "path",
) -> LocomotionResult:
    """Scripted follow-the-leader run along one free-space path.

    scripted_input(state, path, params) -> (pitch, yaw) is sampled once per
    tick with b1 held; the tick count defaults to the advance needed to put
    the tip at the path end. The final backbone is compared against the path
    extended base-ward along the tube axis to the backbone's own base.
    """
    params = config.params()
    if n_ticks is None:
        n_ticks = nominal_ticks(path, params)
    state = initial_state(params)
    limits_ok = True
    for tick in range(n_ticks):
        pitch, yaw = scripted_input(state, path, params)
        state = teleop_tick(state, TeleopInput(pitch=pitch, yaw=yaw, b1=True, seq=tick), params)
        q = state.q
        if not (np.all(q >= params.q_min - 1e-12) and np.all(q <= params.q_max + 1e-12)):
            limits_ok = False
    from .frechet import discrete_frechet

    B = backbone(state.q, params)
    desired = with_lead_in(path, params, base_z=float(B[0, 2]))
    d = discrete_frechet(desired, B)
    return LocomotionResult(path_name, d / params.h, n_ticks, limits_ok, B, desired)


def initial_path_fit(params: SnakeParams, path: np.ndarray, n_iter: int = 500) -> np.ndarray:
    """Drape the robot along a free-space path (full path knowledge):
    frechet-mode fit with the EE at the path end pointing along the end
    tangent. The feed is pre-positioned so the chain length matches the path
    extent and the desired curve gets a matching tube-axis lead-in."""
    tangent = path[-1] - path[-2]
    tangent = tangent / np.linalg.norm(tangent)
    from .tasks import rotation_from_pointing

    ee = Pose(path[-1].copy(), rotation_from_pointing(tangent))
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    q1_est = float(path[0, 2]) + float(seg.sum()) - params.n * params.h
    q1_est = min(max(q1_est, 0.0), params.q_max[0])
    q0 = np.zeros(params.dof)
    q0[0] = q1_est
    desired = with_lead_in(path, params, base_z=q1_est + params.h / 2.0)
    q, report = shape_fit(
        q0, desired, ee, params,
        mode="frechet", ee_task="3T2R", n_iter=n_iter, early_exit=False,
    )
    return q


def run_pivot_experiment(
    config: ExperimentConfig,
    n_theta: int = 11,
    n_phi: int = 11,
    theta_max_deg: float = 60.0,
    pivot_iter: int = 120,
    paths: dict[str, np.ndarray] | None = None,
    initial: dict[str, np.ndarray] | None = None,
    return_contract: bool = False,
):
    """Cone sweep of pivot reorientations per path and method.

    From the draped initial configuration, each (theta, phi) pointing target
    is solved with the EE position held; the cost is the backbone change
    relative to the initial shape, normalized by actuator height. With
    return_contract the worst EE drift and pointing error over the whole
    sweep are returned alongside the rows.
    """
    from .shaping import cone_direction, pivot_target

    params = config.params()
    if paths is None:
        paths = synthetic_paths(params)
    rows: list[dict] = []
    contract = {"max_ee_drift_over_h": 0.0, "max_pointing_err_rad": 0.0}
    thetas = np.linspace(0.0, np.deg2rad(theta_max_deg), n_theta)
    phis = np.linspace(0.0, 2.0 * math.pi, n_phi)
    for path_name, path in paths.items():
        q0 = initial[path_name] if initial is not None else initial_path_fit(params, path)
        frames0 = link_frames(q0, params)
        R0 = frames0[-1][:3, :3]
        p0 = frames0[-1][:3, 3]
        for method in ("frechet", "point"):
            for theta in thetas:
                for phi in phis:
                    z_d = cone_direction(R0, theta, phi)
                    P_d, ee = pivot_target(q0, params, z_d=z_d)
                    q_fit, report = shape_fit(
                        q0, P_d, ee, params, mode=method, ee_task="3T2R",
                        n_s=4, n_iter=pivot_iter, early_exit=False,
                    )
                    rows.append({
                        "path": path_name,
                        "method": method,
                        "theta_deg": round(math.degrees(theta), 6),
                        "phi_deg": round(math.degrees(phi), 6),
                        "frechet_over_h": report.frechet / params.h,
                    })
                    if return_contract:
                        frames = link_frames(q_fit, params)
                        drift = float(np.linalg.norm(frames[-1][:3, 3] - p0)) / params.h
                        cosang = float(np.clip(np.dot(frames[-1][:3, 2], z_d), -1.0, 1.0))
                        contract["max_ee_drift_over_h"] = max(
                            contract["max_ee_drift_over_h"], drift)
                        contract["max_pointing_err_rad"] = max(
                            contract["max_pointing_err_rad"], math.acos(cosang))
    if return_contract:
        return rows, contract
    return rows


def write_csv(path: Path, header: list[str], rows: list[dict]) -> None:
    """Write rows with a fixed header; floats use repr-style shortest form
    so identical runs produce identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in header])


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    if isinstance(v, (np.floating,)):
        return format(float(v), ".12g")
    return str(v)


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))
