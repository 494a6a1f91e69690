"""Desired-backbone generation: follow-the-leader targets and pivot targets.

FTL targets advance the tip along its pointing direction and then place one
target per module by intersecting spheres with the current body polyline,
walking base-ward, so every link is asked to move onto the path its tip-ward
neighbors just vacated. Pivot targets freeze the current backbone and EE
position while requesting a new pointing direction.
"""

from __future__ import annotations

import math

import numpy as np

from .kinematics import Pose, backbone, link_frames, rot_x, rot_y
from .params import SnakeParams


class FtlError(RuntimeError):
    """Raised when a follow-the-leader target cannot be constructed."""


def pointing_direction(pitch: float, yaw: float) -> np.ndarray:
    """Unit direction Rx(pitch) Ry(yaw) e_z in base coordinates."""
    return rot_x(pitch) @ rot_y(yaw) @ np.array([0.0, 0.0, 1.0])


def pointing_angles(direction: np.ndarray) -> tuple[float, float]:
    """Inverse of pointing_direction for a unit vector."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    yaw = math.asin(min(1.0, max(-1.0, d[0])))
    pitch = math.atan2(-d[1], d[2])
    return pitch, yaw


def cone_direction(R: np.ndarray, theta: float, phi: float) -> np.ndarray:
    """Direction at polar angle theta, azimuth phi around the frame's z-axis."""
    st = math.sin(theta)
    local = np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])
    return np.asarray(R) @ local


def rotation_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Shortest rotation taking unit vector a onto unit vector b."""
    a = np.asarray(a, float) / np.linalg.norm(a)
    b = np.asarray(b, float) / np.linalg.norm(b)
    v = np.cross(a, b)
    s = np.linalg.norm(v)
    c = float(np.dot(a, b))
    if s < 1e-12:
        if c > 0.0:
            return np.eye(3)
        # antiparallel: rotate pi about a deterministic perpendicular
        helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        axis = np.cross(a, helper)
        axis /= np.linalg.norm(axis)
        K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
        return np.eye(3) + 2.0 * (K @ K)
    K = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]]) / s
    angle = math.atan2(s, c)
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


def _sphere_polyline_intersection(
    vertices: np.ndarray, center: np.ndarray, radius: float, s_prev: float
) -> tuple[np.ndarray, float]:
    """First sphere crossing of the polyline walking base-ward from s_prev.

    The polyline parameter is segment index plus local fraction; only roots
    strictly below s_prev are accepted so consecutive targets always walk
    toward the base. Within the first segment that has roots, the smaller
    parameter (closer to base) wins.
    """
    m = vertices.shape[0] - 1
    k_start = min(int(math.floor(s_prev)), m - 1)
    for k in range(k_start, -1, -1):
        A = vertices[k]
        D = vertices[k + 1] - A
        a2 = float(np.dot(D, D))
        if a2 < 1e-30:
            continue
        rel = A - center
        a1 = 2.0 * float(np.dot(D, rel))
        a0 = float(np.dot(rel, rel)) - radius * radius
        disc = a1 * a1 - 4.0 * a2 * a0
        if disc < 0.0:
            continue
        sq = math.sqrt(disc)
        roots = sorted(((-a1 - sq) / (2.0 * a2), (-a1 + sq) / (2.0 * a2)))
        valid = [t for t in roots if -1e-12 <= t <= 1.0 + 1e-12 and (k + t) < s_prev - 1e-12]
        if valid:
            t = min(valid)
            return A + t * D, k + t
    raise FtlError("sphere-polyline intersection ran past the base")


def ftl_targets(
    q: np.ndarray,
    pointing: np.ndarray,
    ds: float,
    params: SnakeParams,
) -> np.ndarray:
    """Follow-the-leader targets [p_E, p_n, p_{n-2}, ..., p_2], tip first.

    The EE and link-n targets advance by ds along the pointing direction;
    each remaining even link's target is the base-ward intersection of a
    sphere (centered at the previous target, radius equal to the current
    distance between the link and its tip-ward module neighbor) with the
    current body polyline. The polyline is extended base-ward along the
    straight tube axis so targets stay defined while the robot is retracted.
    """
    if ds <= 0:
        raise ValueError("ds must be positive")
    z = np.asarray(pointing, dtype=float)
    nrm = np.linalg.norm(z)
    if nrm < 1e-12:
        raise ValueError("pointing direction must be nonzero")
    z = z / nrm
    n = params.n
    B = backbone(q, params)  # links 1..n+1 then E

    # base-ward extension along the tube axis (base z through the origin)
    ext_len = (n + 3) * params.h + float(q[0])
    base_ext = np.array([0.0, 0.0, B[0, 2] - ext_len])
    poly = np.vstack([base_ext, B])
    m = poly.shape[0] - 1  # number of segments

    targets = [B[n + 1] + ds * z, B[n - 1] + ds * z]  # E, link n
    s_prev = float(m)
    center = targets[1]
    for link in range(n - 2, 1, -2):
        radius = float(np.linalg.norm(B[link - 1] - B[link + 1]))
        if radius < 1e-12:
            raise FtlError(f"degenerate module chord at link {link}")
        point, s_prev = _sphere_polyline_intersection(poly, center, radius, s_prev)
        targets.append(point)
        center = point
    return np.array(targets)


def select_correspondences(P_d_all: np.ndarray, n_s: int) -> list[tuple[int, np.ndarray]]:
    """Pick every n_s-th link's target from the FTL matrix, tip to base.

    Link n is excluded (the EE task already owns the tip region), so the
    returned links are n-n_s, n-2*n_s, ... down to 2. Priorities follow the
    list order: closer to the tip means more important.
    """
    if n_s < 2 or n_s % 2 != 0:
        raise ValueError("n_s must be even and >= 2")
    P_d_all = np.asarray(P_d_all, dtype=float)
    n = 2 * (P_d_all.shape[0] - 1)
    out = []
    link = n - n_s
    while link >= 2:
        out.append((link, P_d_all[1 + (n - link) // 2]))
        link -= n_s
    return out


def pivot_target(
    q: np.ndarray,
    params: SnakeParams,
    z_d: np.ndarray | None = None,
    pitch_yaw: tuple[float, float] | None = None,
    theta_phi: tuple[float, float] | None = None,
) -> tuple[np.ndarray, Pose]:
    """Targets for reorienting the tip in place.

    The desired backbone is the current one (unchanged copy) and the EE
    target keeps the current position while the pointing direction comes
    from an explicit z_d, stylus pitch/yaw, or cone angles (theta, phi)
    around the current pointing.
    """
    P_d = backbone(q, params).copy()
    T_ee = link_frames(q, params)[-1]
    p_ee = T_ee[:3, 3].copy()
    R_ee = T_ee[:3, :3]
    if z_d is not None:
        z_new = np.asarray(z_d, dtype=float)
        z_new = z_new / np.linalg.norm(z_new)
    elif pitch_yaw is not None:
        z_new = pointing_direction(*pitch_yaw)
    elif theta_phi is not None:
        z_new = cone_direction(R_ee, *theta_phi)
    else:
        raise ValueError("one of z_d, pitch_yaw, theta_phi is required")
    R_d = rotation_between(R_ee[:, 2], z_new) @ R_ee
    return P_d, Pose(p_ee, R_d)
