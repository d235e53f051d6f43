"""
SE(3) algebra for the planner.

Screw extraction, the twist exponential and logarithm, and screw linear
interpolation (ScLERP). Twists are stacked as [linear; angular] everywhere.
All functions are pure.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from models.pose import Pose, ScrewDisplacement, UnitTwist, rotation_angle
from utils.errors import InputError

# Below this rotation angle a displacement is handled as a pure translation.
SMALL_ANGLE = 1e-10
# Above this angle omega is read off the symmetric part of R.
NEAR_PI = 3.0

_EYE = np.eye(3)


def skew(v) -> NDArray[np.float64]:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m) -> NDArray[np.float64]:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def so3_exp(omega, theta) -> NDArray[np.float64]:
    k = skew(omega)
    return _EYE + math.sin(theta) * k + (1.0 - math.cos(theta)) * (k @ k)


def so3_log(rotation) -> tuple[NDArray[np.float64], float]:
    """
    Axis and angle of a rotation matrix, angle in [0, pi].

    Returns (z-axis, 0) for rotations below SMALL_ANGLE.
    """
    r = np.asarray(rotation)
    theta = rotation_angle(r)
    if theta < SMALL_ANGLE:
        return np.array([0.0, 0.0, 1.0]), 0.0
    if theta > NEAR_PI:
        # (R + R^T)/2 = cos(t) I + (1 - cos(t)) w w^T
        outer = (0.5 * (r + r.T) - math.cos(theta) * _EYE) / (1.0 - math.cos(theta))
        col = int(np.argmax(np.diag(outer)))
        omega = outer[:, col] / math.sqrt(outer[col, col])
        if omega @ vee(r - r.T) < 0.0:
            omega = -omega
    else:
        omega = vee(r - r.T) / (2.0 * math.sin(theta))
    return omega / np.linalg.norm(omega), theta


def screw_from_displacement(t: Pose) -> ScrewDisplacement:
    """
    Screw parameters (omega, m, h, theta) of a displacement.

    Rotations: v = [(I - R) w^ + theta w w^T]^-1 p, h = w.v, m = v - h w.
    Translations (and the identity) take the infinite-pitch branch.
    """
    p = t.translation
    omega, theta = so3_log(t.rotation)
    if theta == 0.0:
        distance = float(np.linalg.norm(p))
        if distance == 0.0:
            return ScrewDisplacement.zero()
        return ScrewDisplacement(p / distance, np.zeros(3), math.inf, distance)

    a = (_EYE - t.rotation) @ skew(omega) + theta * np.outer(omega, omega)
    upsilon = np.linalg.solve(a, p)
    pitch = float(omega @ upsilon)
    moment = upsilon - pitch * omega
    return ScrewDisplacement(omega, moment, pitch, theta)


def twist_from_screw(s: ScrewDisplacement) -> UnitTwist:
    if s.is_translation:
        return UnitTwist(s.omega, np.zeros(3))
    return UnitTwist(s.moment + s.pitch * s.omega, s.omega)


def exp_twist(twist: UnitTwist, theta: float) -> Pose:
    """Exponential of a unit twist scaled by ``theta``."""
    v = twist.linear
    if twist.is_translation:
        return Pose(_EYE, v * theta)
    w = twist.angular
    rotation = so3_exp(w, theta)
    translation = (_EYE - rotation) @ np.cross(w, v) + w * (w @ v) * theta
    return Pose(rotation, translation)


def displacement_from_screw(s: ScrewDisplacement) -> Pose:
    return exp_twist(twist_from_screw(s), s.magnitude)


def log_pose(t: Pose) -> tuple[UnitTwist, float]:
    """Logarithm of a pose as (unit twist, magnitude)."""
    s = screw_from_displacement(t)
    return twist_from_screw(s), s.magnitude


def relative_screw(g_i: Pose, g_f: Pose) -> ScrewDisplacement:
    """Screw of the displacement g_f . g_i^-1 (spatial frame)."""
    return screw_from_displacement(g_f @ g_i.inverse())


def sclerp(g_i: Pose, g_f: Pose, tau: float) -> Pose:
    """
    Screw linear interpolation: exp(xi * tau * theta) . g_i.

    Args:
        g_i (Pose): start pose
        g_f (Pose): goal pose
        tau (float): interpolation factor in [0, 1]

    Returns:
        Pose: the pose a fraction ``tau`` along the constant screw
    """
    if not 0.0 <= tau <= 1.0:
        raise InputError(f"tau must lie in [0, 1], got {tau}")
    if tau == 0.0:
        return g_i
    if tau == 1.0:
        return g_f
    twist, theta = log_pose(g_f @ g_i.inverse())
    if theta == 0.0:
        return g_i
    return exp_twist(twist, tau * theta) @ g_i


def exp_twist_batch(twist: UnitTwist, angles) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Vectorized ``exp_twist`` over an array of magnitudes.

    Returns:
        tuple: rotations (k, 3, 3) and translations (k, 3)
    """
    angles = np.asarray(angles, dtype=np.float64)
    v = twist.linear
    if twist.is_translation:
        rotations = np.broadcast_to(_EYE, (len(angles), 3, 3)).copy()
        return rotations, angles[:, None] * v
    w = twist.angular
    k = skew(w)
    sin = np.sin(angles)[:, None, None]
    one_minus_cos = (1.0 - np.cos(angles))[:, None, None]
    rotations = _EYE + sin * k + one_minus_cos * (k @ k)
    w_cross_v = np.cross(w, v)
    translations = (w_cross_v - rotations @ w_cross_v) + np.outer(angles, w * (w @ v))
    return rotations, translations


def sclerp_batch(g_i: Pose, g_f: Pose, taus) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """``sclerp`` evaluated at many tau values at once (no range check)."""
    taus = np.asarray(taus, dtype=np.float64)
    twist, theta = log_pose(g_f @ g_i.inverse())
    rotations, translations = exp_twist_batch(twist, taus * theta)
    return rotations @ g_i.rotation, rotations @ g_i.translation + translations


def rotation_angles_batch(rot_a, rot_b) -> NDArray[np.float64]:
    """Angles of R_a^T R_b for stacks of rotations, via atan2 like ``rotation_angle``."""
    rel = np.einsum('kji,kjl->kil', rot_a, rot_b)
    sin_part = 0.5 * np.sqrt(
        (rel[:, 2, 1] - rel[:, 1, 2]) ** 2
        + (rel[:, 0, 2] - rel[:, 2, 0]) ** 2
        + (rel[:, 1, 0] - rel[:, 0, 1]) ** 2
    )
    cos_part = 0.5 * (np.trace(rel, axis1=1, axis2=2) - 1.0)
    return np.arctan2(sin_part, cos_part)


def adjoint(t: Pose) -> NDArray[np.float64]:
    """6x6 adjoint mapping [linear; angular] twists through ``t``."""
    r = t.rotation
    ad = np.zeros((6, 6))
    ad[:3, :3] = r
    ad[3:, 3:] = r
    ad[:3, 3:] = skew(t.translation) @ r
    return ad


def error_twist(target: Pose, current: Pose) -> NDArray[np.float64]:
    """Spatial twist log(target . current^-1) as a 6-vector [linear; angular]."""
    twist, theta = log_pose(target @ current.inverse())
    return twist.as_vector() * theta


def pose_error(target: Pose, current: Pose) -> tuple[float, float]:
    """(rotation angle, translation distance) between two poses."""
    return target.distance_to(current)
