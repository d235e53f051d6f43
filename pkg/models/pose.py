"""
Rigid-body value types: poses, screw displacements and unit twists.

All three are immutable. Arrays are stored read-only so a Pose handed to
several planners can never be mutated behind their backs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.transform import Rotation

# Compositions allowed before the rotation block is re-orthonormalized.
RENORMALIZE_EVERY = 64


def _frozen(values, shape) -> NDArray[np.float64]:
    arr = np.array(values, dtype=np.float64).reshape(shape)
    arr.flags.writeable = False
    return arr


def canonical_quaternion(quat_wxyz) -> NDArray[np.float64]:
    """
    Fold a unit quaternion onto the w >= 0 half of the double cover.

    When w is exactly zero the first non-zero vector component is made
    positive, so serialized output is byte-stable.
    """
    q = np.asarray(quat_wxyz, dtype=np.float64)
    if q[0] < 0.0:
        return -q
    if q[0] == 0.0:
        for component in q[1:]:
            if component != 0.0:
                return -q if component < 0.0 else q
    return q


@dataclass(frozen=True, eq=False)
class Pose:
    """
    Element of SE(3): a rotation matrix and a translation in meters.

    Attributes:
        rotation (ndarray): 3x3 proper orthogonal matrix
        translation (ndarray): 3-vector, meters
    """

    rotation: NDArray[np.float64]
    translation: NDArray[np.float64]
    depth: int = field(default=0, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'rotation', _frozen(self.rotation, (3, 3)))
        object.__setattr__(self, 'translation', _frozen(self.translation, (3,)))

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, translation) -> Pose:
        return cls(np.eye(3), translation)

    @classmethod
    def from_matrix(cls, matrix) -> Pose:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (4, 4):
            raise ValueError(f"Matrix must be 4x4, got {matrix.shape}")
        return cls(matrix[:3, :3], matrix[:3, 3])

    @classmethod
    def from_quaternion(cls, quat_wxyz, translation) -> Pose:
        """
        Build a pose from a (w, x, y, z) quaternion and a translation.

        The quaternion is normalized; callers decide whether a large
        normalization is worth a warning.
        """
        w, x, y, z = np.asarray(quat_wxyz, dtype=np.float64)
        rotation = Rotation.from_quat([x, y, z, w]).as_matrix()
        return cls(rotation, translation)

    @classmethod
    def from_axis_angle(cls, axis, angle, point=None, translation=None) -> Pose:
        """
        Rotation by ``angle`` about the line through ``point`` along ``axis``.

        Args:
            axis: 3-vector, normalized here
            angle (float): radians, right-hand rule
            point: a point on the axis (default: origin)
            translation: extra translation added after the rotation
        """
        axis = np.asarray(axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        rotation = Rotation.from_rotvec(axis * angle).as_matrix()
        offset = np.zeros(3) if point is None else np.asarray(point, dtype=np.float64)
        p = offset - rotation @ offset
        if translation is not None:
            p = p + np.asarray(translation, dtype=np.float64)
        return cls(rotation, p)

    @property
    def matrix(self) -> NDArray[np.float64]:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @property
    def quaternion(self) -> NDArray[np.float64]:
        """Unit quaternion (w, x, y, z), canonicalized to w >= 0."""
        x, y, z, w = Rotation.from_matrix(self.rotation).as_quat()
        return canonical_quaternion([w, x, y, z])

    def compose(self, other: Pose) -> Pose:
        """Return self . other (other applied first, then self)."""
        rotation = self.rotation @ other.rotation
        translation = self.rotation @ other.translation + self.translation
        depth = max(self.depth, other.depth) + 1
        if depth >= RENORMALIZE_EVERY:
            rotation = Rotation.from_matrix(rotation).as_matrix()
            depth = 0
        return Pose(rotation, translation, depth)

    __matmul__ = compose

    def inverse(self) -> Pose:
        rotation = self.rotation.T
        return Pose(rotation, -rotation @ self.translation, self.depth)

    def apply(self, point) -> NDArray[np.float64]:
        """Map a point (or an (N, 3) array of points) through this pose."""
        points = np.asarray(point, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def distance_to(self, other: Pose) -> tuple[float, float]:
        """
        Rotation angle and translation distance between two poses.

        Returns:
            tuple: (radians, meters)
        """
        relative = self.rotation.T @ other.rotation
        return rotation_angle(relative), float(np.linalg.norm(self.translation - other.translation))

    def to_dict(self) -> dict:
        return {
            't': [float(v) for v in self.translation],
            'q': [float(v) for v in self.quaternion],
        }

    def __repr__(self):
        t = np.array2string(self.translation, precision=4)
        q = np.array2string(self.quaternion, precision=4)
        return f'<Pose t={t} q={q}>'


def rotation_angle(rotation) -> float:
    """Angle of a rotation matrix in [0, pi], stable near 0 and near pi."""
    r = np.asarray(rotation)
    sin_part = 0.5 * math.sqrt(
        (r[2, 1] - r[1, 2]) ** 2 + (r[0, 2] - r[2, 0]) ** 2 + (r[1, 0] - r[0, 1]) ** 2
    )
    cos_part = 0.5 * (r[0, 0] + r[1, 1] + r[2, 2] - 1.0)
    return math.atan2(sin_part, cos_part)


@dataclass(frozen=True, eq=False)
class ScrewDisplacement:
    """
    Screw parameters of a rigid displacement.

    Attributes:
        omega (ndarray): unit axis direction
        moment (ndarray): Plücker moment r x omega, meters (zero for translation)
        pitch (float): meters per radian, ``math.inf`` for pure translation
        magnitude (float): radians (finite pitch) or meters (infinite pitch)
    """

    omega: NDArray[np.float64]
    moment: NDArray[np.float64]
    pitch: float
    magnitude: float

    def __post_init__(self):
        object.__setattr__(self, 'omega', _frozen(self.omega, (3,)))
        object.__setattr__(self, 'moment', _frozen(self.moment, (3,)))
        object.__setattr__(self, 'pitch', float(self.pitch))
        object.__setattr__(self, 'magnitude', float(self.magnitude))
        if self.magnitude < 0.0:
            raise ValueError(f"Screw magnitude must be >= 0, got {self.magnitude}")

    @classmethod
    def zero(cls) -> ScrewDisplacement:
        """Canonical screw of the identity displacement."""
        return cls(np.array([0.0, 0.0, 1.0]), np.zeros(3), math.inf, 0.0)

    @property
    def is_translation(self) -> bool:
        return math.isinf(self.pitch)

    @property
    def axis_point(self) -> NDArray[np.float64]:
        """Point on the axis closest to the origin (omega x m)."""
        return np.cross(self.omega, self.moment)

    def to_dict(self) -> dict:
        return {
            'omega': [float(v) for v in self.omega],
            'moment': [float(v) for v in self.moment],
            'pitch': 'inf' if self.is_translation else self.pitch,
            'magnitude': self.magnitude,
        }


@dataclass(frozen=True, eq=False)
class UnitTwist:
    """
    Unit twist coordinates (linear, angular).

    Finite pitch: (m + h*omega, omega). Infinite pitch: (omega, 0).
    """

    linear: NDArray[np.float64]
    angular: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, 'linear', _frozen(self.linear, (3,)))
        object.__setattr__(self, 'angular', _frozen(self.angular, (3,)))

    @property
    def is_translation(self) -> bool:
        return not np.any(self.angular)

    def as_vector(self) -> NDArray[np.float64]:
        """Stacked 6-vector [linear; angular]."""
        return np.concatenate([self.linear, self.angular])

    def to_dict(self) -> dict:
        return {
            'linear': [float(v) for v in self.linear],
            'angular': [float(v) for v in self.angular],
        }
