"""
Serial manipulator model, joint paths and tracker parameters.

Joint configurations are plain float64 numpy vectors of length ``dof``
(radians for revolute joints, meters for prismatic ones).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from models.pose import Pose, UnitTwist
from utils.errors import InputError

REVOLUTE = 'revolute'
PRISMATIC = 'prismatic'
JOINT_TYPES = (REVOLUTE, PRISMATIC)


@dataclass(frozen=True, eq=False)
class RobotModel:
    """
    Product-of-exponentials model of a serial manipulator.

    Attributes:
        name (str): model name
        joint_twists (tuple[UnitTwist]): joint screws in the base frame at home
        joint_types (tuple[str]): 'revolute' or 'prismatic' per joint
        limits (ndarray): (n, 2) lower/upper joint limits
        home_pose (Pose): end-effector pose at the zero configuration
    """

    name: str
    joint_twists: tuple
    joint_types: tuple
    limits: np.ndarray
    home_pose: Pose

    def __post_init__(self):
        limits = np.array(self.limits, dtype=np.float64).reshape(-1, 2)
        limits.flags.writeable = False
        object.__setattr__(self, 'limits', limits)
        object.__setattr__(self, 'joint_twists', tuple(self.joint_twists))
        object.__setattr__(self, 'joint_types', tuple(self.joint_types))

        n = len(self.joint_twists)
        if n < 1:
            raise InputError("A robot model needs at least one joint")
        if len(self.joint_types) != n or limits.shape[0] != n:
            raise InputError(
                f"Model '{self.name}': {n} twists, {len(self.joint_types)} types, "
                f"{limits.shape[0]} limit pairs"
            )
        for j, (twist, kind) in enumerate(zip(self.joint_twists, self.joint_types)):
            if kind not in JOINT_TYPES:
                raise InputError(f"Joint {j}: unknown type '{kind}'")
            if limits[j, 0] >= limits[j, 1]:
                raise InputError(f"Joint {j}: lower limit must be below upper limit")
            if kind == REVOLUTE and abs(np.linalg.norm(twist.angular) - 1.0) > 1e-9:
                raise InputError(f"Joint {j}: revolute twist needs a unit angular part")
            if kind == PRISMATIC and (np.any(twist.angular)
                                      or abs(np.linalg.norm(twist.linear) - 1.0) > 1e-9):
                raise InputError(f"Joint {j}: prismatic twist must be (unit direction, 0)")

    @classmethod
    def from_joints(cls, name, joints, home_pose: Pose) -> RobotModel:
        """
        Build a model from joint descriptions.

        Args:
            joints (list[dict]): each with ``type``, ``axis``, ``limits`` and,
                for revolute joints, ``point`` (a point on the axis)
            home_pose (Pose): end-effector pose at q = 0
        """
        twists, types, limits = [], [], []
        for j, joint in enumerate(joints):
            kind = joint['type']
            axis = np.asarray(joint['axis'], dtype=np.float64)
            norm = np.linalg.norm(axis)
            if norm == 0.0:
                raise InputError(f"Joint {j}: zero axis")
            axis = axis / norm
            if kind == REVOLUTE:
                point = np.asarray(joint['point'], dtype=np.float64)
                twists.append(UnitTwist(np.cross(point, axis), axis))
            else:
                twists.append(UnitTwist(axis, np.zeros(3)))
            types.append(kind)
            limits.append(joint['limits'])
        return cls(name, tuple(twists), tuple(types), np.array(limits), home_pose)

    @property
    def dof(self) -> int:
        return len(self.joint_twists)

    @property
    def lower(self) -> np.ndarray:
        return self.limits[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.limits[:, 1]

    def check_config(self, q) -> np.ndarray:
        """Return ``q`` as a float vector, rejecting a wrong dimension."""
        q = np.asarray(q, dtype=np.float64).reshape(-1)
        if q.shape[0] != self.dof:
            raise InputError(f"Model '{self.name}' has {self.dof} joints, config has {q.shape[0]}")
        return q

    def within_limits(self, q, slack=1e-12) -> bool:
        return bool(np.all(q >= self.lower - slack) and np.all(q <= self.upper + slack))


@dataclass(frozen=True, eq=False)
class JointPath:
    """
    Tracked joint configurations with the leg and tau each one servoed to.

    Attributes:
        configs (ndarray): (k, n) joint configurations
        annotations (tuple): (leg_index, tau) per config
        legs (tuple[ConstraintLeg]): the legs the annotations refer to
    """

    configs: np.ndarray
    annotations: tuple
    legs: tuple = ()

    def __post_init__(self):
        configs = np.array(self.configs, dtype=np.float64)
        if configs.ndim != 2:
            raise InputError("JointPath configs must be a (k, n) array")
        configs.flags.writeable = False
        object.__setattr__(self, 'configs', configs)
        object.__setattr__(self, 'annotations', tuple(self.annotations))
        object.__setattr__(self, 'legs', tuple(self.legs))
        if len(self.annotations) != configs.shape[0]:
            raise InputError("One annotation per config is required")

    def __len__(self):
        return self.configs.shape[0]

    @property
    def initial(self) -> np.ndarray:
        return self.configs[0]

    @property
    def final(self) -> np.ndarray:
        return self.configs[-1]

    def summary_hash(self) -> str:
        """sha256 over the raw config bytes; identical paths hash identically."""
        return hashlib.sha256(np.ascontiguousarray(self.configs).tobytes()).hexdigest()

    def summary(self) -> dict:
        steps = np.abs(np.diff(self.configs, axis=0))
        return {
            'configs': len(self),
            'legs': len(self.legs),
            'max_joint_step': float(steps.max()) if steps.size else 0.0,
            'hash': self.summary_hash(),
        }


@dataclass(frozen=True)
class TrackerParams:
    """
    Gains and tolerances of the ScLERP + rate-control tracker.

    Attributes:
        step_tau (float): ScLERP increment per intermediate target (<= 0.1)
        damping_lambda (float): damped least squares lambda
        max_joint_step (float): largest joint change per iteration
        pose_tol_rot (float): radians
        pose_tol_trans (float): meters
        max_iters (int): iterations allowed per intermediate target
        converge_tol (float): servo until both errors fall below this
        stall_limit (int): clamped iterations without progress before failing
    """

    step_tau: float = 0.02
    damping_lambda: float = 0.01
    max_joint_step: float = 0.1
    pose_tol_rot: float = 1e-3
    pose_tol_trans: float = 1e-3
    max_iters: int = 200
    converge_tol: float = 1e-10
    stall_limit: int = 10

    def __post_init__(self):
        for name in ('step_tau', 'damping_lambda', 'max_joint_step', 'pose_tol_rot',
                     'pose_tol_trans', 'max_iters', 'converge_tol', 'stall_limit'):
            if getattr(self, name) <= 0:
                raise InputError(f"Tracker parameter {name} must be positive")
        if self.step_tau > 0.1:
            raise InputError(f"step_tau must be <= 0.1, got {self.step_tau}")

    @classmethod
    def from_config(cls, cfg) -> TrackerParams:
        """Build tracker parameters from a Config class (see config.py)."""
        return cls(
            step_tau=cfg.TRACKER_STEP_TAU,
            damping_lambda=cfg.TRACKER_DAMPING,
            max_joint_step=cfg.TRACKER_MAX_JOINT_STEP,
            pose_tol_rot=cfg.TRACKER_POSE_TOL_ROT,
            pose_tol_trans=cfg.TRACKER_POSE_TOL_TRANS,
            max_iters=cfg.TRACKER_MAX_ITERS,
            converge_tol=cfg.TRACKER_CONVERGE_TOL,
        )

    def to_dict(self) -> dict:
        return {
            'step_tau': self.step_tau,
            'damping_lambda': self.damping_lambda,
            'max_joint_step': self.max_joint_step,
            'pose_tol_rot': self.pose_tol_rot,
            'pose_tol_trans': self.pose_tol_trans,
            'max_iters': self.max_iters,
            'converge_tol': self.converge_tol,
        }
