"""
Task instances, demonstrations and the guiding poses extracted from them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from models.path import PosePath
from models.pose import Pose
from utils.errors import InputError, TransferError

WITHIN_OBJECT = 'within-object'
BETWEEN_OBJECT = 'between-object'
TRANSIT = 'transit'
LEG_MODES = (WITHIN_OBJECT, BETWEEN_OBJECT, TRANSIT)


@dataclass(frozen=True, eq=False)
class TaskInstance:
    """
    Poses of the task-relevant objects, in a significant order.

    Attributes:
        objects (tuple): (object_id, Pose) pairs with unique ids
    """

    objects: tuple

    def __post_init__(self):
        objects = tuple((str(oid), pose) for oid, pose in self.objects)
        ids = [oid for oid, _ in objects]
        duplicates = sorted({oid for oid in ids if ids.count(oid) > 1})
        if duplicates:
            raise InputError(f"Duplicate object ids in task instance: {duplicates}")
        object.__setattr__(self, 'objects', objects)

    @property
    def ids(self) -> list:
        return [oid for oid, _ in self.objects]

    def pose_of(self, object_id: str) -> Pose:
        for oid, pose in self.objects:
            if oid == object_id:
                return pose
        raise TransferError(f"Object '{object_id}' is missing from the task instance",
                            object_id=object_id)

    def left_multiplied(self, t: Pose) -> TaskInstance:
        return TaskInstance(tuple((oid, t @ pose) for oid, pose in self.objects))

    def to_dict(self) -> list:
        return [{'id': oid, 'pose': pose.to_dict()} for oid, pose in self.objects]


@dataclass(frozen=True, eq=False)
class Demonstration:
    """A single recorded demonstration: label, end-effector path and task instance."""

    label: str
    path: PosePath
    instance: TaskInstance
    roi_radius: Optional[float] = None

    def __post_init__(self):
        if not self.label:
            raise InputError("A demonstration needs a non-empty label")
        if not self.instance.objects:
            raise InputError(f"Demonstration '{self.label}' has no task-relevant objects")
        if self.roi_radius is not None and (isinstance(self.roi_radius, (bool, str))
                                            or not self.roi_radius > 0):
            raise InputError(f"roi_radius must be positive, got {self.roi_radius}")


@dataclass(frozen=True, eq=False)
class GuidingPoseSet:
    """
    Object-relative poses O_i^-1 . G at retained breakpoints, per object in
    visit order.

    Attributes:
        per_object (tuple): (object_id, tuple of relative Pose) pairs
        roi_radius (float): meters
        source_indices (tuple): breakpoint indices (into the demonstration
            path) behind each object's relative poses
    """

    per_object: tuple
    roi_radius: float
    source_indices: tuple = ()
    report: Optional[ExtractionReport] = None

    @property
    def object_ids(self) -> list:
        return [oid for oid, _ in self.per_object]

    @property
    def pose_count(self) -> int:
        return sum(len(poses) for _, poses in self.per_object)

    def to_dict(self) -> dict:
        return {
            'roi_radius': self.roi_radius,
            'per_object': [
                {
                    'id': oid,
                    'relative_poses': [p.to_dict() for p in poses],
                    'source_indices': list(indices),
                }
                for (oid, poses), indices in zip(self.per_object, self.source_indices)
            ],
        }


@dataclass
class ExtractionReport:
    """Diagnostics collected while extracting guiding poses."""

    visit_order: list = field(default_factory=list)
    unreached: list = field(default_factory=list)
    nearest_miss: dict = field(default_factory=dict)
    reentered: list = field(default_factory=list)
    order_disagrees: bool = False

    def to_dict(self) -> dict:
        return {
            'visit_order': list(self.visit_order),
            'unreached': list(self.unreached),
            'nearest_miss': dict(self.nearest_miss),
            'reentered': list(self.reentered),
            'order_disagrees': self.order_disagrees,
        }


@dataclass(frozen=True, eq=False)
class Waypoint:
    """An absolute end-effector pose tagged with the object it was stored under."""

    object_id: str
    pose: Pose

    def to_dict(self) -> dict:
        return {'object_id': self.object_id, 'pose': self.pose.to_dict()}


@dataclass(frozen=True, eq=False)
class ConstraintLeg:
    """One constant-screw leg of a constraint plan."""

    start: Pose
    goal: Pose
    mode: str
    from_object: Optional[str] = None
    to_object: Optional[str] = None

    def __post_init__(self):
        if self.mode not in LEG_MODES:
            raise InputError(f"Unknown leg mode '{self.mode}'")

    def to_dict(self) -> dict:
        return {
            'mode': self.mode,
            'from_object': self.from_object,
            'to_object': self.to_object,
            'start': self.start.to_dict(),
            'goal': self.goal.to_dict(),
        }
