"""
Pose paths and their constant-screw segmentation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from models.pose import Pose, ScrewDisplacement
from utils.errors import InputError


@dataclass(frozen=True, eq=False)
class PosePath:
    """
    An ordered end-effector pose sequence, optionally timestamped.

    Attributes:
        poses (tuple[Pose]): at least two poses
        timestamps (tuple[float] | None): seconds, strictly increasing
    """

    poses: tuple
    timestamps: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, 'poses', tuple(self.poses))
        if len(self.poses) < 2:
            raise InputError(f"A pose path needs at least 2 poses, got {len(self.poses)}")
        if self.timestamps is not None:
            stamps = tuple(float(t) for t in self.timestamps)
            if len(stamps) != len(self.poses):
                raise InputError(
                    f"Got {len(stamps)} timestamps for {len(self.poses)} poses"
                )
            if any(b <= a for a, b in zip(stamps, stamps[1:])):
                raise InputError("Timestamps must be strictly increasing")
            object.__setattr__(self, 'timestamps', stamps)

    def __len__(self):
        return len(self.poses)

    def __getitem__(self, index):
        return self.poses[index]

    def rotations(self) -> np.ndarray:
        return np.stack([p.rotation for p in self.poses])

    def translations(self) -> np.ndarray:
        return np.stack([p.translation for p in self.poses])

    def left_multiplied(self, t: Pose) -> PosePath:
        """Same path seen from another world frame: every pose becomes t . G."""
        return PosePath(tuple(t @ p for p in self.poses), self.timestamps)


@dataclass(frozen=True)
class Segment:
    """One constant-screw segment between two breakpoints."""

    start_index: int
    end_index: int
    start: Pose
    end: Pose
    screw: ScrewDisplacement

    def to_dict(self) -> dict:
        return {
            'start_index': self.start_index,
            'end_index': self.end_index,
            'start': self.start.to_dict(),
            'end': self.end.to_dict(),
            'screw': self.screw.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class SegmentedPath:
    """
    Breakpoints into a source path (0-based, first 0 and last m-1) and the
    constant-screw segments between consecutive breakpoints.
    """

    breakpoints: tuple
    segments: tuple
    tol_rot: float
    tol_trans: float

    def __post_init__(self):
        object.__setattr__(self, 'breakpoints', tuple(int(i) for i in self.breakpoints))
        object.__setattr__(self, 'segments', tuple(self.segments))
        bps = self.breakpoints
        if len(bps) < 2 or bps[0] != 0:
            raise InputError(f"Breakpoints must start at 0 and hold >= 2 indices: {bps}")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise InputError(f"Breakpoints must be strictly increasing: {bps}")
        if len(self.segments) != len(bps) - 1:
            raise InputError("Segment count must equal breakpoint count - 1")

    @property
    def segment_count(self) -> int:
        return len(self.segments)

    @property
    def source_length(self) -> int:
        return self.breakpoints[-1] + 1

    def breakpoint_poses(self) -> list:
        return [self.segments[0].start] + [s.end for s in self.segments]

    def to_dict(self) -> dict:
        return {
            'breakpoints': list(self.breakpoints),
            'tol_rot': self.tol_rot,
            'tol_trans': self.tol_trans,
            'segments': [s.to_dict() for s in self.segments],
        }
