"""
Guiding-pose extraction and transfer to new task instances.

A constant-screw segment whose two breakpoints both fall inside an object's
region of interest (a closed ball of radius r around the object position)
belongs to that object, and its breakpoints are stored relative to it.
Re-anchoring them on new object poses yields the absolute waypoints of the
same constant-screw motion.
"""
import logging

import numpy as np
from scipy.spatial.distance import cdist

from models.path import SegmentedPath
from models.task import (
    BETWEEN_OBJECT,
    WITHIN_OBJECT,
    ConstraintLeg,
    Demonstration,
    ExtractionReport,
    GuidingPoseSet,
    TaskInstance,
    Waypoint,
)
from utils.errors import ExtractionError, InputError
from .base_controller import BaseController

logger = logging.getLogger(__name__)


class TransferController(BaseController):
    """
    Controller for moving demonstrated constraints onto new task instances.

    This controller handles:
    - ROI-based guiding pose extraction
    - Recomputing guiding poses for a new instance
    - Turning waypoints into constant-screw constraint legs
    """

    @staticmethod
    def extract_guiding_poses(demo: Demonstration, seg: SegmentedPath,
                              roi_radius: float) -> GuidingPoseSet:
        """
        Store the endpoints of segments lying in each object's ROI relative to that object.

        Args:
            demo (Demonstration): the demonstration ``seg`` was built from
            seg (SegmentedPath): its constant-screw segmentation
            roi_radius (float): ROI sphere radius, meters

        Returns:
            GuidingPoseSet: per-object relative poses in visit order, with
            an ExtractionReport attached
        """
        if roi_radius <= 0:
            raise InputError(f"roi_radius must be positive, got {roi_radius}")
        if seg.source_length != len(demo.path):
            raise InputError(
                f"Segmentation of {seg.source_length} poses does not match "
                f"demonstration '{demo.label}' with {len(demo.path)} poses"
            )

        ids = demo.instance.ids
        breakpoint_poses = [demo.path[i] for i in seg.breakpoints]
        positions = np.stack([p.translation for p in breakpoint_poses])
        centers = np.stack([pose.translation for _, pose in demo.instance.objects])
        distances = cdist(positions, centers)
        in_roi = distances <= roi_radius
        # A breakpoint counts only as an endpoint of a segment lying wholly in the ROI.
        inside = np.zeros_like(in_roi)
        inside[:-1] |= in_roi[:-1] & in_roi[1:]
        inside[1:] |= in_roi[:-1] & in_roi[1:]

        first_entry = {}
        for col, oid in enumerate(ids):
            rows = np.flatnonzero(inside[:, col])
            if rows.size:
                first_entry[oid] = int(rows[0])

        # Overlapping ROIs: the object entered first wins, then the nearer one.
        assigned = {oid: [] for oid in ids}
        for row in range(len(breakpoint_poses)):
            candidates = [ids[c] for c in np.flatnonzero(inside[row])]
            if not candidates:
                continue
            owner = min(candidates,
                        key=lambda oid: (first_entry[oid], distances[row, ids.index(oid)]))
            assigned[owner].append(row)

        report = ExtractionReport()
        for col, oid in enumerate(ids):
            if not assigned[oid]:
                report.unreached.append(oid)
                report.nearest_miss[oid] = float(distances[:, col].min())

        reached = [oid for oid in ids if assigned[oid]]
        if not reached:
            raise ExtractionError(
                f"No segment of '{demo.label}' lies within {roi_radius} m of any object",
                nearest_miss=report.nearest_miss,
            )

        visit_order = sorted(reached, key=lambda oid: assigned[oid][0])
        report.visit_order = visit_order
        if visit_order != reached:
            report.order_disagrees = True
            logger.warning(
                "Demonstration '%s' visits objects as %s but lists them as %s",
                demo.label, visit_order, reached,
            )
        for oid in visit_order:
            rows = assigned[oid]
            if any(b - a > 1 for a, b in zip(rows, rows[1:])):
                report.reentered.append(oid)
                logger.warning(
                    "Demonstration '%s' re-enters the ROI of '%s'; keeping all visits in order",
                    demo.label, oid,
                )
        if report.unreached:
            logger.warning("Demonstration '%s' never reaches %s", demo.label, report.unreached)

        per_object, source_indices = [], []
        for oid in visit_order:
            anchor_inv = demo.instance.pose_of(oid).inverse()
            rows = assigned[oid]
            per_object.append((oid, tuple(anchor_inv @ breakpoint_poses[r] for r in rows)))
            source_indices.append(tuple(seg.breakpoints[r] for r in rows))

        return GuidingPoseSet(tuple(per_object), roi_radius, tuple(source_indices), report)

    @staticmethod
    def transfer_guiding_poses(gp: GuidingPoseSet, new_instance: TaskInstance) -> list:
        """
        Re-anchor guiding poses on a new task instance: O_i' . (O_i^-1 . G).

        Returns:
            list[Waypoint]: absolute waypoints, concatenated in object order
        """
        waypoints = []
        for oid, relative_poses in gp.per_object:
            anchor = new_instance.pose_of(oid)
            waypoints.extend(Waypoint(oid, anchor @ rel) for rel in relative_poses)
        return waypoints

    @staticmethod
    def build_constraint_plan(waypoints: list) -> list:
        """
        Consecutive waypoints become constant-screw legs.

        Legs whose endpoints belong to different objects are tagged
        between-object; they carry the same ScLERP constraint.
        """
        if len(waypoints) < 2:
            raise InputError(f"A constraint plan needs at least 2 waypoints, got {len(waypoints)}")
        legs = []
        for a, b in zip(waypoints, waypoints[1:]):
            mode = WITHIN_OBJECT if a.object_id == b.object_id else BETWEEN_OBJECT
            legs.append(ConstraintLeg(a.pose, b.pose, mode, a.object_id, b.object_id))
        return legs
