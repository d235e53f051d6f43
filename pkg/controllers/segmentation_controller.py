"""
Constant-screw segmentation of demonstrated pose paths.

A demonstration is cut into the fewest greedy chords such that every pose
between two breakpoints stays within tolerance of the ScLERP path joining
them. Interior poses are matched to the chord by cumulative path length
rather than by index, so uneven hand speed does not read as geometry.
"""
import logging

import numpy as np

from models.path import PosePath, Segment, SegmentedPath
from utils import se3
from utils.errors import InputError
from .base_controller import BaseController

logger = logging.getLogger(__name__)

# Composite distance (rad + m) under which consecutive poses count as a hold.
DUPLICATE_THRESHOLD = 1e-6


class SegmentationController(BaseController):
    """
    Controller for splitting pose paths into constant-screw segments.

    This controller handles:
    - Duplicate-pose collapsing
    - Greedy chord extension against rotation/translation tolerances
    - Reconstruction error of a segmentation
    """

    @staticmethod
    def segment_path(path: PosePath, tol_rot: float, tol_trans: float) -> SegmentedPath:
        """
        Segment a pose path into constant-screw chords.

        Args:
            path (PosePath): demonstrated end-effector poses
            tol_rot (float): max rotational deviation from a chord, radians
            tol_trans (float): max translational deviation from a chord, meters

        Returns:
            SegmentedPath: breakpoints are 0-based indices into ``path``
        """
        if tol_rot <= 0 or tol_trans <= 0:
            raise InputError(f"Tolerances must be positive, got {tol_rot}, {tol_trans}")
        if len(path) < 2:
            raise InputError("A pose path needs at least 2 poses")

        kept = SegmentationController.collapse_duplicates(path)
        rotations, translations = path.rotations(), path.translations()
        arclen = SegmentationController.cumulative_length(rotations, translations)

        def fits(a, b):
            max_rot, max_trans = SegmentationController._chord_deviation(
                path, rotations, translations, arclen, a, b
            )
            return max_rot <= tol_rot and max_trans <= tol_trans

        breakpoints = [kept[0]]
        start = 0
        while start < len(kept) - 1:
            end = start + 1
            # Extend until the next pose would break the chord.
            while end + 1 < len(kept) and fits(kept[start], kept[end + 1]):
                end += 1
            breakpoints.append(kept[end])
            start = end

        segments = [
            Segment(a, b, path[a], path[b], se3.relative_screw(path[a], path[b]))
            for a, b in zip(breakpoints, breakpoints[1:])
        ]
        logger.debug(
            "Segmented %d poses into %d constant-screw segments", len(path), len(segments)
        )
        return SegmentedPath(tuple(breakpoints), tuple(segments), tol_rot, tol_trans)

    @staticmethod
    def reconstruction_error(path: PosePath, seg: SegmentedPath) -> tuple[float, float]:
        """
        Largest deviation of any interior pose from its segment's ScLERP chord.

        Returns:
            tuple: (max rotation in radians, max translation in meters)
        """
        if seg.source_length != len(path):
            raise InputError(
                f"Segmentation covers {seg.source_length} poses but the path has {len(path)}"
            )
        rotations, translations = path.rotations(), path.translations()
        arclen = SegmentationController.cumulative_length(rotations, translations)
        worst_rot, worst_trans = 0.0, 0.0
        for a, b in zip(seg.breakpoints, seg.breakpoints[1:]):
            max_rot, max_trans = SegmentationController._chord_deviation(
                path, rotations, translations, arclen, a, b
            )
            worst_rot = max(worst_rot, max_rot)
            worst_trans = max(worst_trans, max_trans)
        return worst_rot, worst_trans

    @staticmethod
    def collapse_duplicates(path: PosePath) -> list:
        """
        Indices of the poses that survive collapsing sensor holds.

        The first and last index are always kept.
        """
        kept = [0]
        for j in range(1, len(path)):
            rot, trans = path[kept[-1]].distance_to(path[j])
            if rot + trans > DUPLICATE_THRESHOLD:
                kept.append(j)
        last = len(path) - 1
        if kept[-1] != last:
            if len(kept) > 1:
                kept[-1] = last
            else:
                kept.append(last)
        return kept

    @staticmethod
    def cumulative_length(rotations, translations) -> np.ndarray:
        """Cumulative chordal length, 1 rad weighted as 1 m."""
        steps = se3.rotation_angles_batch(rotations[:-1], rotations[1:])
        steps = steps + np.linalg.norm(np.diff(translations, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(steps)])

    @staticmethod
    def _chord_deviation(path, rotations, translations, arclen, a, b):
        interior = np.arange(a + 1, b)
        if interior.size == 0:
            return 0.0, 0.0
        span = arclen[b] - arclen[a]
        if span > 0.0:
            taus = (arclen[interior] - arclen[a]) / span
        else:
            taus = np.zeros(interior.size)
        chord_rot, chord_trans = se3.sclerp_batch(path[a], path[b], taus)
        rot_dev = se3.rotation_angles_batch(chord_rot, rotations[interior])
        trans_dev = np.linalg.norm(chord_trans - translations[interior], axis=1)
        return float(rot_dev.max()), float(trans_dev.max())
