"""
Skill controller: the label -> demonstration database.

This module handles:
- Registering skills (segmentation followed by guiding-pose extraction)
- Reusing entries across libraries
- Library files and persistence of skills through Flask-SQLAlchemy
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from models import Skill, db
from models.path import SegmentedPath
from models.task import Demonstration, GuidingPoseSet
from utils import formats
from utils.errors import DuplicateSkillError, InputError, PlannerError, UnknownSkillError
from .base_controller import BaseController
from .segmentation_controller import SegmentationController
from .transfer_controller import TransferController

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SkillEntry:
    """A registered skill: its demonstration and the artifacts derived from it."""

    label: str
    demonstration: Demonstration
    segmented: SegmentedPath
    guiding_poses: GuidingPoseSet

    def summary(self) -> dict:
        report = self.guiding_poses.report
        return {
            'label': self.label,
            'roi_radius': self.guiding_poses.roi_radius,
            'tol_rot': self.segmented.tol_rot,
            'tol_trans': self.segmented.tol_trans,
            'segment_count': self.segmented.segment_count,
            'breakpoints': list(self.segmented.breakpoints),
            'guiding_pose_count': self.guiding_poses.pose_count,
            'objects': self.guiding_poses.object_ids,
            'extraction': report.to_dict() if report is not None else None,
        }


class SkillLibrary:
    """Mapping from unique labels to SkillEntry, in registration order."""

    def __init__(self, entries=()):
        self._entries = {}
        for entry in entries:
            self.put(entry)

    def __contains__(self, label):
        return label in self._entries

    def __len__(self):
        return len(self._entries)

    @property
    def labels(self) -> list:
        return list(self._entries)

    def get(self, label) -> SkillEntry:
        try:
            return self._entries[label]
        except KeyError:
            raise UnknownSkillError(f"Skill '{label}' is not in the library", label=label) from None

    def put(self, entry: SkillEntry, overwrite=False):
        if entry.label in self._entries and not overwrite:
            raise DuplicateSkillError(f"Skill '{entry.label}' is already registered",
                                      label=entry.label)
        self._entries[entry.label] = entry

    def entries(self) -> list:
        return list(self._entries.values())


class SkillController(BaseController):
    """
    Controller for skill registration and the persisted skill library.

    This controller handles:
    - Building library entries from demonstrations
    - Copying entries between libraries
    - Reading and writing library files
    - HTTP CRUD over the ``skill`` table
    """

    @staticmethod
    def register_skill(lib: SkillLibrary, label: str, demo: Demonstration, roi_radius=None,
                       seg_tolerances=(0.05, 0.005), overwrite=False) -> SkillLibrary:
        """
        Segment a demonstration, extract its guiding poses and store the result.

        Args:
            lib (SkillLibrary): library to update in place
            label (str): task label
            demo (Demonstration): the recording
            roi_radius (float): ROI radius; falls back to the demonstration's own
            seg_tolerances (tuple): (tol_rot, tol_trans)
            overwrite (bool): replace an existing entry with the same label

        Returns:
            SkillLibrary: ``lib``
        """
        if label in lib and not overwrite:
            raise DuplicateSkillError(f"Skill '{label}' is already registered", label=label)
        radius = roi_radius if roi_radius is not None else demo.roi_radius
        if radius is None:
            raise InputError(f"Skill '{label}': no ROI radius given", label=label)
        tol_rot, tol_trans = seg_tolerances
        try:
            seg = SegmentationController.segment_path(demo.path, tol_rot, tol_trans)
            guiding = TransferController.extract_guiding_poses(demo, seg, radius)
        except PlannerError as err:
            raise err.with_context(f"skill '{label}'") from err

        lib.put(SkillEntry(label, demo, seg, guiding), overwrite=overwrite)
        logger.info("Registered skill '%s': %d segments, %d guiding poses on %s",
                    label, seg.segment_count, guiding.pose_count, guiding.object_ids)
        return lib

    @staticmethod
    def reuse_skills(lib: SkillLibrary, source: SkillLibrary, labels, overwrite=False) -> SkillLibrary:
        """Copy ``labels`` from ``source`` into ``lib`` without re-demonstrating them."""
        for label in labels:
            lib.put(source.get(label), overwrite=overwrite)
        return lib

    @staticmethod
    def library_from_demo_files(skills: dict, roi_radius, seg_tolerances) -> SkillLibrary:
        """
        Register every ``label -> demonstration path`` pair into a new library.

        A demonstration's own ``roi_radius`` wins over the ``roi_radius`` default.
        """
        lib = SkillLibrary()
        for label, path in skills.items():
            demo = formats.load_demonstration(path)
            radius = demo.roi_radius if demo.roi_radius is not None else roi_radius
            SkillController.register_skill(lib, label, demo, radius, seg_tolerances)
        return lib

    @staticmethod
    def library_to_dict(lib: SkillLibrary) -> dict:
        """
        Library file: demonstrations and registration parameters per label,
        with the derived artifacts alongside for inspection.
        """
        skills = {}
        for entry in lib.entries():
            skills[entry.label] = {
                'demonstration': formats.demonstration_to_dict(entry.demonstration),
                'roi_radius': entry.guiding_poses.roi_radius,
                'tol_rot': entry.segmented.tol_rot,
                'tol_trans': entry.segmented.tol_trans,
                'segmented': entry.segmented.to_dict(),
                'guiding_poses': entry.guiding_poses.to_dict(),
            }
        return {'skills': skills}

    @staticmethod
    def library_from_dict(doc, where='skill library') -> SkillLibrary:
        """Rebuild a library; derived artifacts are recomputed, not trusted."""
        formats.check_fields(doc, ('skills',), formats.LIBRARY_FIELDS, where)
        if not isinstance(doc['skills'], dict):
            raise InputError(f"{where}.skills must be a JSON object")
        lib = SkillLibrary()
        for label, item in doc['skills'].items():
            item_where = f"{where}.skills.{label}"
            formats.check_fields(
                item, ('demonstration', 'roi_radius', 'tol_rot', 'tol_trans'),
                ('demonstration', 'roi_radius', 'tol_rot', 'tol_trans', 'segmented', 'guiding_poses'),
                item_where,
            )
            demo = formats.demonstration_from_dict(item['demonstration'],
                                                   where=f"{item_where}.demonstration")
            SkillController.register_skill(
                lib, label, demo,
                formats.number(item['roi_radius'], f"{item_where}.roi_radius", positive=True),
                (formats.number(item['tol_rot'], f"{item_where}.tol_rot"),
                 formats.number(item['tol_trans'], f"{item_where}.tol_trans")),
            )
        return lib

    @staticmethod
    def load_library(path) -> SkillLibrary:
        path = Path(path)
        if not path.exists():
            return SkillLibrary()
        return SkillController.library_from_dict(formats.read_json(path), where=str(path))

    @staticmethod
    def save_library(lib: SkillLibrary, path):
        formats.write_json(SkillController.library_to_dict(lib), path)

    # Database-backed library

    @staticmethod
    def library_from_db(labels=None) -> SkillLibrary:
        """Rebuild the persisted library (or just ``labels``), in label order."""
        lib = SkillLibrary()
        query = Skill.query
        if labels is not None:
            query = query.filter(Skill.label.in_(list(labels)))
        for row in query.order_by(Skill.label).all():
            demo = formats.demonstration_from_dict(row.demonstration_doc,
                                                   where=f"skill '{row.label}'")
            SkillController.register_skill(lib, row.label, demo, row.roi_radius,
                                           (row.tol_rot, row.tol_trans))
        return lib

    @staticmethod
    @BaseController.handle_database_error
    @BaseController.handle_planner_error
    def create_skill(data, defaults):
        """
        Register a skill from a JSON request and persist it.

        Args:
            data (dict): label, demonstration document and optional
                roi_radius, tol_rot, tol_trans, overwrite
            defaults: Config class providing default parameters

        Returns:
            tuple: (Flask response, status_code)
        """
        validation_errors = BaseController.validate_required_fields(data, ['label', 'demonstration'])
        if validation_errors:
            return BaseController.validation_error_response(validation_errors)

        label = str(data['label'])
        overwrite = data.get('overwrite', False)
        if not isinstance(overwrite, bool):
            raise InputError(f"overwrite must be true or false, got {overwrite!r}")
        existing = Skill.query.filter_by(label=label).first()
        if existing and not overwrite:
            raise DuplicateSkillError(f"Skill '{label}' is already registered", label=label)

        demo = formats.demonstration_from_dict(data['demonstration'], where='demonstration',
                                               allow_model_paths=False)
        roi_radius = formats.number(data.get('roi_radius', demo.roi_radius or defaults.ROI_RADIUS),
                                    'roi_radius', positive=True)
        tol_rot = formats.number(data.get('tol_rot', defaults.SEGMENT_TOL_ROT), 'tol_rot')
        tol_trans = formats.number(data.get('tol_trans', defaults.SEGMENT_TOL_TRANS), 'tol_trans')
        lib = SkillController.register_skill(SkillLibrary(), label, demo, roi_radius,
                                             (tol_rot, tol_trans))
        entry = lib.get(label)

        row = existing or Skill(label=label)
        row.demonstration = json.dumps(formats.demonstration_to_dict(demo))
        row.roi_radius = roi_radius
        row.tol_rot = tol_rot
        row.tol_trans = tol_trans
        row.segment_count = entry.segmented.segment_count
        row.guiding_pose_count = entry.guiding_poses.pose_count
        if existing is None:
            db.session.add(row)
        db.session.commit()

        return BaseController.success_response(
            data={**row.to_dict(), 'skill': entry.summary()},
            message="Skill registered successfully!",
            status_code=200 if existing else 201,
        )

    @staticmethod
    def get_all_skills(page=1, per_page=10):
        """
        Retrieve a paginated list of skills.

        Returns:
            tuple: (Flask response, status_code)
        """
        pagination = BaseController.paginate_query(Skill.query.order_by(Skill.label), page, per_page)
        return BaseController.success_response(
            data={
                'skills': [row.to_dict() for row in pagination['items']],
                'pagination': {k: v for k, v in pagination.items() if k != 'items'},
            },
            message=f"Retrieved {len(pagination['items'])} skills",
        )

    @staticmethod
    def get_skill(label):
        row = Skill.query.filter_by(label=label).first()
        if not row:
            return BaseController.error_response(f"Skill '{label}' not found", 404)
        return BaseController.success_response(
            data=row.to_dict(include_demonstration=True),
            message="Skill retrieved successfully",
        )

    @staticmethod
    @BaseController.handle_database_error
    def delete_skill(label):
        row = Skill.query.filter_by(label=label).first()
        if not row:
            return BaseController.error_response(f"Skill '{label}' not found", 404)
        db.session.delete(row)
        db.session.commit()
        return BaseController.success_response(message=f"Skill '{label}' deleted successfully")
