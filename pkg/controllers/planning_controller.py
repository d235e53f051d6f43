"""
Planning controller for the HTTP service.

This module wraps the segmentation, transfer and protocol planning
pipelines for JSON requests. Skills are taken from the persisted library.
"""
import logging

from models.protocol import TASK, iter_steps
from models.robot import TrackerParams
from utils import formats
from utils.errors import InputError
from .base_controller import BaseController
from .kinematics_controller import KinematicsController
from .protocol_controller import ProtocolController
from .segmentation_controller import SegmentationController
from .skill_controller import SkillController
from .transfer_controller import TransferController

logger = logging.getLogger(__name__)


class PlanningController(BaseController):
    """
    Controller for stateless planning requests.

    This controller handles:
    - Segmenting a posted demonstration
    - Transferring a stored skill to a new task instance
    - Planning a posted protocol against stored skills
    """

    @staticmethod
    @BaseController.handle_planner_error
    def segment_demonstration(data, defaults):
        """
        Segment a demonstration document.

        Args:
            data (dict): demonstration and optional tol_rot, tol_trans
            defaults: Config class providing default tolerances

        Returns:
            tuple: (Flask response, status_code)
        """
        validation_errors = BaseController.validate_required_fields(data, ['demonstration'])
        if validation_errors:
            return BaseController.validation_error_response(validation_errors)

        demo = formats.demonstration_from_dict(data['demonstration'], allow_model_paths=False)
        seg = SegmentationController.segment_path(
            demo.path,
            formats.number(data.get('tol_rot', defaults.SEGMENT_TOL_ROT), 'tol_rot'),
            formats.number(data.get('tol_trans', defaults.SEGMENT_TOL_TRANS), 'tol_trans'),
        )
        error = SegmentationController.reconstruction_error(demo.path, seg)
        return BaseController.success_response(
            data=formats.segmented_path_to_dict(seg, error),
            message=f"{seg.segment_count} segment(s)",
        )

    @staticmethod
    @BaseController.handle_planner_error
    def transfer_skill(data):
        """
        Transfer a stored skill's guiding poses to new object poses.

        Args:
            data (dict): label and objects ([{id, pose}])

        Returns:
            tuple: (Flask response, status_code)
        """
        validation_errors = BaseController.validate_required_fields(data, ['label', 'objects'])
        if validation_errors:
            return BaseController.validation_error_response(validation_errors)

        label = str(data['label'])
        entry = SkillController.library_from_db([label]).get(label)
        instance = formats.instance_from_list(data['objects'])
        waypoints = TransferController.transfer_guiding_poses(entry.guiding_poses, instance)
        legs = TransferController.build_constraint_plan(waypoints) if len(waypoints) > 1 else []
        return BaseController.success_response(
            data={
                'label': label,
                'waypoints': [w.to_dict() for w in waypoints],
                'legs': [leg.to_dict() for leg in legs],
            },
            message=f"Transferred {len(waypoints)} guiding poses",
        )

    @staticmethod
    @BaseController.handle_planner_error
    def plan_protocol(data, defaults):
        """
        Plan a protocol document (inline model, q_start and steps).

        Returns:
            tuple: (Flask response, status_code) with the plan report and
            the joint configurations of every task step
        """
        validation_errors = BaseController.validate_required_fields(data, ['model', 'q_start', 'steps'])
        if validation_errors:
            return BaseController.validation_error_response(validation_errors)
        if 'skills' in data:
            raise InputError("Skills are taken from the service library; drop the skills field")
        if not isinstance(data['model'], dict):
            raise InputError("model must be an inline robot model")

        protocol = formats.protocol_from_dict({'name': 'request', **data}, allow_model_paths=False)
        labels = {step.label for _, step in iter_steps(protocol.steps) if step.kind == TASK}
        lib = SkillController.library_from_db(labels)
        params = TrackerParams.from_config(defaults)
        plan = ProtocolController.plan_protocol(lib, protocol.steps, protocol.model,
                                                protocol.q_start, params)

        paths = {}
        for step_id, path in plan.paths.items():
            poses = [KinematicsController.forward_kinematics(protocol.model, q) for q in path.configs]
            paths[step_id] = {
                'summary': path.summary(),
                'configs': path.configs.tolist(),
                'end_effector': [p.to_dict() for p in poses],
            }
        return BaseController.success_response(
            data={'report': plan.report, 'paths': paths},
            message=f"Planned {len(paths)} task step(s)",
        )
