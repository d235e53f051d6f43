"""
Planning routes for the planning service.

Stateless endpoints: segmentation of a posted demonstration, transfer of a
stored skill and planning of a protocol against the stored skills.
"""
from flask import Blueprint, request

from controllers import PlanningController
from .settings import planner_config

planning_bp = Blueprint('planning', __name__, url_prefix='/api/v1/planning')


def _json_body():
    return request.get_json(silent=True)


@planning_bp.route('/segment', methods=['POST'])
def segment():
    """
    Segment a demonstration into constant-screw motions.

    Expected JSON payload:
    {
        "demonstration": {"label": "pour", "poses": [...], "objects": [...]},
        "tol_rot": 0.05,
        "tol_trans": 0.005
    }
    """
    data = _json_body()
    if not data:
        return PlanningController.error_response("Request body must be valid JSON", 400)
    return PlanningController.segment_demonstration(data, planner_config())


@planning_bp.route('/transfer', methods=['POST'])
def transfer():
    """
    Transfer a stored skill to new object poses.

    Expected JSON payload:
    {
        "label": "pick",
        "objects": [{"id": "vial", "pose": {"t": [...], "q": [...]}}]
    }
    """
    data = _json_body()
    if not data:
        return PlanningController.error_response("Request body must be valid JSON", 400)
    return PlanningController.transfer_skill(data)


@planning_bp.route('/plan', methods=['POST'])
def plan():
    """
    Plan the task steps of a protocol.

    Expected JSON payload:
    {
        "model": {"dof": 2, "joints": [...], "home_pose": {...}},
        "q_start": [0.3, 0.9],
        "poses": {"vial_a": {"t": [...], "q": [...]}},
        "steps": [{"type": "task", "label": "pick", "objects": [{"id": "vial", "pose": "vial_a"}]}]
    }
    """
    data = _json_body()
    if not data:
        return PlanningController.error_response("Request body must be valid JSON", 400)
    return PlanningController.plan_protocol(data, planner_config())
