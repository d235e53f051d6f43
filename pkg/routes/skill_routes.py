"""
Skill library routes for the planning service.

This module defines HTTP endpoints for registering, listing and deleting
skills. Registration segments the posted demonstration and extracts its
guiding poses before anything is stored.
"""
from flask import Blueprint, request

from controllers import SkillController
from .settings import planner_config

skill_bp = Blueprint('skill', __name__, url_prefix='/api/v1/skills')


@skill_bp.route('', methods=['POST'])
def create_skill():
    """
    Register a skill.

    Expected JSON payload:
    {
        "label": "pick",
        "demonstration": {"label": "pick", "poses": [...], "objects": [...]},
        "roi_radius": 0.25,
        "tol_rot": 0.05,
        "tol_trans": 0.005,
        "overwrite": false
    }

    Returns:
        JSON: Stored skill with segmentation and extraction summary
    """
    data = request.get_json(silent=True)

    if not data:
        return SkillController.error_response("Request body must be valid JSON", 400)

    return SkillController.create_skill(data, planner_config())


@skill_bp.route('', methods=['GET'])
def get_all_skills():
    """
    Get a paginated list of skills.

    Query parameters:
        page (int): Page number (default: 1)
        per_page (int): Items per page (default: 10, max: 100)
    """
    page = request.args.get('page', 1, type=int)
    per_page = min(request.args.get('per_page', 10, type=int), 100)

    return SkillController.get_all_skills(page=page, per_page=per_page)


@skill_bp.route('/<label>', methods=['GET'])
def get_skill(label):
    return SkillController.get_skill(label)


@skill_bp.route('/<label>', methods=['DELETE'])
def delete_skill(label):
    return SkillController.delete_skill(label)
