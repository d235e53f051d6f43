"""
Routes package initialization for the planning service.

This module provides centralized access to all route blueprints
and sets up the URL structure for the API.
"""

from .basic_routes import basic_bp, get_api_info
from .planning_routes import planning_bp
from .skill_routes import skill_bp

# Make blueprints available when importing from routes package
__all__ = ['basic_bp', 'skill_bp', 'planning_bp', 'get_api_info']


def register_blueprints(app):
    """
    Register all blueprints with the Flask application.

    Args:
        app (Flask): The Flask application instance
    """
    app.register_blueprint(basic_bp)
    app.register_blueprint(skill_bp)
    app.register_blueprint(planning_bp)
