"""
Basic routes for the planning service.

This module contains general API endpoints like health checks,
root endpoint, and error handlers.
"""
import os

from flask import Blueprint, jsonify

# Create blueprint for basic routes
basic_bp = Blueprint('basic', __name__)

SERVICE_NAME = "Screw-Constraint Planning Service"
VERSION = "1.0.0"


def get_api_info():
    """
    Get information about the API structure and available endpoints.

    Returns:
        dict: API structure information
    """
    return {
        "api_version": "v1",
        "base_url": "/api/v1",
        "endpoints": {
            "skills": {
                "base_path": "/api/v1/skills",
                "description": "Skill library: demonstrations registered under task labels",
                "methods": {
                    "POST /api/v1/skills": "Register a skill from a demonstration",
                    "GET /api/v1/skills": "List skills (paginated)",
                    "GET /api/v1/skills/{label}": "Get a skill with its demonstration",
                    "DELETE /api/v1/skills/{label}": "Delete a skill"
                }
            },
            "planning": {
                "base_path": "/api/v1/planning",
                "description": "Stateless planning requests",
                "methods": {
                    "POST /api/v1/planning/segment": "Segment a demonstration into constant-screw motions",
                    "POST /api/v1/planning/transfer": "Transfer a skill's guiding poses to new object poses",
                    "POST /api/v1/planning/plan": "Plan the task steps of a protocol into joint paths"
                }
            }
        },
        "units": "radians and meters; quaternions (w, x, y, z) with w >= 0",
        "response_format": {
            "success": {
                "success": True,
                "message": "Success message",
                "data": "Response data"
            },
            "error": {
                "success": False,
                "message": "Error message",
                "error": "Error type and details"
            }
        }
    }


@basic_bp.route('/')
def index():
    """
    Root endpoint providing API information.

    Returns:
        JSON: API information and available endpoints
    """
    return jsonify({
        "message": f"Welcome to the {SERVICE_NAME}",
        "description": "Programming by demonstration with constant-screw task constraints",
        "version": VERSION,
        "api_info": get_api_info(),
        "health": "OK"
    })


@basic_bp.route('/health')
def health_check():
    """
    Health check endpoint for monitoring and deployment.

    Returns:
        JSON: Health status information
    """
    return jsonify({
        "status": "healthy",
        "service": SERVICE_NAME,
        "version": VERSION,
        "environment": os.getenv('SCREWPBD_ENV', 'development')
    })


@basic_bp.errorhandler(500)
def internal_error(error):
    """Handle 500 errors for this blueprint."""
    return jsonify({
        "success": False,
        "error": "Internal server error",
        "message": "An unexpected error occurred"
    }), 500
