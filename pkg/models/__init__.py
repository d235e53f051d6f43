"""
Database initialization module for the planning service.

This module sets up SQLAlchemy and provides the database instance used by
the persisted skill library. The geometric value types (Pose, PosePath,
RobotModel, ...) live in the sibling modules and do not touch the database.
"""
from flask_sqlalchemy import SQLAlchemy

# Initialize the database instance
db = SQLAlchemy()

# Import all models to ensure they're registered with SQLAlchemy
from .skill import Skill

__all__ = ['db', 'Skill']
