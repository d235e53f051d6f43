"""
Controllers package initialization for the planning service.

This module provides centralized access to all controller classes.
"""

from .base_controller import BaseController
from .kinematics_controller import KinematicsController
from .planning_controller import PlanningController
from .plot_data_controller import PlotDataController
from .protocol_controller import ProtocolController, ProtocolPlan
from .segmentation_controller import SegmentationController
from .sensor_controller import SensorChannel, SensorSim
from .skill_controller import SkillController, SkillEntry, SkillLibrary
from .transfer_controller import TransferController

# Make controllers available when importing from controllers package
__all__ = [
    'BaseController',
    'KinematicsController',
    'PlanningController',
    'PlotDataController',
    'ProtocolController',
    'ProtocolPlan',
    'SegmentationController',
    'SensorChannel',
    'SensorSim',
    'SkillController',
    'SkillEntry',
    'SkillLibrary',
    'TransferController',
]
