import math
from pathlib import Path

import numpy as np
import pytest

from models import db
from models.path import PosePath
from models.pose import Pose, UnitTwist
from utils import formats, se3

FIXTURES = Path(__file__).resolve().parent.parent / 'fixtures'

# Ready configuration of the 7-DoF sample arm, gripper pointing down.
ARM_READY = np.array([0.0, -math.pi / 4, 0.0, -3 * math.pi / 4, 0.0, math.pi / 2, 0.0])


@pytest.fixture(scope='session')
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def random_pose(rng):
    """Factory for random poses with rotation angle at most ``max_angle``."""
    def make(max_angle=math.pi - 0.05, scale=1.0):
        axis = rng.normal(size=3)
        angle = rng.uniform(0.0, max_angle)
        return Pose.from_axis_angle(axis, angle, translation=rng.normal(scale=scale, size=3))
    return make


@pytest.fixture(scope='session')
def planar_2r():
    return formats.load_robot_model(FIXTURES / 'robots' / 'planar_2r.json')


@pytest.fixture(scope='session')
def arm_7dof():
    return formats.load_robot_model(FIXTURES / 'robots' / 'arm_7dof.json')


def rotation_twist(axis, point):
    """Unit twist of a rotation about the line through ``point`` along ``axis``."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    return UnitTwist(np.cross(point, axis), axis)


def translation_twist(direction):
    direction = np.asarray(direction, dtype=np.float64)
    return UnitTwist(direction / np.linalg.norm(direction), np.zeros(3))


@pytest.fixture
def screw_path():
    """
    Factory chaining constant-screw motions into a PosePath.

    Each motion is ``(twist_or_callable, magnitude, samples)``; a callable
    receives the current pose and returns the twist, so rotations can be
    taken about the current end-effector position. Returns the path and
    the index where each motion ends.
    """
    def make(start, motions):
        poses = [start]
        junctions = []
        for twist, magnitude, samples in motions:
            origin = poses[-1]
            if callable(twist):
                twist = twist(origin)
            for k in range(1, samples + 1):
                poses.append(se3.exp_twist(twist, magnitude * k / samples) @ origin)
            junctions.append(len(poses) - 1)
        return PosePath(tuple(poses)), junctions
    return make


@pytest.fixture
def app():
    from __init__ import create_app

    app = create_app('testing')
    with app.app_context():
        db.create_all()
        yield app
        db.session.remove()
        db.drop_all()


@pytest.fixture
def client(app):
    return app.test_client()
