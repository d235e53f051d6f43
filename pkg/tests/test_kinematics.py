import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from conftest import ARM_READY
from controllers import KinematicsController
from models.pose import Pose
from models.robot import JointPath, RobotModel, TrackerParams
from models.task import TRANSIT, WITHIN_OBJECT, ConstraintLeg
from utils import formats, se3
from utils.errors import InputError, JointLimitError, TrackingError

PARAMS = TrackerParams()


def random_config(model, rng, margin=0.05):
    return rng.uniform(model.lower + margin, model.upper - margin)


def chain_oracle(doc, q):
    """Homogeneous-matrix product built straight from a robot model file."""
    total = np.eye(4)
    for joint, value in zip(doc['joints'], q):
        axis = np.asarray(joint['axis'], dtype=float)
        axis = axis / np.linalg.norm(axis)
        step = np.eye(4)
        if joint['type'] == 'revolute':
            rotation = Rotation.from_rotvec(axis * value).as_matrix()
            point = np.asarray(joint['point_or_direction'], dtype=float)
            step[:3, :3] = rotation
            step[:3, 3] = point - rotation @ point
        else:
            step[:3, 3] = axis * value
        total = total @ step
    home = formats.pose_from_dict(doc['home_pose'])
    return total @ home.matrix


def finite_difference_twist(model, q, j, h=1e-6):
    """Spatial twist [v; w] of d/dq_j FK, from central differences."""
    dq = np.zeros(model.dof)
    dq[j] = h
    plus = KinematicsController.forward_kinematics(model, q + dq).matrix
    minus = KinematicsController.forward_kinematics(model, q - dq).matrix
    here = KinematicsController.forward_kinematics(model, q).matrix
    spatial = (plus - minus) / (2 * h) @ np.linalg.inv(here)
    return np.concatenate([spatial[:3, 3], se3.vee(spatial[:3, :3])])


def two_link_ik(x, y):
    """Elbow-up closed form for unit links."""
    c2 = np.clip((x * x + y * y - 2.0) / 2.0, -1.0, 1.0)
    q2 = math.atan2(math.sqrt(1.0 - c2 * c2), c2)
    q1 = math.atan2(y, x) - math.atan2(math.sin(q2), 1.0 + math.cos(q2))
    return np.array([q1, q2])


def wrapped(angles):
    return (np.asarray(angles) + math.pi) % (2 * math.pi) - math.pi


def slider(limits=(0.0, 0.1)):
    """One prismatic joint along x."""
    joints = [{'type': 'prismatic', 'axis': [1, 0, 0], 'point': [0, 0, 0], 'limits': limits}]
    return RobotModel.from_joints('slider', joints, Pose.identity())


class TestForwardKinematics:
    def test_planar_arm_pointing_up(self, planar_2r):
        pose = KinematicsController.forward_kinematics(planar_2r, [math.pi / 2, 0.0])
        np.testing.assert_allclose(pose.translation, [0, 2, 0], atol=1e-12)

    def test_home_pose_at_zero(self, arm_7dof):
        pose = KinematicsController.forward_kinematics(arm_7dof, np.zeros(7))
        np.testing.assert_allclose(pose.matrix, arm_7dof.home_pose.matrix, atol=1e-12)

    def test_matches_matrix_chain(self, arm_7dof, fixtures_dir, rng):
        doc = formats.read_json(fixtures_dir / 'robots' / 'arm_7dof.json')
        for _ in range(50):
            q = random_config(arm_7dof, rng)
            pose = KinematicsController.forward_kinematics(arm_7dof, q)
            np.testing.assert_allclose(pose.matrix, chain_oracle(doc, q), atol=1e-9)

    def test_wrong_dimension(self, planar_2r):
        with pytest.raises(InputError):
            KinematicsController.forward_kinematics(planar_2r, [0.0, 0.0, 0.0])

    def test_ready_configuration_points_down(self, arm_7dof):
        pose = KinematicsController.forward_kinematics(arm_7dof, ARM_READY)
        np.testing.assert_allclose(pose.rotation @ [0, 0, 1], [0, 0, -1], atol=1e-9)


class TestJacobian:
    def test_planar_arm_at_zero(self, planar_2r):
        jacobian = KinematicsController.geometric_jacobian(planar_2r, [0.0, 0.0])
        expected = np.array([[0, 0, 0, 0, 0, 1], [0, -1, 0, 0, 0, 1]], dtype=float).T
        np.testing.assert_allclose(jacobian, expected, atol=1e-12)

    @pytest.mark.parametrize('model_name', ['planar_2r', 'arm_7dof'])
    def test_matches_finite_differences(self, request, rng, model_name):
        model = request.getfixturevalue(model_name)
        for _ in range(50):
            q = random_config(model, rng)
            jacobian = KinematicsController.geometric_jacobian(model, q)
            for j in range(model.dof):
                np.testing.assert_allclose(jacobian[:, j], finite_difference_twist(model, q, j),
                                           atol=1e-5)


class TestRateControl:
    def test_converges_to_closed_form_ik(self, planar_2r, rng):
        for _ in range(50):
            solution = np.array([rng.uniform(-2.0, 2.0), rng.uniform(0.4, 2.4)])
            target = KinematicsController.forward_kinematics(planar_2r, solution)
            q = solution + rng.uniform(-0.3, 0.3, size=2)
            for _ in range(100):
                q = KinematicsController.rmrc_step(planar_2r, q, target, PARAMS)
            x, y, _ = target.translation
            np.testing.assert_allclose(wrapped(q - two_link_ik(x, y)), 0.0, atol=1e-6)

    def test_singular_configuration_stays_bounded(self, planar_2r):
        target = Pose.from_translation([2.5, 0.0, 0.0])
        q = np.zeros(2)
        error = se3.pose_error(target, KinematicsController.forward_kinematics(planar_2r, q))[1]
        for _ in range(10):
            nxt = KinematicsController.rmrc_step(planar_2r, q, target, PARAMS)
            assert np.abs(nxt - q).max() <= PARAMS.max_joint_step + 1e-12
            q = nxt
            now = se3.pose_error(target, KinematicsController.forward_kinematics(planar_2r, q))[1]
            assert now <= error + 1e-12
            error = now

    def test_step_is_clamped_to_limits(self):
        model = slider()
        q = KinematicsController.rmrc_step(model, [0.09], Pose.from_translation([0.5, 0, 0]),
                                           PARAMS)
        np.testing.assert_allclose(q, [0.1])


class TestTracking:
    def test_translation_leg_keeps_orientation(self, arm_7dof):
        start = KinematicsController.forward_kinematics(arm_7dof, ARM_READY)
        goal = Pose(start.rotation, start.translation + np.array([0.2, 0.0, 0.0]))
        leg = ConstraintLeg(start, goal, WITHIN_OBJECT)
        path = KinematicsController.track_constraint_plan(arm_7dof, ARM_READY, [leg], PARAMS)

        assert len(path) == 51
        for q in path.configs:
            pose = KinematicsController.forward_kinematics(arm_7dof, q)
            assert se3.pose_error(start, pose)[0] <= 1e-6
        rot, trans = se3.pose_error(goal, KinematicsController.forward_kinematics(
            arm_7dof, path.final))
        assert rot <= 1e-3 and trans <= 1e-3

    def test_annotations_follow_legs(self, planar_2r):
        q0 = np.array([0.2, 0.8])
        start = KinematicsController.forward_kinematics(planar_2r, q0)
        mid = KinematicsController.forward_kinematics(planar_2r, [0.5, 0.8])
        end = KinematicsController.forward_kinematics(planar_2r, [0.7, 0.8])
        legs = [ConstraintLeg(start, mid, TRANSIT), ConstraintLeg(mid, end, WITHIN_OBJECT)]
        params = TrackerParams(step_tau=0.1)
        path = KinematicsController.track_constraint_plan(planar_2r, q0, legs, params)

        assert path.annotations[0] == (0, 0.0)
        assert [a for a in path.annotations if a[0] == 0][-1] == (0, 1.0)
        assert path.annotations[-1] == (1, 1.0)
        assert len(path) == 21
        np.testing.assert_allclose(path.final, [0.7, 0.8], atol=1e-6)

    def test_zero_leg_is_skipped(self, planar_2r):
        q0 = np.array([0.2, 0.8])
        here = KinematicsController.forward_kinematics(planar_2r, q0)
        there = KinematicsController.forward_kinematics(planar_2r, [0.4, 0.8])
        legs = [ConstraintLeg(here, here, TRANSIT), ConstraintLeg(here, there, WITHIN_OBJECT)]
        path = KinematicsController.track_constraint_plan(planar_2r, q0, legs, PARAMS)
        assert len(path) == 51
        assert all(leg_index == 1 for leg_index, _ in path.annotations[1:])

    def test_audit_agrees_with_tolerances(self, planar_2r):
        q0 = np.array([-0.4, 1.1])
        start = KinematicsController.forward_kinematics(planar_2r, q0)
        goal = KinematicsController.forward_kinematics(planar_2r, [0.6, 1.1])
        path = KinematicsController.track_constraint_plan(
            planar_2r, q0, [ConstraintLeg(start, goal, WITHIN_OBJECT)], PARAMS)
        rot, trans = KinematicsController.audit_joint_path(planar_2r, path)
        assert rot <= PARAMS.pose_tol_rot and trans <= PARAMS.pose_tol_trans

    def test_tracking_is_deterministic(self, arm_7dof):
        start = KinematicsController.forward_kinematics(arm_7dof, ARM_READY)
        goal = Pose.from_axis_angle([0, 0, 1], 0.3, point=start.translation) @ start
        legs = [ConstraintLeg(start, goal, WITHIN_OBJECT)]
        first = KinematicsController.track_constraint_plan(arm_7dof, ARM_READY, legs, PARAMS)
        second = KinematicsController.track_constraint_plan(arm_7dof, ARM_READY, legs, PARAMS)
        assert first.summary_hash() == second.summary_hash()
        assert first.configs.tobytes() == second.configs.tobytes()

    def test_joint_limit_blocks_progress(self):
        model = slider()
        leg = ConstraintLeg(Pose.identity(), Pose.from_translation([0.5, 0, 0]), WITHIN_OBJECT)
        with pytest.raises(JointLimitError) as info:
            KinematicsController.track_constraint_plan(model, [0.0], [leg], PARAMS)
        assert info.value.details['joint'] == 0
        assert info.value.details['leg'] == 0

    def test_iteration_limit_exhausted(self, planar_2r):
        q0 = np.array([0.2, 0.8])
        start = KinematicsController.forward_kinematics(planar_2r, q0)
        goal = KinematicsController.forward_kinematics(planar_2r, [1.2, 0.8])
        with pytest.raises(TrackingError, match='leg 0'):
            KinematicsController.track_constraint_plan(
                planar_2r, q0, [ConstraintLeg(start, goal, WITHIN_OBJECT)],
                TrackerParams(max_iters=1))

    def test_start_must_match_first_leg(self, planar_2r):
        elsewhere = KinematicsController.forward_kinematics(planar_2r, [1.0, 1.0])
        goal = KinematicsController.forward_kinematics(planar_2r, [1.2, 1.0])
        with pytest.raises(TrackingError):
            KinematicsController.track_constraint_plan(
                planar_2r, [0.0, 0.5], [ConstraintLeg(elsewhere, goal, WITHIN_OBJECT)], PARAMS)

    def test_empty_plan(self, planar_2r):
        with pytest.raises(InputError):
            KinematicsController.track_constraint_plan(planar_2r, [0.0, 0.5], [], PARAMS)

    def test_start_outside_limits(self):
        model = slider()
        leg = ConstraintLeg(Pose.from_translation([0.2, 0, 0]), Pose.identity(), WITHIN_OBJECT)
        with pytest.raises(InputError):
            KinematicsController.track_constraint_plan(model, [0.2], [leg], PARAMS)


class TestTrackerParams:
    def test_step_tau_upper_bound(self):
        with pytest.raises(InputError):
            TrackerParams(step_tau=0.2)

    def test_from_config(self):
        from config import TestingConfig

        params = TrackerParams.from_config(TestingConfig)
        assert params.step_tau == TestingConfig.TRACKER_STEP_TAU
        assert params.to_dict()['max_iters'] == TestingConfig.TRACKER_MAX_ITERS


class TestJointPath:
    def test_summary(self):
        path = JointPath(np.array([[0.0, 0.0], [0.05, -0.02]]), ((0, 0.0), (0, 1.0)))
        summary = path.summary()
        assert summary['configs'] == 2
        assert summary['max_joint_step'] == pytest.approx(0.05)

    def test_annotation_count_must_match(self):
        with pytest.raises(InputError):
            JointPath(np.zeros((2, 2)), ((0, 0.0),))
