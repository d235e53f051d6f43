"""
Forward kinematics, the spatial Jacobian and ScLERP-guided rate control.

Each constraint leg is discretized by ScLERP; every intermediate pose is
servoed with damped least-squares rate control on the spatial error twist
log(target . current^-1). The Jacobian uses the same [linear; angular]
spatial convention, so planner and interpolant share one group convention.
"""
import logging
import math

import numpy as np

from models.pose import Pose
from models.robot import JointPath, RobotModel, TrackerParams
from utils import se3
from utils.errors import InputError, JointLimitError, TrackingError
from .base_controller import BaseController

logger = logging.getLogger(__name__)


class KinematicsController(BaseController):
    """
    Controller for manipulator kinematics and constraint tracking.

    This controller handles:
    - Product-of-exponentials forward kinematics
    - The spatial geometric Jacobian
    - Single damped least-squares steps and full leg tracking
    - Independent audits of tracked joint paths
    """

    @staticmethod
    def forward_kinematics(model: RobotModel, q) -> Pose:
        """
        End-effector pose exp(xi_1 q_1) ... exp(xi_n q_n) . M.

        Args:
            model (RobotModel): the manipulator
            q: joint configuration of length ``model.dof``

        Returns:
            Pose: end-effector pose in the base frame
        """
        q = model.check_config(q)
        chain = Pose.identity()
        for twist, value in zip(model.joint_twists, q):
            chain = chain @ se3.exp_twist(twist, value)
        return chain @ model.home_pose

    @staticmethod
    def geometric_jacobian(model: RobotModel, q) -> np.ndarray:
        """Spatial Jacobian (6 x n); column j is joint j's twist at ``q``."""
        q = model.check_config(q)
        _, jacobian = KinematicsController._pose_and_jacobian(model, q)
        return jacobian

    @staticmethod
    def rmrc_step(model: RobotModel, q, target_pose: Pose, params: TrackerParams) -> np.ndarray:
        """
        One damped least-squares rate-control update towards ``target_pose``.

        The joint step is scaled down to ``max_joint_step`` and clamped to
        the joint limits.
        """
        q = model.check_config(q)
        current, jacobian = KinematicsController._pose_and_jacobian(model, q)
        error = se3.error_twist(target_pose, current)
        if not np.any(error):
            return q.copy()
        dq = KinematicsController._dls_update(jacobian, error, params)
        return np.clip(q + dq, model.lower, model.upper)

    @staticmethod
    def track_constraint_plan(model: RobotModel, q_start, plan, params: TrackerParams) -> JointPath:
        """
        Follow every leg of a constraint plan with ScLERP targets and RMRC.

        Args:
            model (RobotModel): the manipulator
            q_start: initial joint configuration
            plan (list[ConstraintLeg]): legs from build_constraint_plan
            params (TrackerParams): gains and tolerances

        Returns:
            JointPath: q_start followed by one config per intermediate target
        """
        q = model.check_config(q_start).copy()
        if not plan:
            raise InputError("Cannot track an empty constraint plan")
        if not model.within_limits(q):
            raise InputError(f"Start configuration {q.tolist()} violates the joint limits")

        start_rot, start_trans = se3.pose_error(
            plan[0].start, KinematicsController.forward_kinematics(model, q)
        )
        if start_rot > params.pose_tol_rot or start_trans > params.pose_tol_trans:
            raise TrackingError(
                f"Start configuration is {start_trans:.4g} m / {start_rot:.4g} rad "
                f"away from the first waypoint",
                leg=0, tau=0.0,
            )

        steps = math.ceil(1.0 / params.step_tau - 1e-9)
        configs, annotations = [q.copy()], [(0, 0.0)]
        for leg_index, leg in enumerate(plan):
            twist, theta = se3.log_pose(leg.goal @ leg.start.inverse())
            if theta == 0.0:
                continue
            logger.debug("Tracking leg %d (%s), magnitude %.4g", leg_index, leg.mode, theta)
            for k in range(1, steps + 1):
                tau = k / steps
                target = leg.goal if k == steps else se3.exp_twist(twist, tau * theta) @ leg.start
                q = KinematicsController._servo(model, q, target, params, leg_index, tau)
                configs.append(q.copy())
                annotations.append((leg_index, tau))
        return JointPath(np.array(configs), tuple(annotations), tuple(plan))

    @staticmethod
    def audit_joint_path(model: RobotModel, path: JointPath) -> tuple[float, float]:
        """
        Re-run forward kinematics over a tracked path and compare every config
        with its annotated ScLERP target.

        Returns:
            tuple: (max rotation error in radians, max translation error in meters)
        """
        worst_rot, worst_trans = 0.0, 0.0
        for q, (leg_index, tau) in zip(path.configs, path.annotations):
            leg = path.legs[leg_index]
            target = se3.sclerp(leg.start, leg.goal, tau)
            rot, trans = se3.pose_error(target, KinematicsController.forward_kinematics(model, q))
            worst_rot, worst_trans = max(worst_rot, rot), max(worst_trans, trans)
        return worst_rot, worst_trans

    @staticmethod
    def _pose_and_jacobian(model, q):
        chain = Pose.identity()
        columns = []
        for twist, value in zip(model.joint_twists, q):
            columns.append(se3.adjoint(chain) @ twist.as_vector())
            chain = chain @ se3.exp_twist(twist, value)
        return chain @ model.home_pose, np.column_stack(columns)

    @staticmethod
    def _dls_update(jacobian, error, params):
        n = jacobian.shape[1]
        lhs = jacobian.T @ jacobian + params.damping_lambda ** 2 * np.eye(n)
        dq = np.linalg.solve(lhs, jacobian.T @ error)
        largest = np.abs(dq).max()
        if largest > params.max_joint_step:
            dq = dq * (params.max_joint_step / largest)
        return dq

    @staticmethod
    def _servo(model, q, target, params, leg_index, tau):
        """Iterate rate-control steps until ``target`` is reached or max_iters runs out."""
        previous = math.inf
        stalled = 0
        for iteration in range(params.max_iters + 1):
            current, jacobian = KinematicsController._pose_and_jacobian(model, q)
            rot, trans = se3.pose_error(target, current)
            if rot <= params.converge_tol and trans <= params.converge_tol:
                return q
            within = rot <= params.pose_tol_rot and trans <= params.pose_tol_trans
            residual = rot + trans
            if within and residual > 0.5 * previous:
                return q
            if iteration == params.max_iters:
                break

            dq = KinematicsController._dls_update(
                jacobian, se3.error_twist(target, current), params
            )
            wanted = q + dq
            clamped = np.clip(wanted, model.lower, model.upper)
            blocked = np.flatnonzero(clamped != wanted)
            if blocked.size and residual >= previous:
                stalled += 1
                if stalled >= params.stall_limit:
                    raise JointLimitError(
                        f"Joint {int(blocked[0])} limit blocks progress on leg {leg_index} "
                        f"at tau={tau:.3f}",
                        joint=int(blocked[0]), leg=leg_index, tau=tau,
                    )
            else:
                stalled = 0
            previous = residual
            q = clamped

        raise TrackingError(
            f"Rate control did not converge on leg {leg_index} at tau={tau:.3f} "
            f"(error {trans:.4g} m / {rot:.4g} rad after {params.max_iters} iterations)",
            leg=leg_index, tau=tau,
        )
