"""
Protocol controller: planning a task sequence and running it on virtual time.

Planning and execution are separate passes. ``plan_protocol`` turns every
Task step into a joint path (each starting exactly where the previous one
ended); ``execute_protocol`` replays those paths without re-planning while
Wait, Action, Gate and Repeat steps advance a simulated clock.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from models.protocol import (
    ACTION,
    DONE,
    GATE,
    POLL,
    REPEAT,
    SATISFIED,
    TASK,
    TIMEOUT,
    UNSATISFIED,
    WAIT,
    ExecutionLog,
    LogRecord,
    SimClock,
    iter_steps,
)
from models.robot import RobotModel, TrackerParams
from models.task import TRANSIT, ConstraintLeg
from utils.errors import InputError, PlannerError, UnknownSkillError
from .base_controller import BaseController
from .kinematics_controller import KinematicsController
from .transfer_controller import TransferController

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProtocolPlan:
    """
    Joint paths keyed by dotted Task step id, in planning order, plus the
    plan report and the skill label each path was planned for.
    """

    paths: dict
    report: dict
    labels: dict = field(default_factory=dict)

    @property
    def joint_paths(self) -> list:
        return list(self.paths.values())

    def check_steps(self, steps):
        """
        Fail unless the Task steps of ``steps`` are exactly the planned ones.

        Raises:
            InputError: naming the first step id that does not match
        """
        tasks = {step_id: step.label for step_id, step in iter_steps(steps) if step.kind == TASK}
        for step_id, label in tasks.items():
            if step_id not in self.paths:
                raise InputError(f"Plan has no joint path for task step {step_id} ({label})",
                                 step_id=step_id)
            planned = self.labels.get(step_id)
            if planned != label:
                raise InputError(f"Task step {step_id} is '{label}' but was planned as "
                                 f"'{planned}'; re-plan the protocol", step_id=step_id)
        extra = sorted(set(self.paths) - set(tasks))
        if extra:
            raise InputError(f"Plan has joint paths for steps {extra} that are not Task steps",
                             step_ids=extra)


class ProtocolController(BaseController):
    """
    Controller for long-horizon protocols.

    This controller handles:
    - Planning Task steps against a skill library
    - Executing the full step list with simulated sensors and clock
    """

    @staticmethod
    def plan_protocol(lib, steps, model: RobotModel, q_start, params: TrackerParams) -> ProtocolPlan:
        """
        Plan every Task step in order.

        Each task gets a transit leg from the current end-effector pose to its
        first transferred waypoint, followed by the constant-screw legs between
        waypoints. Tasks inside a Repeat body are planned once.

        Args:
            lib (SkillLibrary): registered skills
            steps (list): protocol steps
            model (RobotModel): manipulator
            q_start: initial configuration
            params (TrackerParams): tracker settings

        Returns:
            ProtocolPlan: joint paths and a report with per-task diagnostics,
            audit maxima and Repeat loop-closure gaps
        """
        q = model.check_config(q_start).copy()
        missing = sorted({step.label for _, step in iter_steps(steps)
                          if step.kind == TASK and step.label not in lib})
        if missing:
            raise UnknownSkillError(f"Protocol uses unregistered skills {missing}", labels=missing)

        paths, labels, tasks, loop_closure = {}, {}, [], {}

        def plan_steps(body, prefix, q):
            for index, step in enumerate(body):
                step_id = f"{prefix}{index}"
                if step.kind == TASK:
                    path, diagnostics = ProtocolController._plan_task(
                        lib, step_id, step, model, q, params
                    )
                    paths[step_id] = path
                    labels[step_id] = step.label
                    tasks.append(diagnostics)
                    q = path.final
                elif step.kind == REPEAT:
                    body_start = q.copy()
                    q = plan_steps(step.steps, f"{step_id}.", q)
                    if any(s.kind == TASK for _, s in iter_steps(step.steps)):
                        loop_closure[step_id] = float(np.linalg.norm(q - body_start))
            return q

        q_final = plan_steps(steps, '', q)
        audit_rot = max((t['audit']['rot'] for t in tasks), default=0.0)
        audit_trans = max((t['audit']['trans'] for t in tasks), default=0.0)
        report = {
            'tasks': tasks,
            'loop_closure': loop_closure,
            'audit_max': {'rot': audit_rot, 'trans': audit_trans},
            'final_config': [float(v) for v in q_final],
        }
        logger.info("Planned %d task steps", len(paths))
        return ProtocolPlan(paths, report, labels)

    @staticmethod
    def execute_protocol(plan: ProtocolPlan, steps, sensors, clock: SimClock = None,
                         poll_interval=1.0, gate_timeout=86400.0,
                         motion_seconds_per_config=0.05) -> ExecutionLog:
        """
        Run a planned protocol on simulated time.

        A gate timeout appends a failure record, sets ``log.failed`` and halts.

        Returns:
            ExecutionLog: one record per executed step (per iteration inside
            Repeat bodies) plus one per Repeat poll
        """
        if poll_interval <= 0 or gate_timeout <= 0:
            raise InputError("poll_interval and gate_timeout must be positive")
        plan.check_steps(steps)
        sensors.reset()
        run = _ProtocolRun(plan, sensors, clock or SimClock(), poll_interval,
                           gate_timeout, motion_seconds_per_config)
        run.run_steps(steps, '')
        return run.log

    @staticmethod
    def _plan_task(lib, step_id, step, model, q, params):
        try:
            entry = lib.get(step.label)
            waypoints = TransferController.transfer_guiding_poses(entry.guiding_poses, step.instance)
            current = KinematicsController.forward_kinematics(model, q)
            legs = [ConstraintLeg(current, waypoints[0].pose, TRANSIT, None, waypoints[0].object_id)]
            if len(waypoints) > 1:
                legs.extend(TransferController.build_constraint_plan(waypoints))
            path = KinematicsController.track_constraint_plan(model, q, legs, params)
        except PlannerError as err:
            raise err.with_context(f"step {step_id} ({step.label})") from err

        audit_rot, audit_trans = KinematicsController.audit_joint_path(model, path)
        logger.info("Step %s (%s): %d legs, %d configs", step_id, step.label, len(legs), len(path))
        return path, {
            'step_id': step_id,
            'label': step.label,
            'waypoints': len(waypoints),
            'legs': len(legs),
            'configs': len(path),
            'audit': {'rot': audit_rot, 'trans': audit_trans},
            'hash': path.summary_hash(),
        }


class _ProtocolRun:
    """State of one execution: clock, sensors and the log being written."""

    def __init__(self, plan, sensors, clock, poll_interval, gate_timeout, motion_seconds):
        self.plan = plan
        self.sensors = sensors
        self.clock = clock
        self.poll_interval = poll_interval
        self.gate_timeout = gate_timeout
        self.motion_seconds = motion_seconds
        self.log = ExecutionLog()

    def run_steps(self, steps, prefix, iteration=None) -> bool:
        for index, step in enumerate(steps):
            step_id = f"{prefix}{index}"
            handler = {
                TASK: self._task,
                WAIT: self._wait,
                ACTION: self._action,
                GATE: self._gate,
                REPEAT: self._repeat,
            }[step.kind]
            if not handler(step_id, step, iteration):
                return False
        return True

    def _record(self, step_id, kind, start, outcome, readings=None, path_hash=None, iteration=None):
        self.log.append(LogRecord(step_id, kind, start, self.clock.now, outcome,
                                  readings or {}, path_hash, iteration))

    def _task(self, step_id, step, iteration):
        path = self.plan.paths[step_id]
        start = self.clock.now
        self.clock.advance(self.motion_seconds * len(path))
        self._record(step_id, TASK, start, DONE, {'label': step.label, 'configs': len(path)},
                     path.summary_hash(), iteration)
        return True

    def _wait(self, step_id, step, iteration):
        start = self.clock.now
        self.clock.advance(step.duration)
        self._record(step_id, WAIT, start, DONE, iteration=iteration)
        return True

    def _action(self, step_id, step, iteration):
        start = self.clock.now
        for reagent, ml in step.dispense.items():
            self.sensors.dispense(reagent, ml)
        for device, on in step.switch.items():
            self.sensors.switch(device, on, self.clock.elapsed)
        self.clock.advance(step.duration)
        readings = {'name': step.name, 'dispensed': dict(step.dispense), 'switched': dict(step.switch)}
        self._record(step_id, ACTION, start, DONE, readings, iteration=iteration)
        return True

    def _gate(self, step_id, step, iteration):
        timeout = step.timeout if step.timeout is not None else self.gate_timeout
        start = self.clock.now
        polls = 0
        while True:
            reading = step.condition.read(self.sensors, self.clock.elapsed)
            polls += 1
            if step.condition.satisfied(reading):
                self._record(step_id, GATE, start, SATISFIED, {**reading, 'polls': polls},
                             iteration=iteration)
                return True
            if self.clock.now - start + self.poll_interval > timeout:
                self._record(step_id, GATE, start, TIMEOUT, {**reading, 'polls': polls},
                             iteration=iteration)
                logger.warning("Gate %s timed out after %.0f s (%d polls)", step_id,
                               self.clock.now - start, polls)
                return False
            self.clock.advance(self.poll_interval)

    def _repeat(self, step_id, step, iteration):
        start = self.clock.now
        count = 0
        while True:
            iteration_start = self.clock.now
            if not self.run_steps(step.steps, f"{step_id}.", count):
                return False
            reading = step.until.read(self.sensors, self.clock.elapsed)
            done = step.until.satisfied(reading)
            self._record(step_id, POLL, self.clock.now, SATISFIED if done else UNSATISFIED,
                         reading, iteration=count)
            if done:
                logger.info("Repeat %s finished after %d iterations", step_id, count + 1)
                return True
            if self.clock.now - start >= self.gate_timeout:
                self._record(step_id, REPEAT, self.clock.now, TIMEOUT, reading, iteration=count)
                logger.warning("Repeat %s timed out after %d iterations", step_id, count + 1)
                return False
            self.clock.advance_to(iteration_start + step.period)
            count += 1
