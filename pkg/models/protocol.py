"""
Protocol steps, gate conditions, the simulated clock and the execution log.

A protocol is an ordered list of steps. Task steps move the manipulator;
Wait, Action and Gate steps only consume simulated time. Repeat re-runs its
body every ``period`` seconds until its condition holds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from models.task import TaskInstance
from utils.errors import InputError

TASK = 'task'
WAIT = 'wait'
GATE = 'gate'
ACTION = 'action'
REPEAT = 'repeat'
POLL = 'poll'

SATISFIED = 'satisfied'
UNSATISFIED = 'unsatisfied'
DONE = 'done'
TIMEOUT = 'timeout'


def _positive(name, value):
    if not value > 0:
        raise InputError(f"{name} must be positive, got {value}")


# Gate conditions

@dataclass(frozen=True)
class PhAtLeast:
    """Satisfied once the simulated pH meter reads at least ``threshold``."""

    threshold: float
    kind = 'ph_at_least'

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 14.0:
            raise InputError(f"pH threshold must lie in [0, 14], got {self.threshold}")

    def read(self, sensors, elapsed: float) -> dict:
        reading = {'ph': sensors.read_ph(elapsed)}
        volume = sensors.ph_volume()
        if volume is not None:
            reading['volume_dispensed'] = volume
        return reading

    def satisfied(self, reading: dict) -> bool:
        return reading['ph'] >= self.threshold

    def to_dict(self) -> dict:
        return {'type': self.kind, 'threshold': self.threshold}


@dataclass(frozen=True)
class ColorDistanceAtLeast:
    """
    Satisfied once the mean solution colour is at least ``threshold`` away
    (Euclidean, RGB) from a reference swatch.
    """

    reference: tuple
    threshold: float
    kind = 'color_distance_at_least'

    def __post_init__(self):
        reference = tuple(float(c) for c in self.reference)
        if len(reference) != 3:
            raise InputError(f"Reference colour needs 3 components, got {len(reference)}")
        if self.threshold < 0:
            raise InputError(f"Colour distance threshold must be >= 0, got {self.threshold}")
        object.__setattr__(self, 'reference', reference)

    def read(self, sensors, elapsed: float) -> dict:
        rgb = sensors.read_color(elapsed)
        distance = float(np.linalg.norm(np.asarray(rgb) - np.asarray(self.reference)))
        return {'rgb': list(rgb), 'color_distance': distance}

    def satisfied(self, reading: dict) -> bool:
        return reading['color_distance'] >= self.threshold

    def to_dict(self) -> dict:
        return {'type': self.kind, 'reference': list(self.reference), 'threshold': self.threshold}


@dataclass(frozen=True)
class ElapsedAtLeast:
    """Satisfied once ``seconds`` of simulated time have passed since protocol start."""

    seconds: float
    kind = 'elapsed_at_least'

    def __post_init__(self):
        if self.seconds < 0:
            raise InputError(f"Elapsed threshold must be >= 0, got {self.seconds}")

    def read(self, sensors, elapsed: float) -> dict:
        return {'elapsed': elapsed}

    def satisfied(self, reading: dict) -> bool:
        return reading['elapsed'] >= self.seconds

    def to_dict(self) -> dict:
        return {'type': self.kind, 'seconds': self.seconds}


@dataclass(frozen=True)
class TemperatureAtLeast:
    celsius: float
    kind = 'temperature_at_least'

    def read(self, sensors, elapsed: float) -> dict:
        return {'temperature': sensors.read_temperature(elapsed)}

    def satisfied(self, reading: dict) -> bool:
        return reading['temperature'] >= self.celsius

    def to_dict(self) -> dict:
        return {'type': self.kind, 'celsius': self.celsius}


GATE_CONDITIONS = {
    cls.kind: cls for cls in (PhAtLeast, ColorDistanceAtLeast, ElapsedAtLeast, TemperatureAtLeast)
}


# Steps

@dataclass(frozen=True, eq=False)
class Task:
    """Run skill ``label`` against a new task instance."""

    label: str
    instance: TaskInstance
    kind = TASK

    def to_dict(self) -> dict:
        return {'type': self.kind, 'label': self.label, 'objects': self.instance.to_dict()}


@dataclass(frozen=True)
class Wait:
    duration: float
    kind = WAIT

    def __post_init__(self):
        _positive('Wait duration', self.duration)

    def to_dict(self) -> dict:
        return {'type': self.kind, 'duration': self.duration}


@dataclass(frozen=True)
class Gate:
    """Block until ``condition`` holds; ``timeout`` overrides the configured default."""

    condition: object
    timeout: Optional[float] = None
    kind = GATE

    def __post_init__(self):
        if self.timeout is not None:
            _positive('Gate timeout', self.timeout)

    def to_dict(self) -> dict:
        data = {'type': self.kind, 'condition': self.condition.to_dict()}
        if self.timeout is not None:
            data['timeout'] = self.timeout
        return data


@dataclass(frozen=True)
class Action:
    """
    A non-manipulation side effect: solenoid dispensing or relay switching.

    Attributes:
        name (str): free-form action name for the log
        duration (float): simulated seconds the action takes
        dispense (dict): reagent -> millilitres
        switch (dict): device -> on/off
    """

    name: str
    duration: float = 1.0
    dispense: dict = field(default_factory=dict)
    switch: dict = field(default_factory=dict)
    kind = ACTION

    def __post_init__(self):
        _positive(f"Action '{self.name}' duration", self.duration)
        for reagent, ml in self.dispense.items():
            if ml <= 0:
                raise InputError(f"Action '{self.name}': dispensed volume of {reagent} must be positive")

    def to_dict(self) -> dict:
        return {'type': self.kind, 'name': self.name, 'duration': self.duration,
                'dispense': dict(self.dispense), 'switch': dict(self.switch)}


@dataclass(frozen=True, eq=False)
class Repeat:
    """Run ``steps`` every ``period`` seconds until ``until`` holds after an iteration."""

    steps: tuple
    until: object
    period: float
    kind = REPEAT

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple(self.steps))
        _positive('Repeat period', self.period)
        if not self.steps:
            raise InputError("A Repeat step needs a non-empty body")

    def to_dict(self) -> dict:
        return {'type': self.kind, 'period': self.period, 'until': self.until.to_dict(),
                'steps': [s.to_dict() for s in self.steps]}


def iter_steps(steps, prefix=''):
    """
    Walk a step list depth-first, yielding (dotted step id, step).

    Ids are 0-based; ``"4.2"`` is the third step in the body of step 4.
    """
    for index, step in enumerate(steps):
        step_id = f"{prefix}{index}"
        yield step_id, step
        if step.kind == REPEAT:
            yield from iter_steps(step.steps, prefix=f"{step_id}.")


# Execution

class SimClock:
    """Virtual time in seconds. Never moves backwards."""

    def __init__(self, start: float = 0.0):
        self.start = float(start)
        self.now = float(start)

    @property
    def elapsed(self) -> float:
        return self.now - self.start

    def advance(self, seconds: float) -> float:
        if seconds < 0:
            raise InputError(f"Cannot advance the clock by {seconds} s")
        self.now += seconds
        return self.now

    def advance_to(self, t: float) -> float:
        if t > self.now:
            self.now = float(t)
        return self.now


@dataclass(frozen=True)
class LogRecord:
    step_id: str
    kind: str
    start: float
    end: float
    outcome: str
    readings: dict = field(default_factory=dict)
    path_hash: Optional[str] = None
    iteration: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            'step_id': self.step_id,
            'kind': self.kind,
            'start': self.start,
            'end': self.end,
            'outcome': self.outcome,
            'readings': self.readings,
            'path_hash': self.path_hash,
            'iteration': self.iteration,
        }


class ExecutionLog:
    """Append-only record of an execution, in simulated-time order."""

    def __init__(self, records=()):
        self._records = []
        self.failed = False
        for record in records:
            self.append(record)

    def append(self, record: LogRecord):
        if record.end < record.start:
            raise InputError(f"Record {record.step_id} ends before it starts")
        if self._records and record.start < self._records[-1].start:
            raise InputError(f"Record {record.step_id} starts before the previous record")
        self._records.append(record)
        if record.outcome == TIMEOUT:
            self.failed = True

    @property
    def records(self) -> tuple:
        return tuple(self._records)

    def __len__(self):
        return len(self._records)

    @property
    def elapsed(self) -> float:
        if not self._records:
            return 0.0
        return self._records[-1].end - self._records[0].start


@dataclass(frozen=True, eq=False)
class Protocol:
    """
    A protocol file after loading.

    Attributes:
        name (str): protocol name
        steps (tuple): top-level steps
        model (RobotModel): manipulator the tasks are planned for, if given
        q_start (ndarray): initial joint configuration, if given
        skills (dict): label -> demonstration file path, resolved against
            the protocol's directory
    """

    name: str
    steps: tuple
    model: Optional[object] = None
    q_start: Optional[np.ndarray] = None
    skills: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple(self.steps))

    def task_labels(self) -> list:
        """Distinct Task labels in first-use order."""
        labels = []
        for _, step in iter_steps(self.steps):
            if step.kind == TASK and step.label not in labels:
                labels.append(step.label)
        return labels
