"""
Readers and writers for every file the toolkit consumes or produces.

Structured inputs are JSON, numeric exports are CSV (pandas, 17 significant
digits) and execution logs are JSON lines. Unknown top-level fields warn;
missing required fields raise InputError naming the fields.
"""
import json
import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd

from models.path import PosePath, Segment, SegmentedPath
from models.pose import Pose, ScrewDisplacement
from models.protocol import (
    GATE_CONDITIONS,
    Action,
    ExecutionLog,
    Gate,
    LogRecord,
    Protocol,
    Repeat,
    Task,
    Wait,
)
from models.robot import RobotModel
from models.task import Demonstration, TaskInstance
from utils.errors import InputError

logger = logging.getLogger(__name__)

QUAT_NORM_TOLERANCE = 1e-6
QUAT_WARN_TOLERANCE = 1e-3
FLOAT_FORMAT = '%.17g'

DEMONSTRATION_FIELDS = ('label', 'roi_radius', 'timestamps', 'poses', 'joints', 'model', 'objects')
ROBOT_FIELDS = ('name', 'dof', 'joints', 'home_pose')
PROTOCOL_FIELDS = ('name', 'model', 'q_start', 'skills', 'poses', 'steps')
SENSOR_FIELDS = ('ph', 'color', 'temperature')
LIBRARY_FIELDS = ('skills',)


# Helpers

def check_fields(doc, required, known, where):
    """
    Fail on missing required fields and warn on unknown ones.

    Args:
        doc (dict): parsed document
        required (iterable): field names that must be present and non-empty
        known (iterable): every accepted field name
        where (str): document description for messages
    """
    if not isinstance(doc, dict):
        raise InputError(f"{where} must be a JSON object")
    errors = {}
    for name in required:
        if name not in doc or doc[name] is None or doc[name] == "":
            errors[name] = f"{name} is required"
    if errors:
        raise InputError(f"{where}: missing required fields {sorted(errors)}", fields=errors)
    unknown = sorted(set(doc) - set(known))
    if unknown:
        logger.warning("%s: ignoring unknown fields %s", where, unknown)


def read_json(path):
    path = Path(path)
    try:
        with path.open(encoding='utf-8') as fp:
            return json.load(fp)
    except OSError as err:
        raise InputError(f"Cannot read {path}: {err.strerror}", path=str(path)) from err
    except UnicodeDecodeError as err:
        raise InputError(f"{path} is not UTF-8 text (byte {err.start})", path=str(path)) from err
    except json.JSONDecodeError as err:
        raise InputError(f"{path} is not valid JSON: {err.msg} (line {err.lineno})",
                         path=str(path)) from err


def number(value, where, positive=False):
    """
    ``value`` as a finite float; JSON strings and booleans are rejected.

    Raises:
        InputError: naming ``where``
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{where} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise InputError(f"{where} must be finite")
    if positive and value <= 0:
        raise InputError(f"{where} must be positive, got {value}")
    return value


def _flag(value, where):
    if not isinstance(value, bool):
        raise InputError(f"{where} must be true or false, got {value!r}")
    return value


def _mapping(value, where):
    if not isinstance(value, dict):
        raise InputError(f"{where} must be a JSON object")
    return value


def write_json(doc, path):
    """Write ``doc`` deterministically: fixed indent, trailing newline."""
    with Path(path).open('w', encoding='utf-8') as fp:
        json.dump(doc, fp, indent=2)
        fp.write('\n')


def _vector(value, size, where):
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as err:
        raise InputError(f"{where} must be numeric") from err
    if arr.shape != (size,):
        raise InputError(f"{where} must have {size} components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{where} must be finite")
    return arr


# Poses and instances

def pose_from_dict(doc, where='pose') -> Pose:
    """
    Parse ``{t: [x, y, z], q: [w, x, y, z]}``.

    Quaternions are renormalized when their norm is off by more than 1e-6;
    a deviation beyond 1e-3 also logs a warning.
    """
    check_fields(doc, ('t', 'q'), ('t', 'q'), where)
    t = _vector(doc['t'], 3, f"{where}.t")
    q = _vector(doc['q'], 4, f"{where}.q")
    norm = float(np.linalg.norm(q))
    if norm == 0.0:
        raise InputError(f"{where}.q is the zero quaternion")
    if abs(norm - 1.0) > QUAT_WARN_TOLERANCE:
        logger.warning("%s: quaternion norm %.6g renormalized", where, norm)
    if abs(norm - 1.0) > QUAT_NORM_TOLERANCE:
        q = q / norm
    return Pose.from_quaternion(q, t)


def instance_from_list(objects, named_poses=None, where='objects') -> TaskInstance:
    """
    Parse ``[{id, pose}]``; a pose may be inline or the name of an entry
    in ``named_poses``.
    """
    if not isinstance(objects, list) or not objects:
        raise InputError(f"{where} must be a non-empty list")
    named_poses = named_poses or {}
    pairs = []
    for index, item in enumerate(objects):
        item_where = f"{where}[{index}]"
        check_fields(item, ('id', 'pose'), ('id', 'pose'), item_where)
        pose = item['pose']
        if isinstance(pose, str):
            if pose not in named_poses:
                raise InputError(f"{item_where}: unknown named pose '{pose}'")
            pose = named_poses[pose]
        else:
            pose = pose_from_dict(pose, f"{item_where}.pose")
        pairs.append((str(item['id']), pose))
    return TaskInstance(tuple(pairs))


# Robot models

def robot_model_from_dict(doc, where='robot model') -> RobotModel:
    """
    Parse ``{dof, joints: [{type, axis, point_or_direction, limits}], home_pose}``.

    For revolute joints ``point_or_direction`` is a point on the axis; for
    prismatic joints it is ignored and ``axis`` is the sliding direction.
    """
    check_fields(doc, ('dof', 'joints', 'home_pose'), ROBOT_FIELDS, where)
    joints = doc['joints']
    if not isinstance(joints, list):
        raise InputError(f"{where}.joints must be a list")
    if len(joints) != doc['dof']:
        raise InputError(f"{where}: dof is {doc['dof']} but {len(joints)} joints are listed")
    parsed = []
    for index, joint in enumerate(joints):
        jw = f"{where}.joints[{index}]"
        check_fields(joint, ('type', 'axis', 'limits'),
                     ('type', 'axis', 'point_or_direction', 'limits'), jw)
        parsed.append({
            'type': joint['type'],
            'axis': _vector(joint['axis'], 3, f"{jw}.axis"),
            'point': _vector(joint.get('point_or_direction', [0.0, 0.0, 0.0]), 3,
                             f"{jw}.point_or_direction"),
            'limits': _vector(joint['limits'], 2, f"{jw}.limits"),
        })
    home = pose_from_dict(doc['home_pose'], f"{where}.home_pose")
    return RobotModel.from_joints(doc.get('name', 'robot'), parsed, home)


def robot_model_to_dict(model: RobotModel) -> dict:
    joints = []
    for twist, kind, limits in zip(model.joint_twists, model.joint_types, model.limits):
        if kind == 'revolute':
            axis = twist.angular
            point = np.cross(axis, twist.linear)
        else:
            axis, point = twist.linear, np.zeros(3)
        joints.append({
            'type': kind,
            'axis': [float(v) for v in axis],
            'point_or_direction': [float(v) for v in point],
            'limits': [float(v) for v in limits],
        })
    return {'name': model.name, 'dof': model.dof, 'joints': joints,
            'home_pose': model.home_pose.to_dict()}


def load_robot_model(path) -> RobotModel:
    return robot_model_from_dict(read_json(path), where=str(path))


def _resolve_model(reference, base_dir, where, allow_paths=True):
    if isinstance(reference, dict):
        return robot_model_from_dict(reference, f"{where}.model")
    if isinstance(reference, str) and not allow_paths:
        raise InputError(f"{where}.model must be an inline robot model")
    if isinstance(reference, str):
        path = Path(reference)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        return load_robot_model(path)
    raise InputError(f"{where}.model must be a file path or an inline robot model")


# Demonstrations

def demonstration_from_dict(doc, base_dir=None, where='demonstration',
                            allow_model_paths=True) -> Demonstration:
    """
    Parse a demonstration document.

    Either ``poses`` (end-effector poses) or ``joints`` plus ``model`` (a
    joint-space recording, mapped through forward kinematics) is required.
    With ``allow_model_paths`` off the model must be inline; request
    documents never name files on this machine.
    """
    check_fields(doc, ('label', 'objects'), DEMONSTRATION_FIELDS, where)
    if 'poses' in doc:
        raw = doc['poses']
        if not isinstance(raw, list):
            raise InputError(f"{where}.poses must be a list")
        poses = [pose_from_dict(p, f"{where}.poses[{i}]") for i, p in enumerate(raw)]
    elif 'joints' in doc:
        if 'model' not in doc:
            raise InputError(f"{where}: a joint-space recording needs a model reference")
        if not isinstance(doc['joints'], list):
            raise InputError(f"{where}.joints must be a list")
        from controllers.kinematics_controller import KinematicsController
        model = _resolve_model(doc['model'], base_dir, where, allow_model_paths)
        poses = [KinematicsController.forward_kinematics(model, _vector(q, model.dof,
                                                                        f"{where}.joints[{i}]"))
                 for i, q in enumerate(doc['joints'])]
    else:
        raise InputError(f"{where}: either poses or joints is required",
                         fields={'poses': 'poses is required'})
    if len(poses) < 2:
        raise InputError(f"{where}: a demonstration needs at least 2 poses, got {len(poses)}")

    timestamps = doc.get('timestamps')
    if timestamps is not None:
        if not isinstance(timestamps, list):
            raise InputError(f"{where}.timestamps must be a list")
        timestamps = [number(t, f"{where}.timestamps[{i}]") for i, t in enumerate(timestamps)]
    roi_radius = doc.get('roi_radius')
    if roi_radius is not None:
        roi_radius = number(roi_radius, f"{where}.roi_radius", positive=True)
    path = PosePath(tuple(poses), timestamps)
    instance = instance_from_list(doc['objects'], where=f"{where}.objects")
    return Demonstration(str(doc['label']), path, instance, roi_radius)


def demonstration_to_dict(demo: Demonstration) -> dict:
    doc = {'label': demo.label}
    if demo.roi_radius is not None:
        doc['roi_radius'] = demo.roi_radius
    if demo.path.timestamps is not None:
        doc['timestamps'] = [float(t) for t in demo.path.timestamps]
    doc['poses'] = [p.to_dict() for p in demo.path.poses]
    doc['objects'] = demo.instance.to_dict()
    return doc


def load_demonstration(path) -> Demonstration:
    path = Path(path)
    return demonstration_from_dict(read_json(path), base_dir=path.parent, where=str(path))


# Segmented paths

def screw_from_dict(doc) -> ScrewDisplacement:
    pitch = math.inf if doc['pitch'] == 'inf' else float(doc['pitch'])
    return ScrewDisplacement(doc['omega'], doc['moment'], pitch, doc['magnitude'])


def segmented_path_to_dict(seg: SegmentedPath, reconstruction_error=None) -> dict:
    doc = seg.to_dict()
    if reconstruction_error is not None:
        doc['reconstruction_error'] = {'rot': reconstruction_error[0],
                                       'trans': reconstruction_error[1]}
    return doc


def segmented_path_from_dict(doc, where='segmented path') -> SegmentedPath:
    check_fields(doc, ('breakpoints', 'tol_rot', 'tol_trans', 'segments'),
                 ('breakpoints', 'tol_rot', 'tol_trans', 'segments', 'reconstruction_error'),
                 where)
    segments = tuple(
        Segment(s['start_index'], s['end_index'],
                pose_from_dict(s['start'], f"{where}.segments[{i}].start"),
                pose_from_dict(s['end'], f"{where}.segments[{i}].end"),
                screw_from_dict(s['screw']))
        for i, s in enumerate(doc['segments'])
    )
    return SegmentedPath(tuple(doc['breakpoints']), segments, doc['tol_rot'], doc['tol_trans'])


# Protocols

def condition_from_dict(doc, where='condition'):
    if not isinstance(doc, dict) or doc.get('type') not in GATE_CONDITIONS:
        raise InputError(f"{where}: type must be one of {sorted(GATE_CONDITIONS)}")
    params = {
        k: _vector(v, 3, f"{where}.{k}") if k == 'reference' else number(v, f"{where}.{k}")
        for k, v in doc.items() if k != 'type'
    }
    try:
        return GATE_CONDITIONS[doc['type']](**params)
    except TypeError as err:
        raise InputError(f"{where}: {err}") from err


def step_from_dict(doc, named_poses, where='step'):
    """Parse one protocol step, recursing into Repeat bodies."""
    kind = doc.get('type') if isinstance(doc, dict) else None
    if kind == 'task':
        check_fields(doc, ('label', 'objects'), ('type', 'label', 'objects'), where)
        return Task(str(doc['label']), instance_from_list(doc['objects'], named_poses,
                                                          f"{where}.objects"))
    if kind == 'wait':
        check_fields(doc, ('duration',), ('type', 'duration'), where)
        return Wait(number(doc['duration'], f"{where}.duration"))
    if kind == 'gate':
        check_fields(doc, ('condition',), ('type', 'condition', 'timeout'), where)
        timeout = doc.get('timeout')
        return Gate(condition_from_dict(doc['condition'], f"{where}.condition"),
                    None if timeout is None else number(timeout, f"{where}.timeout"))
    if kind == 'action':
        check_fields(doc, ('name',), ('type', 'name', 'duration', 'dispense', 'switch'), where)
        dispense = _mapping(doc.get('dispense', {}), f"{where}.dispense")
        switch = _mapping(doc.get('switch', {}), f"{where}.switch")
        return Action(str(doc['name']), number(doc.get('duration', 1.0), f"{where}.duration"),
                      {str(k): number(v, f"{where}.dispense.{k}") for k, v in dispense.items()},
                      {str(k): _flag(v, f"{where}.switch.{k}") for k, v in switch.items()})
    if kind == 'repeat':
        check_fields(doc, ('steps', 'until', 'period'), ('type', 'steps', 'until', 'period'), where)
        if not isinstance(doc['steps'], list):
            raise InputError(f"{where}.steps must be a list")
        body = [step_from_dict(s, named_poses, f"{where}.steps[{i}]")
                for i, s in enumerate(doc['steps'])]
        return Repeat(tuple(body), condition_from_dict(doc['until'], f"{where}.until"),
                      number(doc['period'], f"{where}.period"))
    raise InputError(f"{where}: unknown step type {kind!r}")


def protocol_from_dict(doc, base_dir=None, where='protocol', allow_model_paths=True) -> Protocol:
    """
    Parse ``{name, model, q_start, skills: {label: demo path}, poses, steps}``.
    """
    check_fields(doc, ('name', 'steps'), PROTOCOL_FIELDS, where)
    if not isinstance(doc['steps'], list):
        raise InputError(f"{where}.steps must be a list")
    named_poses = {
        str(name): pose_from_dict(p, f"{where}.poses.{name}")
        for name, p in _mapping(doc.get('poses', {}), f"{where}.poses").items()
    }
    steps = [step_from_dict(s, named_poses, f"{where}.steps[{i}]")
             for i, s in enumerate(doc['steps'])]
    model = (_resolve_model(doc['model'], base_dir, where, allow_model_paths)
             if 'model' in doc else None)
    q_start = None
    if 'q_start' in doc:
        if model is None:
            raise InputError(f"{where}: q_start given without a model")
        q_start = _vector(doc['q_start'], model.dof, f"{where}.q_start")
    skills = {}
    for label, demo_path in _mapping(doc.get('skills', {}), f"{where}.skills").items():
        demo_path = Path(demo_path)
        if not demo_path.is_absolute() and base_dir is not None:
            demo_path = Path(base_dir) / demo_path
        skills[str(label)] = demo_path
    return Protocol(str(doc['name']), tuple(steps), model, q_start, skills)


def load_protocol(path) -> Protocol:
    path = Path(path)
    return protocol_from_dict(read_json(path), base_dir=path.parent, where=str(path))


# Sensor fixtures

def sensors_from_dict(doc, where='sensor fixture'):
    """Parse ``{ph, color, temperature}``; each a ``{key, x, y, source?}`` channel."""
    from controllers.sensor_controller import SensorChannel, SensorSim

    check_fields(doc, (), SENSOR_FIELDS, where)
    channels = {}
    for name in SENSOR_FIELDS:
        if name not in doc:
            continue
        raw = doc[name]
        check_fields(raw, ('key', 'x', 'y'), ('key', 'x', 'y', 'source'), f"{where}.{name}")
        try:
            channels[name] = SensorChannel(raw['key'], raw['x'], raw['y'], raw.get('source'))
        except (TypeError, ValueError) as err:
            raise InputError(f"{where}.{name}: x and y must be numeric samples") from err
    return SensorSim(**channels)


def load_sensors(path):
    return sensors_from_dict(read_json(path), where=str(path))


# Trajectories

def trajectory_frame(joint_path, ee_poses) -> pd.DataFrame:
    """
    One row per config: step_index, leg_index, tau, q_1..q_n, end-effector
    position and (w, x, y, z) quaternion.
    """
    if len(ee_poses) != len(joint_path):
        raise InputError("One end-effector pose per config is required")
    dof = joint_path.configs.shape[1]
    frame = pd.DataFrame({
        'step_index': np.arange(len(joint_path), dtype=np.int64),
        'leg_index': np.array([a[0] for a in joint_path.annotations], dtype=np.int64),
        'tau': np.array([a[1] for a in joint_path.annotations], dtype=np.float64),
    })
    for j in range(dof):
        frame[f'q_{j + 1}'] = joint_path.configs[:, j]
    positions = np.array([p.translation for p in ee_poses])
    quaternions = np.array([p.quaternion for p in ee_poses])
    for i, axis in enumerate('xyz'):
        frame[f'ee_{axis}'] = positions[:, i]
    for i, part in enumerate('wxyz'):
        frame[f'ee_q{part}'] = quaternions[:, i]
    return frame


def write_trajectory_csv(frame: pd.DataFrame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_csv(path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as err:
        raise InputError(f"Cannot read CSV {path}: {err}") from err
    except pd.errors.EmptyDataError as err:
        raise InputError(f"{path} is empty") from err
    return frame


# Execution logs

def write_log(log: ExecutionLog, path):
    """One JSON object per record, in execution order."""
    with Path(path).open('w', encoding='utf-8') as fp:
        for record in log.records:
            fp.write(json.dumps(record.to_dict()) + '\n')


def read_log(path) -> ExecutionLog:
    records = []
    try:
        with Path(path).open(encoding='utf-8') as fp:
            for number, line in enumerate(fp, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(LogRecord(**json.loads(line)))
                except (json.JSONDecodeError, TypeError) as err:
                    raise InputError(f"{path}:{number}: malformed log record") from err
    except OSError as err:
        raise InputError(f"Cannot read {path}: {err.strerror}") from err
    return ExecutionLog(records)
