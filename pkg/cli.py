"""
Command-line surface of the screw-constraint planner.

Every command reads JSON inputs, writes its outputs and exits 0 on success,
1 on input errors, 2 on planning/tracking failures and 3 when a gate times
out during ``run``.
"""
import functools
import logging
import os
import sys
from pathlib import Path

import click

from config import get_config
from controllers import (
    KinematicsController,
    PlotDataController,
    ProtocolController,
    SegmentationController,
    SkillController,
    TransferController,
)
from models.robot import TrackerParams
from utils import formats
from utils.errors import GateTimeoutError, InputError, PlannerError
from utils.helpers import configure_logging

logger = logging.getLogger(__name__)


def reports_errors(func):
    """Print PlannerError messages and exit with the error's exit code."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except PlannerError as err:
            click.echo(f"error: {err.message}", err=True)
            sys.exit(err.exit_code)
    return wrapper


def _existing_file():
    return click.Path(exists=True, dir_okay=False, path_type=Path)


@click.group()
@click.option('--env', 'env_name', default=None,
              help="Configuration name (development, production, testing); defaults to SCREWPBD_ENV.")
@click.option('--log-level', default=None, help="Overrides LOG_LEVEL.")
@click.pass_context
def cli(ctx, env_name, log_level):
    """Screw-constraint programming by demonstration."""
    cfg = get_config(env_name)
    configure_logging((log_level or cfg.LOG_LEVEL).upper())
    ctx.obj = cfg


def _library(cfg, protocol, library_path):
    """Protocol skills registered from their demonstrations, plus any library file entries."""
    seg_tolerances = (cfg.SEGMENT_TOL_ROT, cfg.SEGMENT_TOL_TRANS)
    lib = SkillController.library_from_demo_files(protocol.skills, cfg.ROI_RADIUS, seg_tolerances)
    if library_path is not None:
        stored = SkillController.load_library(library_path)
        missing = [label for label in stored.labels if label not in lib]
        SkillController.reuse_skills(lib, stored, missing)
    return lib


def _plan(cfg, protocol_path, library_path):
    protocol = formats.load_protocol(protocol_path)
    if protocol.model is None or protocol.q_start is None:
        raise InputError(f"{protocol_path}: model and q_start are required for planning")
    lib = _library(cfg, protocol, library_path)
    plan = ProtocolController.plan_protocol(lib, protocol.steps, protocol.model,
                                            protocol.q_start, TrackerParams.from_config(cfg))
    return protocol, plan


def _write_trajectories(protocol, plan, out_dir) -> list:
    written = []
    for step_id, path in plan.paths.items():
        label = next(t['label'] for t in plan.report['tasks'] if t['step_id'] == step_id)
        poses = [KinematicsController.forward_kinematics(protocol.model, q) for q in path.configs]
        target = out_dir / f"task_{step_id}_{label}.csv"
        formats.write_trajectory_csv(formats.trajectory_frame(path, poses), target)
        written.append(target)
    return written


@cli.command()
@click.argument('demo_file', type=_existing_file())
@click.option('--tol-rot', type=float, default=None, help="Rotation tolerance, radians.")
@click.option('--tol-trans', type=float, default=None, help="Translation tolerance, meters.")
@click.option('--out', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Segmented-path JSON output.")
@click.pass_obj
@reports_errors
def segment(cfg, demo_file, tol_rot, tol_trans, out):
    """Segment a demonstration into constant-screw motions."""
    demo = formats.load_demonstration(demo_file)
    seg = SegmentationController.segment_path(
        demo.path,
        cfg.SEGMENT_TOL_ROT if tol_rot is None else tol_rot,
        cfg.SEGMENT_TOL_TRANS if tol_trans is None else tol_trans,
    )
    rot, trans = SegmentationController.reconstruction_error(demo.path, seg)
    if out is not None:
        formats.write_json(formats.segmented_path_to_dict(seg, (rot, trans)), out)
    click.echo(f"{seg.segment_count} segment(s), breakpoints {list(seg.breakpoints)}")
    click.echo(f"reconstruction error: {rot:.3e} rad, {trans:.3e} m")


@cli.command()
@click.argument('demo_files', nargs=-1, type=_existing_file())
@click.option('--library', 'library_path', type=click.Path(dir_okay=False, path_type=Path),
              required=True, help="Skill library JSON, created if missing.")
@click.option('--label', default=None, help="Label for a single demonstration (default: its own).")
@click.option('--roi-radius', type=float, default=None)
@click.option('--tol-rot', type=float, default=None)
@click.option('--tol-trans', type=float, default=None)
@click.option('--overwrite', is_flag=True, help="Replace existing labels.")
@click.option('--reuse-from', type=_existing_file(), default=None,
              help="Another library to copy skills from.")
@click.option('--reuse', 'reuse_labels', multiple=True, help="Label to copy from --reuse-from.")
@click.pass_obj
@reports_errors
def register(cfg, demo_files, library_path, label, roi_radius, tol_rot, tol_trans, overwrite,
             reuse_from, reuse_labels):
    """Register demonstrations (and reused skills) in a skill library."""
    if label is not None and len(demo_files) != 1:
        raise InputError("--label needs exactly one demonstration file")
    if reuse_labels and reuse_from is None:
        raise InputError("--reuse needs --reuse-from")
    if not demo_files and not reuse_labels:
        raise InputError("Nothing to register")

    lib = SkillController.load_library(library_path)
    if reuse_labels:
        SkillController.reuse_skills(lib, SkillController.load_library(reuse_from), reuse_labels,
                                     overwrite=overwrite)
    tolerances = (cfg.SEGMENT_TOL_ROT if tol_rot is None else tol_rot,
                  cfg.SEGMENT_TOL_TRANS if tol_trans is None else tol_trans)
    for demo_file in demo_files:
        demo = formats.load_demonstration(demo_file)
        radius = roi_radius if roi_radius is not None else (demo.roi_radius or cfg.ROI_RADIUS)
        SkillController.register_skill(lib, label or demo.label, demo, radius, tolerances,
                                       overwrite=overwrite)
    SkillController.save_library(lib, library_path)
    for entry in lib.entries():
        click.echo(f"{entry.label}: {entry.segmented.segment_count} segment(s), "
                   f"{entry.guiding_poses.pose_count} guiding pose(s) on "
                   f"{', '.join(entry.guiding_poses.object_ids)}")


@cli.command()
@click.option('--library', 'library_path', type=_existing_file(), required=True)
@click.option('--label', required=True)
@click.option('--objects', 'objects_file', type=_existing_file(), required=True,
              help="JSON file with the new task instance: {objects: [{id, pose}]}.")
@click.option('--out', type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_obj
@reports_errors
def transfer(cfg, library_path, label, objects_file, out):
    """Transfer a skill's guiding poses to new object poses."""
    entry = SkillController.load_library(library_path).get(label)
    doc = formats.read_json(objects_file)
    formats.check_fields(doc, ('objects',), ('objects',), str(objects_file))
    instance = formats.instance_from_list(doc['objects'], where=f"{objects_file}.objects")
    waypoints = TransferController.transfer_guiding_poses(entry.guiding_poses, instance)
    legs = TransferController.build_constraint_plan(waypoints) if len(waypoints) > 1 else []
    if out is not None:
        formats.write_json({'label': label,
                            'waypoints': [w.to_dict() for w in waypoints],
                            'legs': [leg.to_dict() for leg in legs]}, out)
    click.echo(f"{label}: {len(waypoints)} waypoint(s), {len(legs)} leg(s)")


@cli.command()
@click.argument('protocol_file', type=_existing_file())
@click.option('--library', 'library_path', type=_existing_file(), default=None,
              help="Skill library supplying labels the protocol does not list.")
@click.option('--out-dir', type=click.Path(file_okay=False, path_type=Path), required=True)
@click.pass_obj
@reports_errors
def plan(cfg, protocol_file, library_path, out_dir):
    """Plan every task of a protocol into joint paths."""
    protocol, protocol_plan = _plan(cfg, protocol_file, library_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = _write_trajectories(protocol, protocol_plan, out_dir)
    formats.write_json(protocol_plan.report, out_dir / 'plan_report.json')
    audit = protocol_plan.report['audit_max']
    click.echo(f"{protocol.name}: {len(written)} task trajectories written to {out_dir}")
    click.echo(f"audit max error: {audit['rot']:.3e} rad, {audit['trans']:.3e} m")


@cli.command()
@click.argument('protocol_file', type=_existing_file())
@click.option('--sensors', 'sensors_file', type=_existing_file(), required=True,
              help="Sensor fixture JSON.")
@click.option('--library', 'library_path', type=_existing_file(), default=None)
@click.option('--out-dir', type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option('--poll-interval', type=float, default=None, help="Gate poll interval, seconds.")
@click.option('--gate-timeout', type=float, default=None, help="Gate timeout, seconds.")
@click.pass_obj
@reports_errors
def run(cfg, protocol_file, sensors_file, library_path, out_dir, poll_interval, gate_timeout):
    """Plan a protocol and execute it on simulated time."""
    protocol, protocol_plan = _plan(cfg, protocol_file, library_path)
    sensors = formats.load_sensors(sensors_file)
    log = ProtocolController.execute_protocol(
        protocol_plan, protocol.steps, sensors,
        poll_interval=cfg.GATE_POLL_INTERVAL if poll_interval is None else poll_interval,
        gate_timeout=cfg.GATE_TIMEOUT if gate_timeout is None else gate_timeout,
        motion_seconds_per_config=cfg.MOTION_SECONDS_PER_CONFIG,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_trajectories(protocol, protocol_plan, out_dir)
    formats.write_json(protocol_plan.report, out_dir / 'plan_report.json')
    formats.write_log(log, out_dir / 'execution_log.jsonl')

    last = log.records[-1] if log.records else None
    click.echo(f"{protocol.name}: {len(log)} record(s), {log.elapsed:.1f} s simulated")
    if last is not None:
        click.echo(f"last: step {last.step_id} {last.kind} {last.outcome} {last.readings}")
    if log.failed:
        raise GateTimeoutError(f"step {last.step_id} timed out; execution halted",
                               step_id=last.step_id)


@cli.command('plot-data')
@click.argument('source', type=_existing_file())
@click.option('--kind', type=click.Choice(['titration', 'path3d', 'joint']), required=True)
@click.option('--out', type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.pass_obj
@reports_errors
def plot_data(cfg, source, kind, out):
    """Emit plot-ready CSV from a log, sensor fixture or trajectory."""
    frame = PlotDataController.plot_data(source, kind)
    frame.to_csv(out, index=False, float_format=formats.FLOAT_FORMAT)
    click.echo(f"{len(frame)} row(s) written to {out}")
    if kind == 'titration':
        for _, row in PlotDataController.inflection_points(frame).iterrows():
            click.echo(f"inflection: pH {row['pH']:.2f} at {row['volume_dispensed']:.2f} mL "
                       f"(dpH/dV {row['pH_first_derivative']:.4f})")


@cli.command()
@click.option('--host', default='127.0.0.1')
@click.option('--port', type=int, default=5000)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP planning service."""
    from __init__ import create_app

    env_name = ctx.parent.params.get('env_name') or os.getenv('SCREWPBD_ENV', 'default')
    create_app(env_name).run(host=host, port=port)


if __name__ == '__main__':
    cli()
