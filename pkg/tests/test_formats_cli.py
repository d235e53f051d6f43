import json
import logging
import math

import numpy as np
import pytest
from click.testing import CliRunner

from cli import cli
from controllers import KinematicsController
from models.protocol import DONE, POLL, SATISFIED, TIMEOUT, ExecutionLog, LogRecord, Repeat
from models.robot import JointPath
from utils import formats
from utils.errors import GateTimeoutError, InputError


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, ['--env', 'testing', *[str(a) for a in args]])


def write(path, doc):
    path.write_text(json.dumps(doc), encoding='utf-8')
    return path


class TestPoses:
    def test_quaternion_far_from_unit_is_renormalized_with_warning(self, caplog):
        with caplog.at_level(logging.WARNING, logger='utils.formats'):
            pose = formats.pose_from_dict({'t': [0, 0, 0], 'q': [2.0, 0, 0, 0]})
        np.testing.assert_allclose(pose.quaternion, [1, 0, 0, 0])
        assert 'renormalized' in caplog.text

    def test_small_drift_is_renormalized_quietly(self, caplog):
        with caplog.at_level(logging.WARNING, logger='utils.formats'):
            pose = formats.pose_from_dict({'t': [0, 0, 0], 'q': [1.00001, 0, 0, 0]})
        assert np.linalg.norm(pose.quaternion) == pytest.approx(1.0, abs=1e-12)
        assert caplog.text == ''

    @pytest.mark.parametrize('doc', [
        {'t': [0, 0, 0], 'q': [0, 0, 0, 0]},
        {'t': [0, 0], 'q': [1, 0, 0, 0]},
        {'t': [0, 0, 'x'], 'q': [1, 0, 0, 0]},
        {'t': [0, 0, math.nan], 'q': [1, 0, 0, 0]},
        {'q': [1, 0, 0, 0]},
    ])
    def test_bad_poses(self, doc):
        with pytest.raises(InputError):
            formats.pose_from_dict(doc)


class TestDocuments:
    def test_missing_fields_are_named(self):
        with pytest.raises(InputError) as info:
            formats.check_fields({'label': 'pick'}, ('label', 'poses', 'objects'),
                                 formats.DEMONSTRATION_FIELDS, 'demo')
        assert sorted(info.value.details['fields']) == ['objects', 'poses']

    def test_unknown_fields_warn(self, caplog):
        with caplog.at_level(logging.WARNING, logger='utils.formats'):
            formats.check_fields({'label': 'pick', 'colour': 'red'}, ('label',), ('label',), 'demo')
        assert "['colour']" in caplog.text

    def test_invalid_json(self, tmp_path):
        broken = tmp_path / 'broken.json'
        broken.write_text('{"label": "pick", "poses": [', encoding='utf-8')
        with pytest.raises(InputError, match='not valid JSON'):
            formats.read_json(broken)

    def test_joint_space_demonstration(self, planar_2r):
        joints = [[0.1 * k, 0.3] for k in range(5)]
        doc = {'label': 'swing', 'joints': joints, 'model': formats.robot_model_to_dict(planar_2r),
               'objects': [{'id': 'base', 'pose': {'t': [0, 0, 0], 'q': [1, 0, 0, 0]}}]}
        demo = formats.demonstration_from_dict(doc)
        assert len(demo.path) == 5
        for pose, q in zip(demo.path.poses, joints):
            expected = KinematicsController.forward_kinematics(planar_2r, q)
            np.testing.assert_allclose(pose.matrix, expected.matrix, atol=1e-12)

    def test_joint_space_demonstration_needs_a_model(self):
        doc = {'label': 'swing', 'joints': [[0.0, 0.0], [0.1, 0.0]],
               'objects': [{'id': 'base', 'pose': {'t': [0, 0, 0], 'q': [1, 0, 0, 0]}}]}
        with pytest.raises(InputError, match='model'):
            formats.demonstration_from_dict(doc)

    def test_robot_model_dof_must_match(self, fixtures_dir):
        doc = formats.read_json(fixtures_dir / 'robots' / 'planar_2r.json')
        doc['dof'] = 3
        with pytest.raises(InputError, match='dof'):
            formats.robot_model_from_dict(doc)


class TestProtocols:
    def test_gold_protocol(self, fixtures_dir):
        protocol = formats.load_protocol(fixtures_dir / 'protocols' / 'gold_np.json')
        assert len(protocol.steps) == 16
        assert protocol.model.dof == 7
        assert protocol.task_labels() == ['pick', 'predispense', 'postdispense', 'place',
                                          'stirrer', 'view']
        assert all(path.exists() for path in protocol.skills.values())
        repeat = protocol.steps[15]
        assert isinstance(repeat, Repeat) and repeat.period == 7200.0
        assert [step.label for step in repeat.steps] == ['pick', 'place', 'pick', 'view', 'place']

    def test_unknown_named_pose(self):
        doc = {'name': 'p', 'steps': [{'type': 'task', 'label': 'pick',
                                       'objects': [{'id': 'vial', 'pose': 'rack'}]}]}
        with pytest.raises(InputError, match="'rack'"):
            formats.protocol_from_dict(doc)

    def test_unknown_step_type(self):
        with pytest.raises(InputError, match='stir'):
            formats.protocol_from_dict({'name': 'p', 'steps': [{'type': 'stir'}]})

    def test_unknown_condition(self):
        doc = {'name': 'p', 'steps': [{'type': 'gate', 'condition': {'type': 'ph_below'}}]}
        with pytest.raises(InputError):
            formats.protocol_from_dict(doc)

    def test_condition_with_wrong_parameters(self):
        doc = {'name': 'p', 'steps': [{'type': 'gate',
                                       'condition': {'type': 'ph_at_least', 'level': 7}}]}
        with pytest.raises(InputError):
            formats.protocol_from_dict(doc)

    def test_start_config_needs_a_model(self):
        with pytest.raises(InputError, match='q_start'):
            formats.protocol_from_dict({'name': 'p', 'q_start': [0, 0], 'steps': []})


class TestTrajectoriesAndLogs:
    def test_trajectory_frame(self, planar_2r, tmp_path):
        path = JointPath([[0.0, 0.0], [0.1, 0.2], [0.2, 0.4]], [(0, 0.0), (0, 0.5), (0, 1.0)])
        poses = [KinematicsController.forward_kinematics(planar_2r, q) for q in path.configs]
        frame = formats.trajectory_frame(path, poses)
        assert list(frame.columns) == [
            'step_index', 'leg_index', 'tau', 'q_1', 'q_2',
            'ee_x', 'ee_y', 'ee_z', 'ee_qw', 'ee_qx', 'ee_qy', 'ee_qz',
        ]
        assert len(frame) == 3

        target = tmp_path / 'task.csv'
        formats.write_trajectory_csv(frame, target)
        back = formats.read_csv(target)
        np.testing.assert_allclose(back[['q_1', 'q_2']].to_numpy(), path.configs)
        np.testing.assert_allclose(back['ee_x'].to_numpy(), frame['ee_x'].to_numpy())

    def test_trajectory_needs_a_pose_per_config(self, planar_2r):
        path = JointPath([[0.0, 0.0], [0.1, 0.2]], [(0, 0.0), (0, 1.0)])
        with pytest.raises(InputError):
            formats.trajectory_frame(path, [planar_2r.home_pose])

    def test_log_file(self, tmp_path):
        log = ExecutionLog([
            LogRecord('0', 'wait', 0.0, 10.0, DONE),
            LogRecord('1', 'gate', 10.0, 70.0, SATISFIED, {'ph': 7.5, 'polls': 61}),
            LogRecord('2', 'gate', 70.0, 100.0, TIMEOUT, {'ph': 7.5}),
        ])
        target = tmp_path / 'execution_log.jsonl'
        formats.write_log(log, target)
        assert len(target.read_text(encoding='utf-8').splitlines()) == 3

        back = formats.read_log(target)
        assert [r.to_dict() for r in back.records] == [r.to_dict() for r in log.records]
        assert back.failed

    def test_malformed_log_line(self, tmp_path):
        target = tmp_path / 'execution_log.jsonl'
        target.write_text('{"step_id": "0", "kind": "wait", "start": 0, "end": 1, '
                          '"outcome": "done"}\n{"step_id": \n', encoding='utf-8')
        with pytest.raises(InputError, match=':2:'):
            formats.read_log(target)


class TestCommands:
    def test_segment(self, runner, fixtures_dir, tmp_path):
        out = tmp_path / 'segmented.json'
        result = invoke(runner, 'segment', fixtures_dir / 'demos' / 'pick.json', '--out', out)
        assert result.exit_code == 0, result.output
        assert '3 segment(s), breakpoints [0, 10, 27, 47]' in result.output
        seg = formats.segmented_path_from_dict(formats.read_json(out))
        assert seg.breakpoints == (0, 10, 27, 47)

    def test_segment_truncated_file(self, runner, tmp_path):
        broken = tmp_path / 'pick.json'
        broken.write_text('{"label": "pick", "poses": [{"t": [0, 0', encoding='utf-8')
        result = invoke(runner, 'segment', broken)
        assert result.exit_code == 1
        assert 'error:' in result.output

    def test_segment_binary_file(self, runner, tmp_path):
        binary = tmp_path / 'pick.json'
        binary.write_bytes(b'\xff\xfe{"label": "pick"}')
        result = invoke(runner, 'segment', binary)
        assert result.exit_code == 1
        assert 'not UTF-8' in result.output

    @pytest.mark.parametrize('field, value', [
        ('roi_radius', '0.3'),
        ('roi_radius', -0.3),
        ('timestamps', ['soon'] * 48),
    ])
    def test_segment_rejects_non_numeric_fields(self, runner, fixtures_dir, tmp_path,
                                                field, value):
        doc = formats.read_json(fixtures_dir / 'demos' / 'pick.json')
        doc[field] = value
        result = invoke(runner, 'segment', write(tmp_path / 'pick.json', doc))
        assert result.exit_code == 1
        assert 'error:' in result.output and field in result.output

    @pytest.mark.parametrize('step, field', [
        ({'type': 'wait', 'duration': 'soon'}, 'duration'),
        ({'type': 'gate', 'condition': {'type': 'ph_at_least', 'threshold': '12'}}, 'threshold'),
        ({'type': 'gate', 'condition': {'type': 'elapsed_at_least', 'seconds': 5},
          'timeout': [60]}, 'timeout'),
        ({'type': 'action', 'name': 'heater_on', 'switch': {'heater': 'yes'}}, 'heater'),
        ({'type': 'action', 'name': 'add_base', 'dispense': {'naoh': 'lots'}}, 'naoh'),
        ({'type': 'repeat', 'steps': [], 'until': {'type': 'elapsed_at_least', 'seconds': 5},
          'period': '30'}, 'period'),
    ])
    def test_plan_rejects_malformed_steps(self, runner, fixtures_dir, tmp_path, step, field):
        protocol = write(tmp_path / 'broken.json', {
            'name': 'broken',
            'model': str(fixtures_dir / 'robots' / 'planar_2r.json'),
            'q_start': [0.0, 0.5],
            'steps': [step],
        })
        result = invoke(runner, 'plan', protocol, '--out-dir', tmp_path / 'out')
        assert result.exit_code == 1
        assert 'error:' in result.output and field in result.output

    def test_register_then_transfer(self, runner, fixtures_dir, tmp_path):
        library = tmp_path / 'skills.json'
        result = invoke(runner, 'register', fixtures_dir / 'demos' / 'pick.json',
                        '--library', library)
        assert result.exit_code == 0, result.output
        assert 'pick: 3 segment(s), 4 guiding pose(s) on vial' in result.output

        moved = write(tmp_path / 'moved.json', {'objects': [
            {'id': 'vial', 'pose': {'t': [0.5, 0.1, 0.12], 'q': [1, 0, 0, 0]}}]})
        out = tmp_path / 'waypoints.json'
        result = invoke(runner, 'transfer', '--library', library, '--label', 'pick',
                        '--objects', moved, '--out', out)
        assert result.exit_code == 0, result.output
        assert 'pick: 4 waypoint(s), 3 leg(s)' in result.output
        assert len(formats.read_json(out)['legs']) == 3

        wrong = write(tmp_path / 'wrong.json', {'objects': [
            {'id': 'beaker', 'pose': {'t': [0.5, 0.1, 0.12], 'q': [1, 0, 0, 0]}}]})
        result = invoke(runner, 'transfer', '--library', library, '--label', 'pick',
                        '--objects', wrong)
        assert result.exit_code == 1
        assert "'vial'" in result.output

    def test_register_duplicate_label(self, runner, fixtures_dir, tmp_path):
        library = tmp_path / 'skills.json'
        demo = fixtures_dir / 'demos' / 'pick.json'
        assert invoke(runner, 'register', demo, '--library', library).exit_code == 0
        result = invoke(runner, 'register', demo, '--library', library)
        assert result.exit_code == 1
        assert 'already registered' in result.output
        assert invoke(runner, 'register', demo, '--library', library, '--overwrite').exit_code == 0

    def test_label_needs_a_single_file(self, runner, fixtures_dir, tmp_path):
        result = invoke(runner, 'register', fixtures_dir / 'demos' / 'pick.json',
                        fixtures_dir / 'demos' / 'place.json', '--library', tmp_path / 'lib.json',
                        '--label', 'both')
        assert result.exit_code == 1

    def test_plot_titration_inflections(self, runner, fixtures_dir, tmp_path):
        out = tmp_path / 'titration.csv'
        result = invoke(runner, 'plot-data', fixtures_dir / 'sensors' / 'magnetite.json',
                        '--kind', 'titration', '--out', out)
        assert result.exit_code == 0, result.output
        assert 'inflection: pH 4.20 at 12.00 mL' in result.output
        assert 'inflection: pH 10.40 at 60.00 mL' in result.output
        frame = formats.read_csv(out)
        assert list(frame.columns) == ['volume_dispensed', 'pH', 'pH_first_derivative']
        assert len(frame) == 19

    def test_plot_titration_from_empty_log(self, runner, tmp_path):
        empty = tmp_path / 'execution_log.jsonl'
        empty.write_text('', encoding='utf-8')
        result = invoke(runner, 'plot-data', empty, '--kind', 'titration',
                        '--out', tmp_path / 'titration.csv')
        assert result.exit_code == 1
        assert 'no pH readings' in result.output

    def test_plot_path3d_keeps_every_row(self, runner, planar_2r, tmp_path):
        path = JointPath([[0.0, 0.0], [0.1, 0.2], [0.2, 0.4], [0.3, 0.6]],
                         [(0, 0.0), (0, 1.0), (1, 0.5), (1, 1.0)])
        poses = [KinematicsController.forward_kinematics(planar_2r, q) for q in path.configs]
        trajectory = tmp_path / 'task.csv'
        formats.write_trajectory_csv(formats.trajectory_frame(path, poses), trajectory)
        out = tmp_path / 'path3d.csv'
        result = invoke(runner, 'plot-data', trajectory, '--kind', 'path3d', '--out', out)
        assert result.exit_code == 0, result.output
        frame = formats.read_csv(out)
        assert list(frame.columns) == ['step_index', 'ee_x', 'ee_y', 'ee_z']
        assert len(frame) == 4

    def test_run_stops_on_gate_timeout(self, runner, fixtures_dir, tmp_path):
        protocol = write(tmp_path / 'stuck.json', {
            'name': 'stuck',
            'model': str(fixtures_dir / 'robots' / 'planar_2r.json'),
            'q_start': [0.0, 0.5],
            'steps': [
                {'type': 'gate', 'condition': {'type': 'ph_at_least', 'threshold': 13}, 'timeout': 30},
                {'type': 'wait', 'duration': 10},
            ],
        })
        out_dir = tmp_path / 'run'
        result = invoke(runner, 'run', protocol, '--sensors',
                        fixtures_dir / 'sensors' / 'magnetite.json', '--out-dir', out_dir)
        assert result.exit_code == GateTimeoutError.exit_code == 3
        assert 'step 0 timed out' in result.output
        log = formats.read_log(out_dir / 'execution_log.jsonl')
        assert len(log) == 1 and log.records[0].outcome == TIMEOUT
        assert (out_dir / 'plan_report.json').exists()

    def test_plan_magnetite(self, runner, fixtures_dir, tmp_path):
        out_dir = tmp_path / 'plan'
        result = invoke(runner, 'plan', fixtures_dir / 'protocols' / 'magnetite.json',
                        '--out-dir', out_dir)
        assert result.exit_code == 0, result.output
        assert len(list(out_dir.glob('*.csv'))) >= 4
        report = formats.read_json(out_dir / 'plan_report.json')
        assert report['tasks']

    def test_run_magnetite_to_target_ph(self, runner, fixtures_dir, tmp_path):
        out_dir = tmp_path / 'run'
        result = invoke(runner, 'run', fixtures_dir / 'protocols' / 'magnetite.json',
                        '--sensors', fixtures_dir / 'sensors' / 'magnetite.json',
                        '--out-dir', out_dir)
        assert result.exit_code == 0, result.output
        last = formats.read_log(out_dir / 'execution_log.jsonl').records[-1]
        assert last.kind == POLL and last.outcome == SATISFIED
        assert last.readings['ph'] >= 12.0

    def test_repeated_runs_write_identical_files(self, runner, fixtures_dir, tmp_path):
        outputs = []
        for name in ('first', 'second'):
            out_dir = tmp_path / name
            result = invoke(runner, 'run', fixtures_dir / 'protocols' / 'magnetite.json',
                            '--sensors', fixtures_dir / 'sensors' / 'magnetite.json',
                            '--out-dir', out_dir)
            assert result.exit_code == 0, result.output
            outputs.append({p.name: p.read_bytes() for p in sorted(out_dir.iterdir())})
        assert outputs[0].keys() == outputs[1].keys()
        assert outputs[0] == outputs[1]
