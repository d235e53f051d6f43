"""
Plot-ready CSV data from execution logs, sensor fixtures and trajectories.
"""
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.signal import find_peaks

from utils import formats
from utils.errors import InputError
from .base_controller import BaseController

logger = logging.getLogger(__name__)

PLOT_KINDS = ('titration', 'path3d', 'joint')
# Peaks lower than this over their surroundings are rounding noise on flat stretches.
INFLECTION_PROMINENCE = 1e-9


class PlotDataController(BaseController):
    """
    Controller for plot data emission.

    This controller handles:
    - Titration curves with their first derivative and inflection points
    - End-effector 3D paths and joint trajectories from trajectory exports
    """

    @staticmethod
    def plot_data(source, kind: str) -> pd.DataFrame:
        """
        Build the frame for ``kind`` from a file.

        Args:
            source: execution log (.jsonl) or sensor fixture (.json) for
                'titration'; trajectory CSV for 'path3d' and 'joint'
            kind (str): one of PLOT_KINDS

        Returns:
            DataFrame: columns depend on ``kind``
        """
        if kind not in PLOT_KINDS:
            raise InputError(f"Unknown plot kind '{kind}', expected one of {list(PLOT_KINDS)}")
        source = Path(source)
        if kind == 'titration':
            if source.suffix == '.jsonl':
                return PlotDataController.titration_from_log(formats.read_log(source))
            return PlotDataController.titration_from_sensors(formats.load_sensors(source))
        trajectory = formats.read_csv(source)
        if kind == 'path3d':
            return PlotDataController._columns(trajectory, ['step_index', 'ee_x', 'ee_y', 'ee_z'])
        joints = [c for c in trajectory.columns if c.startswith('q_')]
        if not joints:
            raise InputError(f"{source} has no joint columns")
        return PlotDataController._columns(trajectory, ['step_index', 'leg_index', 'tau', *joints])

    @staticmethod
    def titration_from_log(log) -> pd.DataFrame:
        """Volume/pH pairs from every logged reading that carries both."""
        rows = [
            (r.readings['volume_dispensed'], r.readings['ph'])
            for r in log.records
            if 'ph' in r.readings and 'volume_dispensed' in r.readings
        ]
        if not rows:
            raise InputError("The log holds no pH readings keyed by dispensed volume")
        return PlotDataController.titration_curve(*zip(*rows))

    @staticmethod
    def titration_from_sensors(sensors) -> pd.DataFrame:
        """The scripted pH curve sampled at its own breakpoints."""
        channel = sensors.channels['ph']
        if channel is None or channel.key != 'volume':
            raise InputError("The sensor fixture has no volume-keyed pH channel")
        return PlotDataController.titration_curve(channel.xs, channel.ys)

    @staticmethod
    def titration_curve(volumes, ph) -> pd.DataFrame:
        """
        Columns volume_dispensed, pH, pH_first_derivative.

        The derivative uses central differences inside and one-sided
        differences at both ends. Repeated volumes keep their last reading.
        """
        frame = pd.DataFrame({'volume_dispensed': np.asarray(volumes, dtype=np.float64),
                              'pH': np.asarray(ph, dtype=np.float64)})
        frame = frame.drop_duplicates('volume_dispensed', keep='last')
        frame = frame.sort_values('volume_dispensed', kind='stable').reset_index(drop=True)
        if len(frame) < 2:
            raise InputError("A titration curve needs readings at two or more volumes")
        frame['pH_first_derivative'] = np.gradient(frame['pH'].to_numpy(),
                                                   frame['volume_dispensed'].to_numpy())
        return frame

    @staticmethod
    def inflection_points(frame: pd.DataFrame) -> pd.DataFrame:
        """Rows where the first derivative is a strict interior local maximum."""
        peaks, _ = find_peaks(frame['pH_first_derivative'].to_numpy(),
                              prominence=INFLECTION_PROMINENCE)
        return frame.iloc[peaks].reset_index(drop=True)

    @staticmethod
    def _columns(frame, columns):
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise InputError(f"Trajectory is missing columns {missing}")
        if frame.empty:
            raise InputError("Trajectory has no rows")
        return frame[columns]
