"""
Scripted sensors for simulated protocol runs.

Each channel is a piecewise-linear curve read with ``np.interp`` and held
constant beyond its ends. pH can be keyed by time or by the volume of one
reagent dispensed so far; colour by time; temperature by the time since a
device (the heater relay) switched on.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from utils.errors import InputError

logger = logging.getLogger(__name__)

KEY_TIME = 'time'
KEY_VOLUME = 'volume'
KEY_SWITCH = 'switch'


@dataclass(frozen=True, eq=False)
class SensorChannel:
    """
    One scripted sensor curve.

    Attributes:
        key (str): 'time', 'volume' or 'switch'
        xs (ndarray): strictly increasing breakpoints (seconds or millilitres)
        ys (ndarray): readings, shape (k,) or (k, 3) for colour
        source (str): reagent for volume-keyed channels, device for switch-keyed ones
    """

    key: str
    xs: np.ndarray
    ys: np.ndarray
    source: Optional[str] = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        if self.key not in (KEY_TIME, KEY_VOLUME, KEY_SWITCH):
            raise InputError(f"Unknown sensor key '{self.key}'")
        if xs.ndim != 1 or xs.size < 1 or ys.shape[0] != xs.size:
            raise InputError("A sensor channel needs matching, non-empty x and y samples")
        if np.any(np.diff(xs) <= 0):
            raise InputError("Sensor channel breakpoints must be strictly increasing")
        if self.key != KEY_TIME and not self.source:
            raise InputError(f"A '{self.key}'-keyed channel needs a source")
        object.__setattr__(self, 'xs', xs)
        object.__setattr__(self, 'ys', ys)

    def at(self, x: float):
        if self.ys.ndim == 1:
            return float(np.interp(x, self.xs, self.ys))
        return [float(np.interp(x, self.xs, column)) for column in self.ys.T]

    def to_dict(self) -> dict:
        data = {'key': self.key, 'x': self.xs.tolist(), 'y': self.ys.tolist()}
        if self.source:
            data['source'] = self.source
        return data


class SensorSim:
    """
    Deterministic stand-in for the pH meter, camera and thermometer.

    Readings depend only on the channel scripts, the query time and the
    dispense/switch history applied through ``dispense`` and ``switch``.
    """

    def __init__(self, ph: Optional[SensorChannel] = None, color: Optional[SensorChannel] = None,
                 temperature: Optional[SensorChannel] = None):
        self.channels = {'ph': ph, 'color': color, 'temperature': temperature}
        self.dispensed = {}
        self.switched_on = {}

    def reset(self):
        self.dispensed.clear()
        self.switched_on.clear()

    def dispense(self, reagent: str, ml: float):
        self.dispensed[reagent] = self.dispensed.get(reagent, 0.0) + ml
        logger.debug("Dispensed %.3g mL of %s (total %.3g mL)", ml, reagent, self.dispensed[reagent])

    def switch(self, device: str, on: bool, elapsed: float):
        if on:
            self.switched_on.setdefault(device, elapsed)
        else:
            self.switched_on.pop(device, None)

    def read_ph(self, elapsed: float) -> float:
        return self._read('ph', elapsed)

    def read_color(self, elapsed: float) -> list:
        return self._read('color', elapsed)

    def read_temperature(self, elapsed: float) -> float:
        return self._read('temperature', elapsed)

    def ph_volume(self) -> Optional[float]:
        """Dispensed volume the pH channel is keyed on, if it is volume-keyed."""
        channel = self.channels['ph']
        if channel is None or channel.key != KEY_VOLUME:
            return None
        return self.dispensed.get(channel.source, 0.0)

    def _read(self, name, elapsed):
        channel = self.channels[name]
        if channel is None:
            raise InputError(f"No '{name}' sensor is scripted for this run")
        if channel.key == KEY_TIME:
            return channel.at(elapsed)
        if channel.key == KEY_VOLUME:
            return channel.at(self.dispensed.get(channel.source, 0.0))
        since = self.switched_on.get(channel.source)
        # Device off: the curve's first value is the ambient reading.
        return channel.at(0.0 if since is None else elapsed - since)
