"""
Basic data structures
"""

import math

import numpy as np

from tdzsim.models.common.utils import resistance_from_impedance
from tdzsim.pipeline._constants import FAILURE_FLAGS

LOAD = 'load'
SETTING = 'setting'
COUNTS = 'counts'
PHASOR = 'phasor'
Z = 'z'
FLAGS = 'flags'


class Measurement:
    """ One impedance conversion as it flows through the acquisition stages.

    The sigsynth stage fills in the excitation and the sample grid, the frontend stage the driver
    response and differential current, and the tdreadout stage the comparator bits, counts, phasor
    and impedance.  Failures are recorded in `flags` instead of being raised.
    """

    def __init__(self, load, setting, rng=None):
        """ Construct a measurement of a load.

        Args:
            load: true complex impedance seen by the driver (Ohm); may be inf for an open line.
            setting: the RangeSetting to measure with.
            rng: numpy Generator used for driver and comparator noise.
        """
        self._load = complex(load)
        self.setting = setting
        self.rng = rng
        self.excitation = None
        self.v_m = None
        self.theta_ref = 0.0
        self.sample_times = None
        self.v_in = None
        self.settle = 0
        self.driver = None
        self.diff_current = None
        self.bits = None
        self.counts = None
        self.phasor = None
        self.z = None
        self.flags = set()
        self.attempts = 1
        self.retries = 0
        self.elapsed = 0.0

    @property
    def load(self):
        """ Access the true load impedance. """
        return self._load

    @property
    def resistance(self):
        """ Parallel-equivalent measured resistance 1/Re(1/Z), nan when no impedance was obtained. """
        if self.z is None:
            return math.nan
        return resistance_from_impedance(self.z)

    @property
    def true_resistance(self):
        return resistance_from_impedance(self._load)

    @property
    def rel_error(self):
        if self.z is None or not np.isfinite(self.true_resistance):
            return math.nan
        return abs(self.resistance - self.true_resistance) / self.true_resistance

    @property
    def ok(self):
        """ True when an impedance was obtained and no failure flag is set """
        return self.z is not None and not (self.flags & FAILURE_FLAGS)

    def to_dict(self):
        c, p, s = self.counts, self.phasor, self.setting
        nan = math.nan
        return {
            'load_re': self._load.real, 'load_im': self._load.imag,
            'amp_code': s.amp_code, 'mirror_ratio': s.mirror_ratio,
            'offset_code_p': s.offset_code_p, 'offset_code_n': s.offset_code_n,
            'n0': c.n0 if c else 0, 'n1': c.n1 if c else 0, 'n2': c.n2 if c else 0,
            'i_m': p.i_m if p else nan, 'theta': p.theta if p else nan,
            'z_re': self.z.real if self.z is not None else nan, 'z_im': self.z.imag if self.z is not None else nan,
            'r': self.resistance, 'attempts': self.attempts, 'retries': self.retries,
            'elapsed': self.elapsed, 'flags': '|'.join(sorted(self.flags)),
        }

    def __repr__(self):
        return f"<Measurement load={self._load} z={self.z} flags={sorted(self.flags)}>"
