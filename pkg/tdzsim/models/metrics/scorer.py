"""
Evaluation arithmetic: resistance error, SNR, ENOB, FoM, frame rate and the power budget.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np

from tdzsim.models.common.exceptions import ConfigurationError
from tdzsim.pipeline._constants import INFINITE_SNR

logger = logging.getLogger('tdzsim')


def relative_error(measured, true):
    """ |measured - true| / true, element-wise """
    measured = np.asarray(measured, dtype=float)
    true = np.asarray(true, dtype=float)
    err = np.abs(measured - true) / true
    return float(err) if err.ndim == 0 else err


def _series(r_series):
    r = np.asarray(r_series, dtype=float)
    if r.ndim != 1 or r.size < 2:
        raise ConfigurationError(f"A series of at least 2 readings is required, got {r.size}")
    # population standard deviation
    return r.mean(), r.std()


def snr_db(r_series):
    """ 20 log10(mean / std) of repeated readings; +inf when the readings are identical. """
    mean, std = _series(r_series)
    if std == 0:
        logger.warning(f"Readings are identical ({mean:.6g} Ohm); SNR is infinite")
        return math.inf
    return 20 * math.log10(abs(mean) / std)


def snr_flags(value):
    return {INFINITE_SNR} if math.isinf(value) else set()


def enob(r_series, literal=False):
    """ Effective bits of repeated readings.

    The default reading is log2(mean / (2 sqrt(2) std)); with literal=True the printed form
    log2(mean / (2 sqrt(std))) is used instead, which depends on the unit of the readings.
    """
    mean, std = _series(r_series)
    if std == 0:
        logger.warning("Readings are identical; ENOB is unbounded")
        return math.inf
    if literal:
        return math.log2(abs(mean) / (2 * math.sqrt(std)))
    return math.log2(abs(mean) / (2 * math.sqrt(2) * std))


def enob_from_snr(snr, mean=None, literal=False):
    """ ENOB from an SNR in dB; the literal reading also needs the mean reading (Ohm). """
    ratio = 10 ** (snr / 20)
    if not literal:
        return math.log2(ratio / (2 * math.sqrt(2)))
    if mean is None:
        raise ConfigurationError("The literal ENOB reading needs the mean reading")
    return math.log2(mean / (2 * math.sqrt(mean / ratio)))


def fom_db(snr, n_sensors, frame_time_ms, power_mw):
    """ SNR + 10 log10(sampling frequency [kHz] / power [mW]), sampling frequency = sensors / frame time """
    if not (n_sensors > 0 and frame_time_ms > 0 and power_mw > 0):
        raise ConfigurationError("n_sensors, frame_time_ms and power_mw must be positive")
    return snr + 10 * math.log10((n_sensors / frame_time_ms) / power_mw)


def frame_rate(frame_time):
    return 1.0 / frame_time


def dynamic_range_db(r_min, r_max):
    """ Input range 20 log10(r_max / r_min) """
    if not 0 < r_min < r_max:
        raise ConfigurationError("0 < r_min < r_max is required")
    return 20 * math.log10(r_max / r_min)


@dataclass
class BudgetReport:
    """ Power and energy bookkeeping of one chip

    Params:
        components        - name -> power [W]
        n_sensors         - sensors per frame
        frame_time        - seconds per frame
    """
    components: Dict[str, float]
    n_sensors: int
    frame_time: float
    total: float = field(init=False)

    def __post_init__(self):
        self.total = float(sum(self.components.values()))

    @property
    def per_sensor(self):
        return self.total / self.n_sensors

    @property
    def energy_per_sensor(self):
        return self.total * self.frame_time / self.n_sensors

    @property
    def fps(self):
        return frame_rate(self.frame_time)

    @property
    def shares(self):
        return {name: (p / self.total if self.total > 0 else 0.0) for name, p in self.components.items()}

    def rows(self):
        """ Rows of (item, value, unit) """
        rows = [(f'power_{name}', p, 'W') for name, p in self.components.items()]
        rows += [(f'share_{name}', s, '') for name, s in self.shares.items()]
        rows += [('power_total', self.total, 'W'), ('power_per_sensor', self.per_sensor, 'W'),
                 ('energy_per_sensor', self.energy_per_sensor, 'J'), ('frame_time', self.frame_time, 's'),
                 ('fps', self.fps, 'Hz')]
        return rows


def budget(power_components, n_sensors, frame_time, verbose=False):
    """ Totals, per-sensor power, energy per sensor and frame rate of a power breakdown """
    if any(p < 0 for p in power_components.values()):
        raise ConfigurationError("Power components must be non-negative")
    if n_sensors < 1 or not frame_time > 0:
        raise ConfigurationError("n_sensors must be >= 1 and frame_time positive")
    report = BudgetReport(dict(power_components), int(n_sensors), float(frame_time))
    if verbose:
        logger.info("Total(uW)\tPer sensor(uW)\tEnergy/sensor(nJ)\tfps")
        logger.info("{:.2f}\t{:.4f}\t{:.3f}\t{:.2f}".format(
            report.total * 1e6, report.per_sensor * 1e6, report.energy_per_sensor * 1e9, report.fps))
    return report


@dataclass
class MetricInputs:
    """ Repeated readings of one load plus the chip figures needed for the FoM

    Params:
        r_series    - repeated resistance readings [Ohm]
        power_total - total power [W]
        n_sensors   - sensors per frame
        frame_time  - seconds per frame
    """
    r_series: Sequence[float]
    power_total: float
    n_sensors: int
    frame_time: float

    def __post_init__(self):
        if not self.power_total > 0:
            raise ConfigurationError("power_total must be positive")

    def snr(self):
        return snr_db(self.r_series)

    def enob(self, literal=False):
        return enob(self.r_series, literal)

    def fom(self):
        return fom_db(self.snr(), self.n_sensors, self.frame_time * 1e3, self.power_total * 1e3)

    def score(self, verbose=True):
        snr, bits, fom = self.snr(), self.enob(), self.fom()
        if verbose:
            logger.info("SNR(dB)\tENOB\tFoM(dB)")
            logger.info("{:.2f}\t{:.2f}\t{:.2f}".format(snr, bits, fom))
        return snr, bits, fom
