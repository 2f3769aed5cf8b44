"""
Co-prime segmented current DAC with dynamic element matching.

The DAC has a coarse bank of unit elements of weight 17 and a fine bank of unit elements of
weight 1, so a code decomposes as code = 17 * coarse + fine.  With dynamic element matching each
bank selects its units with a barrel pointer that advances by the number of units consumed, so
every unit is used equally often over time and mismatch turns into shaped noise instead of
harmonic spurs.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from tdzsim.models.common.exceptions import CodeRangeError, ConfigurationError
from tdzsim.models.sigsynth.dds import LUT_FULL_SCALE


@dataclass
class CoPrimeDacSpec:
    """ Configuration of the co-prime I-DAC

    Params:
        coarse_units        - number of coarse unit elements (weight fine_units + 1)
        fine_units          - number of fine unit elements (weight 1)
        unit_mismatch_sigma - relative standard deviation of every unit element
        dem_enabled         - rotate unit selection (data-weighted averaging per bank)
        dem_pointer         - initial (coarse, fine) pointer positions
        i_unit              - nominal current of a weight-1 element [A]
    """
    coarse_units: int = 15
    fine_units: int = 16
    unit_mismatch_sigma: float = 0.0
    dem_enabled: bool = True
    dem_pointer: Tuple[int, int] = (0, 0)
    i_unit: float = 1e-6

    def __post_init__(self):
        if self.coarse_units < 1 or self.fine_units < 1:
            raise ConfigurationError("Both DAC banks need at least one unit element")
        if self.unit_mismatch_sigma < 0:
            raise ConfigurationError("unit_mismatch_sigma must be non-negative")
        self.dem_pointer = tuple(int(p) for p in self.dem_pointer)

    @property
    def coarse_weight(self):
        return self.fine_units + 1

    @property
    def n_levels(self):
        return (self.coarse_units + 1) * (self.fine_units + 1)

    @property
    def max_code(self):
        return self.n_levels - 1


def coprime_encode(code, spec=None):
    """ Split a code into (coarse_count, fine_count) with code = 17 * coarse + fine. """
    spec = spec or CoPrimeDacSpec()
    if isinstance(code, (bool, np.bool_)) or int(code) != code:
        raise CodeRangeError(f"DAC code must be an integer, got {code!r}")
    code = int(code)
    if not 0 <= code <= spec.max_code:
        raise CodeRangeError(f"DAC code {code} is outside 0..{spec.max_code}")
    coarse, fine = divmod(code, spec.coarse_weight)
    return coarse, fine


def coprime_decode(coarse, fine, spec=None):
    spec = spec or CoPrimeDacSpec()
    return spec.coarse_weight * coarse + fine


def lut_to_dac_code(lut_code, spec=None):
    """ Map signed table values (-1023..1023) onto DAC codes 0..max_code. """
    spec = spec or CoPrimeDacSpec()
    lut_code = np.asarray(lut_code)
    return np.round((lut_code + LUT_FULL_SCALE) * spec.max_code / (2 * LUT_FULL_SCALE)).astype(np.int64)


class _UnitBank:
    """ One bank of unit elements with an optional rotating selection pointer. """

    def __init__(self, weights, pointer, rotate):
        self.weights = np.asarray(weights, dtype=float)
        self.size = self.weights.size
        self.pointer = int(pointer) % self.size
        self.rotate = rotate
        self.usage = np.zeros(self.size, dtype=np.int64)
        # cumulative weights over two laps so that wrapped selections are a single difference
        self._cumulative = np.concatenate([[0.0], np.cumsum(np.tile(self.weights, 2))])

    def select(self, counts):
        counts = np.asarray(counts, dtype=np.int64)
        if self.rotate:
            consumed = np.cumsum(counts)
            starts = (self.pointer + np.concatenate([[0], consumed[:-1]])) % self.size
            self.pointer = int((self.pointer + (consumed[-1] if counts.size else 0)) % self.size)
        else:
            starts = np.full(counts.shape, self.pointer, dtype=np.int64)
        totals = self._cumulative[starts + counts] - self._cumulative[starts]
        # usage histogram from a difference array over two laps
        delta = np.zeros(2 * self.size + 1, dtype=np.int64)
        np.add.at(delta, starts, 1)
        np.add.at(delta, starts + counts, -1)
        laps = np.cumsum(delta)[:2 * self.size]
        self.usage += laps[:self.size] + laps[self.size:]
        return totals


class CoPrimeDac:
    """ A DAC instance with frozen unit mismatch and its own DEM pointer state.

    Unit weights are kept in LSB units and scaled by i_unit on output, so a mismatch-free DAC
    reproduces the nominal transfer exactly.
    """

    def __init__(self, spec, mismatch_seed=None):
        self.spec = spec
        rng = np.random.default_rng(mismatch_seed)
        sigma = spec.unit_mismatch_sigma
        coarse = spec.coarse_weight * (1 + sigma * rng.standard_normal(spec.coarse_units))
        fine = 1 + sigma * rng.standard_normal(spec.fine_units)
        pointer_coarse, pointer_fine = spec.dem_pointer
        self.coarse = _UnitBank(coarse, pointer_coarse, spec.dem_enabled)
        self.fine = _UnitBank(fine, pointer_fine, spec.dem_enabled)

    @property
    def pointers(self):
        return self.coarse.pointer, self.fine.pointer

    def convert(self, codes):
        """ Output currents for a stream of codes, advancing the DEM pointers. """
        codes = np.atleast_1d(np.asarray(codes))
        if codes.size and (codes.min() < 0 or codes.max() > self.spec.max_code):
            raise CodeRangeError(f"DAC codes must lie in 0..{self.spec.max_code}")
        coarse_counts, fine_counts = np.divmod(codes.astype(np.int64), self.spec.coarse_weight)
        lsb = self.coarse.select(coarse_counts) + self.fine.select(fine_counts)
        return lsb * self.spec.i_unit

    def nominal(self, codes):
        return np.asarray(codes, dtype=float) * self.spec.i_unit


def dac_output(spec, code, mismatch_seed=None):
    """ Output current of a single conversion starting from the configured pointer state. """
    coprime_encode(code, spec)
    return float(CoPrimeDac(spec, mismatch_seed).convert([code])[0])
