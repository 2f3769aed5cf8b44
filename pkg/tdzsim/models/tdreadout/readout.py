"""
Clocked comparator with programmable differential offset and phase-interleaved sampling.

Cycle m of a conversion is sampled on clock phase m mod phases, i.e. at
t = (m N0 + n + (m mod phases) / phases) / f_clk for tick n of the cycle.  Merging the cycles puts
every sample on an effective grid of phases * N0 positions per excitation period; the comparator
output on that grid is a pulse whose width N1 and start N2 encode the magnitude and phase of the
differential current.
"""

import logging
from dataclasses import dataclass

import numpy as np

from tdzsim.models.common.exceptions import ConfigurationError
from tdzsim.models.common.utils import is_integer_ratio

logger = logging.getLogger('tdzsim')

OFFSET_CODE_MAX = 63
MERGE_RULES = ('majority', 'sum')


@dataclass
class ReadoutSpec:
    """ Configuration of the T-D readout

    Params:
        f_clk           - comparator clock [Hz]
        phases          - number of interleaved clock phases
        cycles_per_meas - excitation cycles per conversion, a multiple of phases
        offset_code_p   - code of the positive-side offset I-DAC, 0..63
        offset_code_n   - code of the negative-side offset I-DAC, 0..63
        offset_lsb      - offset I-DAC step [A]
        noise_sigma     - comparator input-referred noise per sample [A]
        jitter_sigma    - sampling clock jitter [s]
        merge           - 'majority' or 'sum' merging of repeated phases
        e_conv          - energy per clock edge at full duty [J]
        duty_gate       - fraction of each clock period the dc paths conduct with gating
        clock_gating    - asynchronous clock gating enabled
    """
    f_clk: float = 64e6
    phases: int = 6
    cycles_per_meas: int = 6
    offset_code_p: int = 0
    offset_code_n: int = 48
    offset_lsb: float = 0.5e-6
    noise_sigma: float = 10e-9
    jitter_sigma: float = 0.0
    merge: str = 'majority'
    e_conv: float = 1.75e-12
    duty_gate: float = 0.25
    clock_gating: bool = True

    def __post_init__(self):
        if self.phases < 1 or self.cycles_per_meas < 1 or self.cycles_per_meas % self.phases:
            raise ConfigurationError(f"cycles_per_meas ({self.cycles_per_meas}) must be a positive multiple of "
                                     f"phases ({self.phases})")
        for code in (self.offset_code_p, self.offset_code_n):
            if int(code) != code or not 0 <= code <= OFFSET_CODE_MAX:
                raise ConfigurationError(f"Offset codes must be integers in 0..{OFFSET_CODE_MAX}, got {code}")
        if self.merge not in MERGE_RULES:
            raise ConfigurationError(f"merge must be one of {MERGE_RULES}, got {self.merge}")
        if self.noise_sigma < 0 or self.jitter_sigma < 0:
            raise ConfigurationError("noise_sigma and jitter_sigma must be non-negative")
        if not 0 < self.duty_gate <= 1:
            raise ConfigurationError("duty_gate must be in (0, 1]")

    @property
    def i_th(self):
        """ Net differential threshold """
        return (self.offset_code_n - self.offset_code_p) * self.offset_lsb

    def ticks_per_period(self, f_exc):
        if not is_integer_ratio(self.f_clk, f_exc):
            raise ConfigurationError(f"f_clk / f_exc = {self.f_clk / f_exc:.6g} is not an integer")
        return int(round(self.f_clk / f_exc))

    def n0(self, f_exc):
        return self.phases * self.ticks_per_period(f_exc)

    def conversion_time(self, f_exc):
        return self.cycles_per_meas / f_exc


@dataclass
class TdCounts:
    """ Counts on the effective (interleaved) grid

    Params:
        n0        - effective positions per period
        n1        - high positions per period
        n2        - first position of the pulse relative to the excitation phase zero
        saturated - no edge was found (n1 is 0 or n0)
    """
    n0: int
    n1: int
    n2: int
    saturated: bool = False

    @property
    def duty(self):
        return self.n1 / self.n0


def interleaved_times(f_clk, f_exc, cycles, phases):
    """ Sample instants of `cycles` excitation periods, shape (cycles, ticks per period) """
    if not is_integer_ratio(f_clk, f_exc):
        raise ConfigurationError(f"f_clk / f_exc = {f_clk / f_exc:.6g} is not an integer")
    ticks = int(round(f_clk / f_exc))
    m = np.arange(cycles)[:, None]
    n = np.arange(ticks)[None, :]
    return (m * ticks + n + (m % phases) / phases) / f_clk


def sample_times(spec, f_exc):
    return interleaved_times(spec.f_clk, f_exc, spec.cycles_per_meas, spec.phases)


def sample_bits(spec, diff_current, f_exc, seed=None):
    """ Comparator decisions for one conversion, shape (cycles_per_meas, N0).

    diff_current is either a callable of time or the differential current already evaluated at
    sample_times(spec, f_exc).  For sampled input, clock jitter is applied to first order through
    the local slope of the record.
    """
    rng = np.random.default_rng(seed)
    times = sample_times(spec, f_exc)
    if callable(diff_current):
        if spec.jitter_sigma > 0:
            times = times + rng.normal(0.0, spec.jitter_sigma, times.shape)
        values = np.asarray(diff_current(times), dtype=float)
    else:
        values = np.asarray(diff_current, dtype=float).reshape(times.shape)
        if spec.jitter_sigma > 0:
            flat = values.ravel()
            slope = np.gradient(flat, times.ravel())
            values = (flat + slope * rng.normal(0.0, spec.jitter_sigma, flat.size)).reshape(times.shape)
    if spec.noise_sigma > 0:
        values = values + rng.normal(0.0, spec.noise_sigma, values.shape)
    return values > spec.i_th


def merge_bits(bits, spec):
    """ Merge the cycles onto the effective grid: position n * phases + p holds phase p of tick n.

    Repeated observations of a position are combined by majority vote, ties resolved high.
    """
    bits = np.asarray(bits, dtype=bool)
    cycles, ticks = bits.shape
    if cycles != spec.cycles_per_meas:
        raise ConfigurationError(f"Expected {spec.cycles_per_meas} cycles of bits, got {cycles}")
    repeats = cycles // spec.phases
    votes = bits.reshape(repeats, spec.phases, ticks).sum(axis=0)
    merged = (2 * votes >= repeats).T.reshape(-1)
    return merged, votes.T.reshape(-1)


def _longest_run_start(merged):
    """ Start of the longest circular run of high positions """
    previous = np.roll(merged, 1)
    rises = np.flatnonzero(merged & ~previous)
    falls = np.flatnonzero(~merged & previous)
    n0 = merged.size
    ends = np.searchsorted(falls, rises)
    fall_at = np.where(ends < falls.size, falls[np.minimum(ends, falls.size - 1)], falls[0] + n0)
    lengths = fall_at - rises
    return int(rises[np.argmax(lengths)])


def extract_counts(bits, spec):
    """ Reduce comparator decisions to (n0, n1, n2). """
    merged, votes = merge_bits(bits, spec)
    n0 = merged.size
    if spec.merge == 'sum':
        repeats = spec.cycles_per_meas // spec.phases
        n1 = int(round(votes.sum() / repeats))
    else:
        n1 = int(merged.sum())
    high = int(merged.sum())
    if high in (0, n0) or n1 in (0, n0):
        return TdCounts(n0, n1, 0, True)
    return TdCounts(n0, n1, _longest_run_start(merged), False)


def readout_power(spec):
    """ Comparator power: energy per edge times clock rate, scaled by the gated duty. """
    duty = spec.duty_gate if spec.clock_gating else 1.0
    return spec.e_conv * spec.f_clk * duty


def counts_rows(counts):
    """ Rows (n0, n1, n2) for CSV export """
    return [(c.n0, c.n1, c.n2) for c in counts]


def bits_rows(bits, spec):
    """ Rows (cycle, phase, tick, bit) for CSV export """
    bits = np.asarray(bits, dtype=bool)
    return [(m, m % spec.phases, n, int(bits[m, n])) for m in range(bits.shape[0]) for n in range(bits.shape[1])]
