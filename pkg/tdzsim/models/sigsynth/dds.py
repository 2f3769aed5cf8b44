"""
Direct digital synthesis of the sinusoidal excitation.

A phase accumulator advances by one step per clock tick and wraps every N0 = f_clk / f_exc ticks.
The phase addresses a quarter-wave sine table of 2**lut_bits entries with 10-bit amplitude; the
other three quadrants are obtained by mirroring.  The table value is scaled by the amplitude code
(amp_code / 64 volts peak-to-peak).
"""

from dataclasses import dataclass

import numpy as np

from tdzsim.models.common.exceptions import ConfigurationError
from tdzsim.models.common.utils import is_integer_ratio
from tdzsim.models.sigsynth.waveform import Waveform

LUT_FULL_SCALE = 1023
AMP_CODE_MAX = 64
# peak-to-peak volts at amp_code = AMP_CODE_MAX
FULL_SCALE_VPP = 1.0
F_EXC_MIN = 125e3
F_EXC_MAX = 1e6
MIN_TICKS_PER_PERIOD = 8


@dataclass
class ExcitationSpec:
    """ Configuration of the sine generator

    Params:
        f_exc           - excitation frequency [Hz]
        amp_code        - amplitude code, 1..64; peak-to-peak output is amp_code / 64 V
        f_clk           - DDS and comparator clock [Hz]
        lut_bits        - address width of the quarter-wave table
        phases          - number of interleaved clock phases of the readout
        enforce_range   - restrict f_exc to 125 kHz .. 1 MHz
        test_mode       - allow amp_code = 0 (zero output)
    """
    f_exc: float = 125e3
    amp_code: int = 64
    f_clk: float = 64e6
    lut_bits: int = 8
    phases: int = 6
    enforce_range: bool = True
    test_mode: bool = False

    def __post_init__(self):
        if not (self.f_exc > 0 and self.f_clk > 0):
            raise ConfigurationError("f_exc and f_clk must be positive")
        if not is_integer_ratio(self.f_clk, self.f_exc):
            raise ConfigurationError(f"f_clk / f_exc = {self.f_clk / self.f_exc:.6g} is not an integer "
                                     f"number of ticks per period")
        if round(self.f_clk / self.f_exc) < MIN_TICKS_PER_PERIOD:
            raise ConfigurationError(f"At least {MIN_TICKS_PER_PERIOD} ticks per excitation period are required")
        if self.enforce_range and not F_EXC_MIN <= self.f_exc <= F_EXC_MAX:
            raise ConfigurationError(f"f_exc = {self.f_exc:g} Hz is outside {F_EXC_MIN:g} .. {F_EXC_MAX:g} Hz")
        low = 0 if self.test_mode else 1
        if int(self.amp_code) != self.amp_code or not low <= self.amp_code <= AMP_CODE_MAX:
            raise ConfigurationError(f"amp_code must be an integer in {low}..{AMP_CODE_MAX}, got {self.amp_code}")
        if not 2 <= self.lut_bits <= 16:
            raise ConfigurationError(f"lut_bits must be in 2..16, got {self.lut_bits}")
        if self.phases < 1:
            raise ConfigurationError("phases must be at least 1")

    @property
    def ticks_per_period(self):
        """ N0, the number of clock ticks per excitation period """
        return int(round(self.f_clk / self.f_exc))

    @property
    def lut_entries(self):
        return 1 << self.lut_bits

    @property
    def v_pp(self):
        return FULL_SCALE_VPP * self.amp_code / AMP_CODE_MAX

    @property
    def v_peak(self):
        return self.v_pp / 2


def quarter_wave_lut(entries):
    """ Quarter-wave table q[k] = round(1023 sin(pi/2 k/entries)) for k = 0..entries.

    The final element (k = entries, full scale) is the implicit endpoint used when mirroring the
    second and fourth quadrants.
    """
    k = np.arange(entries + 1)
    return np.round(LUT_FULL_SCALE * np.sin(np.pi / 2 * k / entries)).astype(np.int64)


def lut_codes(spec, ticks):
    """ Signed table output (-1023..1023) for each tick. """
    ticks = np.asarray(ticks, dtype=np.int64)
    if np.any(ticks < 0):
        raise ConfigurationError("ticks must be non-negative")
    entries = spec.lut_entries
    n0 = spec.ticks_per_period
    lut = quarter_wave_lut(entries)
    phase = (ticks % n0) * (4 * entries) // n0
    quadrant, k = np.divmod(phase, entries)
    mirrored = (quadrant % 2) == 1
    idx = np.where(mirrored, entries - k, k)
    sign = np.where(quadrant >= 2, -1, 1)
    return sign * lut[idx]


def dds_sample(spec, tick):
    """ Output voltage of the generator at a clock tick. """
    if tick < 0:
        raise ConfigurationError(f"tick must be non-negative, got {tick}")
    return float(spec.v_peak * lut_codes(spec, [tick])[0] / LUT_FULL_SCALE)


def dds_samples(spec, ticks):
    return spec.v_peak * lut_codes(spec, ticks) / LUT_FULL_SCALE


def dds_waveform(spec, n_periods=1):
    ticks = np.arange(n_periods * spec.ticks_per_period)
    return Waveform(dds_samples(spec, ticks), spec.f_clk, 'V', spec.f_exc)
