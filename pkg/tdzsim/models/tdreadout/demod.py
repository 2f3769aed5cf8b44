"""
Counts -> phasor -> impedance.

For a differential current I_m sin(2 pi f t + theta) and threshold I_th, the comparator is high for
a duty d = n1 / n0 with cos(pi d) = I_th / I_m, and the pulse is centred on the sine peak:

    I_m   = I_th / cos(pi d)
    theta = pi / 2 - 2 pi (n2 + n1 / 2) / n0

Position 0 of the effective grid is the DDS phase-accumulator zero (rising zero crossing of V_in).
A negative threshold is allowed: the comparator then reports the complementary pulse (d > 1/2)
and the same expressions hold.
"""

import math
from dataclasses import dataclass

import numpy as np

from tdzsim.models.common.exceptions import (ConfigurationError, InconsistentCountsError, OpenCircuitError,
                                             OutOfRangeError)
from tdzsim.models.common.utils import wrap_phase


@dataclass
class Phasor:
    """ Demodulated magnitude [A] and phase [rad] in (-pi, pi] """
    i_m: float
    theta: float

    def __post_init__(self):
        if self.i_m < 0:
            raise ConfigurationError("Phasor magnitude must be non-negative")
        self.theta = wrap_phase(self.theta)


def demodulate(c, i_th):
    if c.saturated or c.n1 <= 0 or c.n1 >= c.n0:
        raise OutOfRangeError(c.n1, c.n0)
    if i_th == 0:
        raise ConfigurationError("A non-zero threshold is required for demodulation")
    d = c.n1 / c.n0
    if (i_th > 0 and d >= 0.5) or (i_th < 0 and d <= 0.5):
        raise InconsistentCountsError(f"Duty {d:.6f} is inconsistent with threshold {i_th:.4g} A")
    i_m = i_th / math.cos(math.pi * d)
    theta = math.pi / 2 - 2 * math.pi * (c.n2 + c.n1 / 2) / c.n0
    return Phasor(i_m, theta)


def to_impedance(p, v_m, mirror_ratio, theta_ref=0.0):
    """ Z = mirror_ratio * v_m / i_m at angle -(theta - theta_ref).

    theta_ref is the excitation's own sine phase at the reference tick, so a resistive load gives a
    real Z.
    """
    if p.i_m == 0:
        raise OpenCircuitError("Measured current magnitude is zero")
    theta_rel = wrap_phase(p.theta - theta_ref)
    return complex(mirror_ratio * v_m / p.i_m * np.exp(-1j * theta_rel))


def quantization_bounds(d, n0):
    """ Worst-case noiseless (relative magnitude, absolute phase) error for a duty d """
    return math.pi * abs(math.tan(math.pi * d)) / n0 + 2.0 / n0, 2 * math.pi * 1.5 / n0
