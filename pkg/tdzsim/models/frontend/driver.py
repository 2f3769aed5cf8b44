"""
Behavioral model of the transconductance voltage driver.

The driver forces V_in across the load, so the ideal load current is i* = V_in / Z.  The output
current is soft-limited by the available bias, i_load = I_lin tanh(i* / I_lin) with
I_lin = beta * i_bias_total, and mirrored differentially to the comparator:
i_comp+- = +-(i_load / 2) * mirror_ratio + I_cm.

The pre-saturation adaptive bias watches a peak estimate of the load current and adds bias in
steps of i_adp_step whenever the estimate crosses (i_bias_total - i_limit).  Bias changes happen
only at threshold crossings; between crossings the bias is constant.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from tdzsim.models.common.exceptions import ConfigurationError, ShortCircuitError
from tdzsim.models.sigsynth.analysis import thd
from tdzsim.models.sigsynth.waveform import Waveform

logger = logging.getLogger('tdzsim')

MIRROR_STEPS = (1, 5, 10, 15, 25)


@dataclass
class DriverSpec:
    """ Configuration of the TC voltage driver

    Params:
        i_bias_q         - quiescent bias current [A]
        i_limit          - margin below the bias at which the adaptive loop engages [A]
        i_adp_step       - bias added per engage step [A]
        adp_max_steps    - maximum number of engaged steps
        hysteresis       - disengage hysteresis [A]; None means i_adp_step / 2
        adaptive_enabled - enable the pre-saturation adaptive bias
        mirror_ratio     - current mirror gain towards the comparator
        mirror_steps     - the programmable mirror ratios
        beta             - linear output-current capability per unit of bias current
        supply_v         - supply voltage [V]
        i_cm             - common-mode current of each mirror output [A]
        noise_sigma      - load-referred driver noise per sample [A]
    """
    i_bias_q: float = 74e-6
    i_limit: float = 24e-6
    i_adp_step: float = 49e-6
    adp_max_steps: int = 4
    hysteresis: Optional[float] = None
    adaptive_enabled: bool = True
    mirror_ratio: int = 1
    mirror_steps: Tuple[int, ...] = MIRROR_STEPS
    beta: float = 12.0
    supply_v: float = 1.2
    i_cm: float = 15.75e-6
    noise_sigma: float = 2e-9

    def __post_init__(self):
        self.mirror_steps = tuple(self.mirror_steps)
        if len(self.mirror_steps) != 5 or any(not 1 <= s <= 25 for s in self.mirror_steps):
            raise ConfigurationError(f"mirror_steps must be five ratios in 1..25, got {self.mirror_steps}")
        if self.mirror_ratio not in self.mirror_steps:
            raise ConfigurationError(f"mirror_ratio {self.mirror_ratio} is not one of {self.mirror_steps}")
        if not 0 <= self.i_limit < self.i_bias_q:
            raise ConfigurationError("i_limit must be non-negative and below i_bias_q")
        if not self.i_adp_step > 0:
            raise ConfigurationError("i_adp_step must be positive")
        if self.adp_max_steps < 0 or not self.beta > 0:
            raise ConfigurationError("adp_max_steps must be >= 0 and beta positive")

    @property
    def h(self):
        return self.i_adp_step / 2 if self.hysteresis is None else self.hysteresis

    def bias(self, steps):
        return self.i_bias_q + steps * self.i_adp_step

    def engage_threshold(self, steps):
        """ Peak estimate above which the loop adds a step while at `steps` """
        return self.bias(steps) - self.i_limit

    def steps_for(self, estimate):
        """ Smallest step count whose engage threshold is not below the estimate """
        needed = math.ceil((estimate - self.engage_threshold(0)) / self.i_adp_step)
        return int(min(self.adp_max_steps, max(0, needed)))


@dataclass
class DriverState:
    """ Adaptive-bias state

    Params:
        adaptive_engaged - whether any adaptive step is active
        i_bias_total     - present total bias [A]
        event_count      - number of bias changes so far
        steps            - number of engaged adaptive steps
    """
    adaptive_engaged: bool = False
    i_bias_total: float = 74e-6
    event_count: int = 0
    steps: int = 0

    @classmethod
    def idle(cls, spec):
        return cls(False, spec.i_bias_q, 0, 0)


def adaptive_bias_step(spec, state, i_mirror_peak_est):
    """ Apply one evaluation of the adaptive-bias rule to a peak estimate.

    Engages (adding as many steps as needed, up to the cap) when the estimate exceeds
    i_bias_total - i_limit; disengages down to the fitting step count when the estimate falls
    more than the hysteresis below the threshold of the next lower step.  Each change is one event.
    """
    if i_mirror_peak_est < 0:
        raise ConfigurationError("The peak estimate must be non-negative")
    if not spec.adaptive_enabled:
        return state
    steps = state.steps
    if steps < spec.adp_max_steps and i_mirror_peak_est > spec.engage_threshold(steps):
        new_steps = max(steps + 1, spec.steps_for(i_mirror_peak_est))
    elif steps > 0 and i_mirror_peak_est < spec.engage_threshold(steps - 1) - spec.h:
        new_steps = spec.steps_for(i_mirror_peak_est)
    else:
        return state
    return DriverState(new_steps > 0, spec.bias(new_steps), state.event_count + 1, new_steps)


def _admittance(z_load):
    """ 1 / Z, zero for an open (infinite) load """
    z_load = complex(z_load)
    if z_load == 0:
        raise ShortCircuitError("Load impedance is zero")
    if not math.isfinite(abs(z_load)):
        return 0j
    return 1 / z_load


def drive_sample(spec, state, v_in, z_load):
    """ Evaluate the driver for one input sample.

    v_in may be a real instantaneous voltage or the analytic (complex) sample of the excitation;
    the instantaneous ideal current is Re(v_in / z_load), which is the steady-state phasor
    response for reactive loads.
    """
    i_star = float(np.real(v_in * _admittance(z_load)))
    i_lin = spec.beta * state.i_bias_total
    i_load = i_lin * math.tanh(i_star / i_lin)
    half = i_load / 2 * spec.mirror_ratio
    new_state = adaptive_bias_step(spec, state, abs(i_star))
    return i_load, half + spec.i_cm, -half + spec.i_cm, new_state


@dataclass
class DriverResponse:
    """ Driver outputs over a sampled record

    Params:
        i_star      - ideal load current [A]
        i_load      - delivered (soft-limited) load current [A]
        i_plus      - positive mirror output [A]
        i_minus     - negative mirror output [A]
        bias        - total bias at every sample [A]
        events      - list of (sample index, steps after the change)
        final_state - DriverState after the last sample
    """
    i_star: np.ndarray
    i_load: np.ndarray
    i_plus: np.ndarray
    i_minus: np.ndarray
    bias: np.ndarray
    events: list = field(default_factory=list)
    final_state: DriverState = None

    @property
    def diff(self):
        return self.i_plus - self.i_minus

    @property
    def event_count(self):
        return len(self.events)

    def tail(self, n):
        """ The last n samples, e.g. to drop a settling period """
        return dataclasses.replace(self, i_star=self.i_star[-n:], i_load=self.i_load[-n:],
                                   i_plus=self.i_plus[-n:], i_minus=self.i_minus[-n:], bias=self.bias[-n:],
                                   events=[(i - (self.bias.size - n), s) for i, s in self.events
                                           if i >= self.bias.size - n])


def peak_estimate(i_star, window):
    """ Causal running maximum of |i*| over the last `window` samples """
    magnitude = np.abs(i_star)
    padded = np.concatenate([np.zeros(window - 1), magnitude])
    return sliding_window_view(padded, window).max(axis=1)


def drive_trace(spec, v_in, z_load, window, state=None, rng=None):
    """ Evaluate the driver over a record, running the adaptive bias on a per-period peak estimate.

    The state machine is event driven: the record is scanned for the next sample at which the
    estimate crosses the active engage or disengage threshold, and the bias only changes there.
    """
    y_load = _admittance(z_load)
    state = state or DriverState.idle(spec)
    i_star = np.real(np.asarray(v_in) * y_load)
    estimate = peak_estimate(i_star, window)
    n = i_star.size
    steps_trace = np.empty(n, dtype=np.int64)
    events = []
    pos = 0
    while pos < n:
        steps = state.steps
        up = spec.engage_threshold(steps) if spec.adaptive_enabled and steps < spec.adp_max_steps else np.inf
        down = spec.engage_threshold(steps - 1) - spec.h if spec.adaptive_enabled and steps > 0 else -np.inf
        crossings = np.flatnonzero((estimate[pos:] > up) | (estimate[pos:] < down))
        if crossings.size == 0:
            steps_trace[pos:] = steps
            break
        idx = pos + crossings[0]
        steps_trace[pos:idx] = steps
        state = adaptive_bias_step(spec, state, estimate[idx])
        events.append((idx, state.steps))
        steps_trace[idx] = state.steps
        pos = idx + 1
    bias = spec.bias(steps_trace)
    i_lin = spec.beta * bias
    i_load = i_lin * np.tanh(i_star / i_lin)
    if rng is not None and spec.noise_sigma > 0:
        i_load = i_load + rng.normal(0.0, spec.noise_sigma, n)
    half = i_load / 2 * spec.mirror_ratio
    return DriverResponse(i_star, i_load, half + spec.i_cm, -half + spec.i_cm, bias, events, state)


def driver_power(spec, state_trace):
    """ Supply power averaged over a bias trace.

    The driver is class A: the delivered load current is drawn from the bias branch, so only the
    total bias is accounted.
    """
    if isinstance(state_trace, DriverResponse):
        bias = state_trace.bias
    elif isinstance(state_trace, DriverState):
        bias = np.array([state_trace.i_bias_total])
    else:
        bias = np.asarray([s.i_bias_total if isinstance(s, DriverState) else s for s in state_trace], dtype=float)
    return float(spec.supply_v * np.mean(bias))


def sine_drive(spec, amplitude, periods=2, samples_per_period=256):
    """ Drive a pure load-current sine of the given peak amplitude through a 1 Ohm load """
    t = np.arange(periods * samples_per_period) / samples_per_period
    v_in = amplitude * np.sin(2 * np.pi * t)
    return drive_trace(spec, v_in, 1.0, samples_per_period)


def load_current_thd(spec, amplitude, samples_per_period=256):
    """ THD of the delivered current over the last (settled) period """
    response = sine_drive(spec, amplitude, 2, samples_per_period)
    w = Waveform(response.i_load[-samples_per_period:], samples_per_period, 'A', 1.0)
    return thd(w)


def linear_range(spec, adaptive=True, thd_limit=0.01, rel_tol=1e-4):
    """ Largest load-current amplitude whose THD stays within thd_limit """
    if not 0 < thd_limit <= 0.2:
        raise ConfigurationError(f"thd_limit must be in (0, 0.2], got {thd_limit}")
    spec = dataclasses.replace(spec, adaptive_enabled=adaptive)
    lo, hi = 0.0, 1e-6
    # grow geometrically until the limit is first exceeded
    for _ in range(200):
        if load_current_thd(spec, hi) > thd_limit:
            break
        lo, hi = hi, hi * 1.25
    while hi - lo > rel_tol * hi:
        mid = (lo + hi) / 2
        if load_current_thd(spec, mid) > thd_limit:
            hi = mid
        else:
            lo = mid
    return lo


def thd_sweep(spec, amplitudes, adaptive=True):
    """ Rows of (amplitude_A, thd_ratio, adaptive_flag) """
    spec = dataclasses.replace(spec, adaptive_enabled=adaptive)
    return [(float(a), load_current_thd(spec, a), bool(adaptive)) for a in amplitudes]
