"""
Auto-ranging: choose amplitude code, mirror ratio and offset code for a load.

A ladder of trial settings is walked from high to low gain until one gives usable counts; the
trial's |Z| estimate then selects the setting that puts the duty near d_target with the largest
threshold available.  The targeted measurement is retried at most max_retries times, lowering the
threshold on low saturation and lowering the gain when the duty is too high.
"""

import logging
import math
from dataclasses import dataclass, replace

from tdzsim.models.sigsynth.dds import AMP_CODE_MAX, FULL_SCALE_VPP
from tdzsim.models.tdreadout.readout import OFFSET_CODE_MAX
from tdzsim.pipeline._constants import GAIN_FLOOR, OPEN_CIRCUIT, SHORT_CIRCUIT

logger = logging.getLogger('tdzsim')


@dataclass(frozen=True)
class RangeSetting:
    """ Gain setting of one measurement

    Params:
        amp_code      - excitation amplitude code
        mirror_ratio  - driver mirror ratio
        offset_code_p - positive-side offset DAC code
        offset_code_n - negative-side offset DAC code
    """
    amp_code: int
    mirror_ratio: int
    offset_code_p: int = 0
    offset_code_n: int = 48

    def i_th(self, offset_lsb):
        return (self.offset_code_n - self.offset_code_p) * offset_lsb

    def v_peak(self):
        return FULL_SCALE_VPP * self.amp_code / AMP_CODE_MAX / 2


# successive gains (ratio * v_peak / I_th) differ by about 25x at most, so their usable windows overlap
TRIAL_LADDER = (
    RangeSetting(64, 25, 0, 1),
    RangeSetting(64, 25, 0, 16),
    RangeSetting(64, 1, 0, 10),
    RangeSetting(16, 1, 0, 63),
    RangeSetting(1, 1, 0, 63),
)


@dataclass
class AutoRangePolicy:
    """ Auto-ranging parameters

    Params:
        d_target     - duty aimed at by the targeted setting
        d_max        - largest duty accepted without retry
        d_trial_max  - largest duty a trial may have to give a |Z| estimate
        max_retries  - retries of the targeted measurement
        ladder       - trial settings from high to low gain
    """
    d_target: float = 0.1
    d_max: float = 0.45
    d_trial_max: float = 0.49
    max_retries: int = 3
    ladder: tuple = TRIAL_LADDER

    def target_setting(self, z_abs, mirror_steps, offset_lsb):
        """ Setting that brings the differential amplitude to I_th,max / cos(pi d_target). """
        i_target = OFFSET_CODE_MAX * offset_lsb / math.cos(math.pi * self.d_target)
        full_peak = FULL_SCALE_VPP / 2
        chosen = None
        for ratio in sorted(mirror_steps):
            amp = i_target * z_abs * AMP_CODE_MAX / (full_peak * ratio)
            if amp <= AMP_CODE_MAX:
                chosen = (max(1, int(round(amp))), ratio)
                break
        if chosen is None:
            chosen = (AMP_CODE_MAX, max(mirror_steps))
        amp, ratio = chosen
        i_pred = ratio * full_peak * amp / AMP_CODE_MAX / z_abs
        code = int(round(i_pred * math.cos(math.pi * self.d_target) / offset_lsb))
        return RangeSetting(amp, ratio, 0, min(OFFSET_CODE_MAX, max(1, code)))

    def reduce_gain(self, setting, mirror_steps):
        """ Halve the effective gain, or return None at the gain floor """
        code = setting.offset_code_n - setting.offset_code_p
        if code < OFFSET_CODE_MAX:
            return replace(setting, offset_code_p=0, offset_code_n=min(OFFSET_CODE_MAX, 2 * code))
        if setting.amp_code > 1:
            return replace(setting, amp_code=max(1, setting.amp_code // 2))
        lower = [r for r in sorted(mirror_steps) if r < setting.mirror_ratio]
        if lower:
            return replace(setting, mirror_ratio=lower[-1])
        return None

    def lower_threshold(self, setting):
        code = setting.offset_code_n - setting.offset_code_p
        if code <= 1:
            return None
        return replace(setting, offset_code_p=0, offset_code_n=max(1, code // 2))


def _usable(measurement, d_limit):
    c = measurement.counts
    return c is not None and not c.saturated and measurement.z is not None and c.duty <= d_limit


def autorange(measure_once, policy, mirror_steps, offset_lsb):
    """ Run the trial ladder and the targeted measurement.

    measure_once(setting) runs one conversion and returns a Measurement whose counts are always
    set unless the driver could not run (short circuit).  Returns the final Measurement with
    `attempts` and `retries` filled in.
    """
    attempts = 0
    estimate = None
    trial = None
    for i, setting in enumerate(policy.ladder):
        trial = measure_once(setting)
        attempts += 1
        if SHORT_CIRCUIT in trial.flags:
            trial.attempts = attempts
            return trial
        if trial.counts.n1 == 0 and i == 0:
            # no pulse even at the highest gain
            trial.flags.add(OPEN_CIRCUIT)
            trial.attempts = attempts
            return trial
        if _usable(trial, policy.d_trial_max):
            estimate = abs(trial.z)
            break
    if estimate is None:
        if trial.z is None:
            trial.flags.add(GAIN_FLOOR)
            trial.attempts = attempts
            return trial
        estimate = abs(trial.z)
    logger.debug(f"Auto-range trial {trial.setting} estimated |Z| = {estimate:.6g} Ohm")

    setting = policy.target_setting(estimate, mirror_steps, offset_lsb)
    retries = 0
    while True:
        m = measure_once(setting)
        attempts += 1
        c = m.counts
        if c.n1 == 0:
            next_setting = policy.lower_threshold(setting)
        elif c.saturated or m.z is None or c.duty > policy.d_max:
            next_setting = policy.reduce_gain(setting, mirror_steps)
            if next_setting is None:
                m.flags.add(GAIN_FLOOR)
        else:
            next_setting = None
        if next_setting is None or retries >= policy.max_retries:
            break
        logger.info(f"Auto-range retry {retries + 1}: counts {c.n1}/{c.n0} with {setting}, trying {next_setting}")
        setting = next_setting
        retries += 1
    if m.z is not None and m.counts.duty > policy.d_max:
        m.flags.add(GAIN_FLOOR)
    m.attempts = attempts
    m.retries = retries
    return m
