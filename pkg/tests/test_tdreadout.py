"""
Basic testing of the T-D readout: interleaved sampling, counts, demodulation and auto-ranging
"""

import math

import numpy as np
import pytest

from tdzsim.models.common.exceptions import ConfigurationError, InconsistentCountsError, OpenCircuitError, \
    OutOfRangeError
from tdzsim.models.common.utils import derive_rng, wrap_phase
from tdzsim.models.tdreadout.autorange import TRIAL_LADDER, AutoRangePolicy, RangeSetting
from tdzsim.models.tdreadout.demod import Phasor, demodulate, quantization_bounds, to_impedance
from tdzsim.models.tdreadout.readout import ReadoutSpec, TdCounts, bits_rows, counts_rows, extract_counts, \
    interleaved_times, merge_bits, readout_power, sample_bits, sample_times
from tests import *

pytestmark = pytest.mark.sim

NOISELESS_READOUT = ReadoutSpec(noise_sigma=0.0)
MIRROR_STEPS = (1, 5, 10, 15, 25)
OFFSET_LSB = 0.5e-6


def sinusoid(i_m, theta):
    return lambda t: i_m * np.sin(2 * np.pi * F_EXC * t + theta)


def oracle_counts(i_m, theta, i_th, n0=N0_EFFECTIVE, oversample=64):
    """ Duty and pulse centre of the sinusoid found on a dense grid """
    t = (np.arange(n0 * oversample) + 0.5) / (n0 * oversample) / F_EXC
    high = sinusoid(i_m, theta)(t) > i_th
    duty = high.mean()
    angles = 2 * np.pi * F_EXC * t[high]
    centre = np.angle(np.mean(np.exp(1j * angles)))
    return duty, centre


def test_sample_grid():
    times = sample_times(NOISELESS_READOUT, F_EXC)
    assert times.shape == (PHASES, N0_TICKS)
    # cycle m is shifted by m / phases of a tick
    shifts = (times[:, 0] * F_CLK) - np.arange(PHASES) * N0_TICKS
    assert np.allclose(shifts, np.arange(PHASES) / PHASES)
    with pytest.raises(ConfigurationError):
        interleaved_times(F_CLK, 123e3, PHASES, PHASES)


def test_readout_spec_rejects():
    with pytest.raises(ConfigurationError):
        ReadoutSpec(cycles_per_meas=4)
    with pytest.raises(ConfigurationError):
        ReadoutSpec(offset_code_n=64)
    with pytest.raises(ConfigurationError):
        ReadoutSpec(merge='median')


def test_threshold_and_power():
    spec = ReadoutSpec()
    assert spec.i_th == pytest.approx(24e-6)
    assert spec.n0(F_EXC) == N0_EFFECTIVE
    assert spec.conversion_time(F_EXC) == pytest.approx(T_MEAS)
    assert readout_power(spec) == pytest.approx(READOUT_POWER)
    ungated = ReadoutSpec(clock_gating=False)
    assert readout_power(ungated) == pytest.approx(4 * READOUT_POWER)


def test_merge_places_phases_between_ticks():
    spec = ReadoutSpec(cycles_per_meas=12)
    bits = np.zeros((12, 4), dtype=bool)
    # phase 2 of tick 1 high in both repeats, phase 3 of tick 1 high in one repeat only
    bits[2, 1] = bits[8, 1] = True
    bits[3, 1] = True
    merged, votes = merge_bits(bits, spec)
    assert merged.size == 6 * 4
    assert merged[1 * 6 + 2]
    # ties resolve high
    assert merged[1 * 6 + 3]
    assert votes[1 * 6 + 2] == 2
    assert merged.sum() == 2


def test_saturated_counts():
    spec = NOISELESS_READOUT
    always = sample_bits(spec, sinusoid(10e-6, 0.0), F_EXC) | True
    counts = extract_counts(always, spec)
    assert counts.saturated
    never = sample_bits(spec, sinusoid(10e-6, 0.0), F_EXC)
    counts = extract_counts(never, spec)
    assert counts.saturated and counts.n1 == 0
    with pytest.raises(OutOfRangeError):
        demodulate(counts, spec.i_th)


def test_inconsistent_counts():
    with pytest.raises(InconsistentCountsError):
        demodulate(TdCounts(N0_EFFECTIVE, N0_EFFECTIVE // 2 + 10, 0), 24e-6)
    with pytest.raises(InconsistentCountsError):
        demodulate(TdCounts(N0_EFFECTIVE, 100, 0), -24e-6)


def test_demodulation_round_trip():
    spec = NOISELESS_READOUT
    rng = derive_rng(TEST_SEED, 4)
    failures = 0
    for _ in range(1000):
        i_m = spec.i_th * math.exp(rng.uniform(math.log(1.05), math.log(20.0)))
        theta = rng.uniform(-math.pi, math.pi)
        counts = extract_counts(sample_bits(spec, sinusoid(i_m, theta), F_EXC), spec)
        phasor = demodulate(counts, spec.i_th)
        duty, centre = oracle_counts(i_m, theta, spec.i_th)
        mag_bound, phase_bound = quantization_bounds(duty, counts.n0)
        # the pulse is centred on the sine peak
        oracle_theta = wrap_phase(math.pi / 2 - centre)
        if rel_err(phasor.i_m, i_m) > mag_bound or abs(wrap_phase(phasor.theta - oracle_theta)) > phase_bound:
            failures += 1
    assert failures == 0


def test_demodulation_with_negative_threshold():
    spec = ReadoutSpec(noise_sigma=0.0, offset_code_p=20, offset_code_n=0)
    i_m, theta = 20e-6, 0.7
    counts = extract_counts(sample_bits(spec, sinusoid(i_m, theta), F_EXC), spec)
    assert counts.duty > 0.5
    phasor = demodulate(counts, spec.i_th)
    assert rel_err(phasor.i_m, i_m) < 0.01
    assert abs(wrap_phase(phasor.theta - theta)) < 0.01


def test_majority_and_sum_agree_without_noise():
    i_m, theta = 30e-6, -1.2
    majority = ReadoutSpec(noise_sigma=0.0, cycles_per_meas=12)
    summed = ReadoutSpec(noise_sigma=0.0, cycles_per_meas=12, merge='sum')
    bits = sample_bits(majority, sinusoid(i_m, theta), F_EXC)
    assert extract_counts(bits, majority).n1 == extract_counts(bits, summed).n1


def test_phasor_and_impedance():
    p = Phasor(1e-5, 2.5 * math.pi)
    assert p.theta == pytest.approx(math.pi / 2)
    z = to_impedance(Phasor(25e-6, 0.4), 0.5, 1, theta_ref=0.4)
    assert z.real == pytest.approx(20e3)
    assert z.imag == pytest.approx(0.0, abs=1e-9)
    # a lagging current is a capacitive load
    z = to_impedance(Phasor(25e-6, 0.5), 0.5, 1, theta_ref=0.4)
    assert z.imag < 0
    with pytest.raises(OpenCircuitError):
        to_impedance(Phasor(0.0, 0.0), 0.5, 1)
    with pytest.raises(ConfigurationError):
        Phasor(-1.0, 0.0)


def test_export_rows():
    counts = [TdCounts(N0_EFFECTIVE, 100, 5), TdCounts(N0_EFFECTIVE, 200, 6)]
    assert counts_rows(counts) == [(N0_EFFECTIVE, 100, 5), (N0_EFFECTIVE, 200, 6)]
    bits = np.zeros((PHASES, 4), dtype=bool)
    bits[1, 2] = True
    rows = bits_rows(bits, NOISELESS_READOUT)
    assert len(rows) == PHASES * 4
    assert (1, 1, 2, 1) in rows


def test_target_setting():
    policy = AutoRangePolicy()
    setting = policy.target_setting(WAVEFORM_LOAD, MIRROR_STEPS, OFFSET_LSB)
    assert setting == RangeSetting(64, 1, 0, 63)
    # a large load needs the highest mirror ratio
    setting = policy.target_setting(SWEEP_R_MAX, MIRROR_STEPS, OFFSET_LSB)
    assert setting.mirror_ratio == 25 and setting.amp_code == 64


def test_gain_reduction_reaches_the_floor():
    policy = AutoRangePolicy()
    setting = RangeSetting(1, 1, 0, 63)
    assert policy.reduce_gain(setting, MIRROR_STEPS) is None
    assert policy.reduce_gain(RangeSetting(64, 1, 0, 20), MIRROR_STEPS).offset_code_n == 40
    assert policy.reduce_gain(RangeSetting(64, 5, 0, 63), MIRROR_STEPS).amp_code == 32
    assert policy.lower_threshold(RangeSetting(64, 1, 0, 1)) is None


def test_trial_ladder_descends_in_gain():
    gains = [s.mirror_ratio * s.v_peak() / s.i_th(OFFSET_LSB) for s in TRIAL_LADDER]
    assert all(a > b for a, b in zip(gains, gains[1:]))
    assert all(a / b < 26 for a, b in zip(gains, gains[1:]))


def true_duty(i_m, i_th):
    return math.acos(i_th / i_m) / math.pi


def test_n1_grows_with_amplitude():
    spec = NOISELESS_READOUT
    n1 = [extract_counts(sample_bits(spec, sinusoid(a * spec.i_th, 0.3), F_EXC), spec).n1
          for a in np.linspace(1.05, 20.0, 40)]
    assert all(b >= a for a, b in zip(n1, n1[1:]))


def test_interleaving_refines_the_duty():
    single = ReadoutSpec(noise_sigma=0.0, phases=1)
    assert single.n0(F_EXC) == N0_TICKS
    assert NOISELESS_READOUT.n0(F_EXC) == N0_EFFECTIVE
    amplitudes = np.linspace(2.0, 2.2, 200) * NOISELESS_READOUT.i_th
    errors, levels = {}, {}
    for spec in (single, NOISELESS_READOUT):
        duties = [extract_counts(sample_bits(spec, sinusoid(i_m, 0.37), F_EXC), spec).duty for i_m in amplitudes]
        errors[spec.phases] = max(abs(d - true_duty(i_m, spec.i_th)) for d, i_m in zip(duties, amplitudes))
        levels[spec.phases] = len(set(duties))
    assert errors[PHASES] <= 1 / N0_EFFECTIVE + 1e-12
    assert 1 / N0_EFFECTIVE < errors[1] <= 1 / N0_TICKS + 1e-12
    assert levels[PHASES] > 3 * levels[1]


def test_negated_input_and_threshold():
    spec = NOISELESS_READOUT
    flipped = ReadoutSpec(noise_sigma=0.0, offset_code_p=spec.offset_code_n, offset_code_n=spec.offset_code_p)
    assert flipped.i_th == -spec.i_th
    i_m, theta = 60e-6, 0.9
    counts = extract_counts(sample_bits(spec, sinusoid(i_m, theta), F_EXC), spec)
    negated = sinusoid(-i_m, theta)
    flipped_counts = extract_counts(sample_bits(flipped, negated, F_EXC), flipped)
    # the comparator reports the complementary pulse
    assert flipped_counts.n1 == counts.n0 - counts.n1
    phasor = demodulate(counts, spec.i_th)
    flipped_phasor = demodulate(flipped_counts, flipped.i_th)
    assert flipped_phasor.i_m == pytest.approx(phasor.i_m, rel=1e-9)
    assert abs(wrap_phase(flipped_phasor.theta - phasor.theta - math.pi)) < 1e-9


@pytest.mark.parametrize('c_par', [0.0, 5e-12, 20e-12, 50e-12])
def test_parallel_capacitance_keeps_the_resistance(c_par):
    spec = ReadoutSpec(noise_sigma=0.0, offset_code_n=44)
    r, v_m = 20e3, 0.5
    y = 1 / r + 2j * math.pi * F_EXC * c_par
    counts = extract_counts(sample_bits(spec, sinusoid(v_m * abs(y), np.angle(y)), F_EXC), spec)
    z = to_impedance(demodulate(counts, spec.i_th), v_m, 1)
    assert 1 / (1 / z).real == pytest.approx(r, rel=0.01)
    if c_par > 0:
        assert np.angle(z) < -0.01
