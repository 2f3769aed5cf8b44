"""
Basic testing of the excitation path: DDS table, co-prime DAC with DEM, TI filter and THD
"""

import math

import numpy as np
import pytest

from tdzsim.models.common.exceptions import CodeRangeError, ConfigurationError, UndefinedTHDError
from tdzsim.models.sigsynth.analysis import spur_power, thd, ti_filter
from tdzsim.models.sigsynth.dac import CoPrimeDac, CoPrimeDacSpec, coprime_decode, coprime_encode, dac_output, \
    lut_to_dac_code
from tdzsim.models.sigsynth.dds import ExcitationSpec, dds_sample, dds_waveform, lut_codes, quarter_wave_lut
from tdzsim.models.sigsynth.generator import SineGenerator
from tdzsim.models.sigsynth.waveform import PeriodicSignal, Waveform
from tests import *

pytestmark = pytest.mark.sim


def sine_with_third(amplitude3, samples_per_period=64, periods=4):
    t = np.arange(samples_per_period * periods) / samples_per_period
    x = np.sin(2 * np.pi * t) + amplitude3 * np.sin(2 * np.pi * 3 * t)
    return Waveform(x, samples_per_period, 'V', 1.0)


def test_quarter_wave_table():
    lut = quarter_wave_lut(256)
    assert lut[0] == 0
    assert lut[-1] == 1023
    assert np.all(np.diff(lut) >= 0)


def test_dds_quadrants():
    spec = ExcitationSpec()
    assert spec.ticks_per_period == N0_TICKS
    assert dds_sample(spec, 0) == 0.0
    assert dds_sample(spec, N0_TICKS // 4) == pytest.approx(0.5)
    assert dds_sample(spec, 3 * N0_TICKS // 4) == pytest.approx(-0.5)
    codes = lut_codes(spec, np.arange(2 * N0_TICKS))
    assert np.array_equal(codes[:N0_TICKS], codes[N0_TICKS:])


def test_dds_waveform_amplitude_scales_with_code():
    full = dds_waveform(ExcitationSpec(amp_code=64))
    half = dds_waveform(ExcitationSpec(amp_code=32))
    assert np.max(full.samples) == pytest.approx(0.5)
    assert np.allclose(half.samples, full.samples / 2)


def test_dds_negative_tick():
    with pytest.raises(ConfigurationError):
        dds_sample(ExcitationSpec(), -1)


@pytest.mark.parametrize('kwargs', [
    dict(f_exc=125e3, f_clk=64.1e6),
    dict(f_exc=2e6),
    dict(f_exc=100e3),
    dict(amp_code=0),
    dict(amp_code=65),
])
def test_excitation_spec_rejects(kwargs):
    with pytest.raises(ConfigurationError):
        ExcitationSpec(**kwargs)


def test_test_mode_allows_zero_amplitude():
    spec = ExcitationSpec(amp_code=0, test_mode=True)
    assert dds_sample(spec, N0_TICKS // 4) == 0.0


def test_coprime_encoding():
    spec = CoPrimeDacSpec()
    assert spec.n_levels == 16 * 17
    assert coprime_encode(0) == (0, 0)
    assert coprime_encode(spec.max_code) == (15, 16)
    for code in (1, 16, 17, 100, 200):
        assert coprime_decode(*coprime_encode(code)) == code


@pytest.mark.parametrize('code', [-1, 272, 3.5])
def test_coprime_encoding_range(code):
    with pytest.raises(CodeRangeError):
        coprime_encode(code)
    with pytest.raises(ValueError):
        coprime_encode(code)


def test_matched_dac_is_exact():
    spec = CoPrimeDacSpec(unit_mismatch_sigma=0.0)
    assert dac_output(spec, 100) == pytest.approx(100 * spec.i_unit)
    codes = lut_to_dac_code(lut_codes(ExcitationSpec(), np.arange(N0_TICKS)), spec)
    dac = CoPrimeDac(spec)
    assert np.allclose(dac.convert(codes), dac.nominal(codes))


def test_dem_uses_every_unit_equally():
    spec = CoPrimeDacSpec(unit_mismatch_sigma=0.01, dem_enabled=True)
    dac = CoPrimeDac(spec, mismatch_seed=3)
    codes = lut_to_dac_code(lut_codes(ExcitationSpec(), np.arange(4 * N0_TICKS)), spec)
    dac.convert(codes)
    assert dac.fine.usage.max() - dac.fine.usage.min() <= 1
    assert dac.coarse.usage.max() - dac.coarse.usage.min() <= 1


def mismatch_spurs(dem_enabled, seed, periods=8):
    excitation = ExcitationSpec()
    spec = CoPrimeDacSpec(unit_mismatch_sigma=0.01, dem_enabled=dem_enabled)
    codes = lut_to_dac_code(lut_codes(excitation, np.arange(periods * N0_TICKS)), spec)
    dac = CoPrimeDac(spec, mismatch_seed=seed)
    error = dac.convert(codes) - dac.nominal(codes)
    return spur_power(Waveform(error - error.mean(), excitation.f_clk, 'A', excitation.f_exc))


def test_dem_lowers_harmonic_spurs():
    for seed in range(20):
        assert mismatch_spurs(True, seed) < mismatch_spurs(False, seed)


def test_thd_of_known_harmonic():
    assert thd(sine_with_third(0.1)) == pytest.approx(0.1, rel=1e-9)
    assert thd(sine_with_third(0.0)) < 1e-12


def test_thd_undefined_without_fundamental():
    with pytest.raises(UndefinedTHDError):
        thd(Waveform(np.zeros(256), 64, 'V', 1.0))


def test_ti_filter_attenuates_harmonics():
    filtered = ti_filter(sine_with_third(0.1), cutoff=2.0)
    assert thd(filtered) == pytest.approx(0.1 / abs(1 + 1.5j), rel=1e-6)
    assert abs(np.mean(filtered.samples)) < 1e-12
    with pytest.raises(ConfigurationError):
        ti_filter(sine_with_third(0.1), cutoff=0.5)


def test_waveform_needs_whole_periods():
    w = Waveform(np.zeros(100), 64, 'V', 1.0)
    with pytest.raises(ConfigurationError):
        w.n_periods


def test_periodic_signal_reproduces_samples():
    w = sine_with_third(0.2)
    signal = PeriodicSignal.from_waveform(w)
    assert np.allclose(signal(w.times), w.samples)
    assert signal.amplitude == pytest.approx(1.0)
    assert signal.sine_phase == pytest.approx(0.0, abs=1e-12)


def test_generator_amplitude():
    generator = SineGenerator(ExcitationSpec(), CoPrimeDacSpec(unit_mismatch_sigma=0.005), chip_seed=0)
    full = generator.signal(64)
    assert full.amplitude == pytest.approx(0.5, rel=0.01)
    assert generator.signal(32).amplitude == pytest.approx(full.amplitude / 2)
    assert generator.signal(64) is full
