"""
Spectral helpers: behavioral transimpedance filter, harmonic projections and THD
"""

import logging

import numpy as np

from tdzsim.models.common.exceptions import ConfigurationError, UndefinedTHDError

logger = logging.getLogger('tdzsim')

DEFAULT_HARMONICS = 10


def ti_filter(w, cutoff=None):
    """ DC block plus single-pole low-pass, normalized to unity gain at the fundamental.

    The response H(f) = 1 / (1 + j f / cutoff) is applied to every bin except DC (removed) and the
    fundamental bin (passed unchanged), so harmonics are attenuated by |H(k f0)| relative to the
    fundamental.
    """
    periods = w.n_periods
    cutoff = 2 * w.f0 if cutoff is None else cutoff
    if cutoff <= w.f0:
        raise ConfigurationError(f"TI filter cutoff {cutoff:g} Hz must exceed the fundamental {w.f0:g} Hz")
    spectrum = np.fft.rfft(w.samples)
    freqs = np.fft.rfftfreq(w.samples.size, d=1.0 / w.rate)
    response = 1.0 / (1.0 + 1j * freqs / cutoff)
    response[0] = 0.0
    response[periods] = 1.0
    return w.with_samples(np.fft.irfft(spectrum * response, n=w.samples.size))


def harmonic_amplitudes(w, n_harmonics=DEFAULT_HARMONICS):
    """ Peak amplitudes A_1..A_n from single-bin projections at multiples of the fundamental.

    Harmonics at or above Nyquist are dropped.
    """
    periods = w.n_periods
    n = w.samples.size
    bins = periods * np.arange(1, n_harmonics + 1)
    bins = bins[bins < n / 2]
    # every bin of the real FFT is the single-bin projection at that frequency
    spectrum = np.fft.rfft(w.samples)
    return 2.0 * np.abs(spectrum[bins]) / n


def thd(w, n_harmonics=DEFAULT_HARMONICS):
    """ sqrt(sum_{k=2..n} A_k^2) / A_1 """
    if n_harmonics < 2:
        raise ConfigurationError("n_harmonics must be at least 2")
    amplitudes = harmonic_amplitudes(w, n_harmonics)
    fundamental = amplitudes[0] if amplitudes.size else 0.0
    scale = np.max(np.abs(w.samples))
    if fundamental == 0.0 or fundamental <= 1e-14 * scale:
        raise UndefinedTHDError("THD is undefined for a waveform without a fundamental component")
    return float(np.sqrt(np.sum(amplitudes[1:] ** 2)) / fundamental)


def spur_power(w, harmonics=range(2, 8)):
    """ Summed power of the listed harmonics (peak amplitude squared) """
    amplitudes = harmonic_amplitudes(w, max(harmonics))
    return float(sum(amplitudes[k - 1] ** 2 for k in harmonics if k - 1 < amplitudes.size))
