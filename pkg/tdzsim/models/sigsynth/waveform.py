"""
Sampled and band-limited periodic signals
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from tdzsim.models.common.exceptions import ConfigurationError


@dataclass
class Waveform:
    """ A uniformly sampled signal.

    Params:
        samples - sample values [V or A]
        rate    - samples per second [Hz]
        label   - unit tag, 'V' or 'A'
        f0      - fundamental frequency [Hz], needed for filtering and THD
    """
    samples: np.ndarray
    rate: float
    label: str = 'V'
    f0: Optional[float] = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ConfigurationError("Waveform samples must be a non-empty 1-D sequence")
        if not self.rate > 0:
            raise ConfigurationError(f"Waveform rate must be positive, got {self.rate}")

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size / self.rate

    @property
    def times(self):
        return np.arange(self.samples.size) / self.rate

    @property
    def n_periods(self):
        """ Number of whole fundamental periods in the record; raises if it is not an integer. """
        if self.f0 is None or not self.f0 > 0:
            raise ConfigurationError("Waveform has no fundamental frequency set")
        periods = self.samples.size * self.f0 / self.rate
        rounded = int(round(periods))
        if rounded < 1 or abs(periods - rounded) > 1e-9 * max(1.0, periods):
            raise ConfigurationError(f"Waveform holds {periods:.6g} periods of f0={self.f0:g} Hz, "
                                     f"an integer number of periods is required")
        return rounded

    def with_samples(self, samples):
        return Waveform(samples, self.rate, self.label, self.f0)


class PeriodicSignal:
    """ Band-limited periodic signal that can be evaluated at arbitrary times.

    Built from a waveform holding an integer number of fundamental periods; the Fourier series of
    the record is truncated at max_harmonic multiples of the fundamental.
    """

    def __init__(self, coefficients, record_length, f0):
        # coefficients[k] is the complex amplitude of exp(j*2*pi*k*t/record_length), k >= 0
        self._coefficients = np.asarray(coefficients, dtype=complex)
        self._record_length = record_length
        self._f0 = f0
        self._periods = int(round(record_length * f0))

    @classmethod
    def from_waveform(cls, w, max_harmonic=None):
        periods = w.n_periods
        spectrum = np.fft.rfft(w.samples) / w.samples.size
        coefficients = spectrum.copy()
        coefficients[1:] *= 2
        if w.samples.size % 2 == 0:
            # the Nyquist bin is not doubled
            coefficients[-1] = spectrum[-1]
        if max_harmonic is not None:
            coefficients = coefficients[:int(max_harmonic) * periods + 1]
        return cls(coefficients, w.duration, w.f0)

    @property
    def f0(self):
        return self._f0

    @property
    def fundamental(self):
        """ Complex amplitude c of the fundamental: x(t) ~ |c| cos(2 pi f0 t + angle(c)). """
        return self._coefficients[self._periods]

    @property
    def amplitude(self):
        """ Peak amplitude of the fundamental """
        return float(abs(self.fundamental))

    @property
    def sine_phase(self):
        """ Phase phi of the fundamental written as |c| sin(2 pi f0 t + phi) """
        return float(np.angle(self.fundamental) + np.pi / 2)

    def scaled(self, factor):
        return PeriodicSignal(self._coefficients * factor, self._record_length, self._f0)

    def analytic(self, t):
        """ Evaluate the analytic signal (DC plus positive-frequency terms) at times t. """
        t = np.asarray(t, dtype=float)
        k = np.arange(self._coefficients.size)
        phase = np.multiply.outer(t.ravel(), 2 * np.pi * k / self._record_length)
        values = np.exp(1j * phase) @ self._coefficients
        if t.ndim == 0:
            return complex(values[0])
        return values.reshape(t.shape)

    def __call__(self, t):
        return np.real(self.analytic(t))
