"""
The sensor grid scanned by the chip and the termination of its unselected lines
"""

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from tdzsim.models.common.exceptions import ConfigurationError

DEFAULT_ROWS = 11
DEFAULT_COLS = 23


class TerminationPolicy(Enum):
    """ What the MUX does with the lines that are not selected """
    FLOATING = 'floating'
    GROUNDED = 'grounded'
    DRIVEN_GUARD = 'driven_guard'

    @classmethod
    def from_name(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(name)
        except ValueError:
            raise ConfigurationError(f"Unknown termination policy {name!r}; must be one of "
                                     f"{', '.join(p.value for p in cls)}")


@dataclass
class SensorGrid:
    """ Rows x cols of piezo-resistive elements, element (i, j) joining row line i and column line j

    Params:
        r         - element resistances [Ohm]; inf marks a missing element
        c_par     - parallel capacitance of every element [F], or None
        mux_r_on  - on-resistance of the MUX switch on each selected line [Ohm]
        line_cap  - capacitance of every line to ground [F]
    """
    r: np.ndarray
    c_par: Optional[np.ndarray] = None
    mux_r_on: float = 50.0
    line_cap: float = 0.0

    def __post_init__(self):
        self.r = np.array(self.r, dtype=float, ndmin=2)
        if self.r.ndim != 2 or self.r.size < 1:
            raise ConfigurationError(f"Grid resistances must be a non-empty matrix, got shape {self.r.shape}")
        if np.any(np.isnan(self.r)) or np.any(self.r <= 0):
            raise ConfigurationError("All element resistances must be positive")
        if self.c_par is not None:
            self.c_par = np.array(self.c_par, dtype=float, ndmin=2)
            if self.c_par.shape != self.r.shape:
                raise ConfigurationError(f"Capacitance shape {self.c_par.shape} does not match {self.r.shape}")
            if np.any(self.c_par < 0):
                raise ConfigurationError("Capacitances must be non-negative")
        if self.mux_r_on < 0 or self.line_cap < 0:
            raise ConfigurationError("mux_r_on and line_cap must be non-negative")

    @property
    def rows(self):
        return self.r.shape[0]

    @property
    def cols(self):
        return self.r.shape[1]

    @property
    def shape(self):
        return self.r.shape

    @property
    def n_sensors(self):
        return self.r.size

    def admittance(self, f):
        """ Element admittances 1/r + j 2 pi f c at frequency f """
        y = np.where(np.isinf(self.r), 0.0, 1.0 / self.r).astype(complex)
        if self.c_par is not None:
            y = y + 2j * np.pi * f * self.c_par
        return y

    def impedance(self, f):
        """ Element impedances at frequency f, inf for missing elements """
        y = self.admittance(f)
        with np.errstate(divide='ignore'):
            return np.where(y == 0, complex(np.inf), 1.0 / np.where(y == 0, 1.0, y))

    def with_r(self, r):
        return dataclasses.replace(self, r=r)

    def permuted(self, row_perm, col_perm):
        c = None if self.c_par is None else self.c_par[np.ix_(row_perm, col_perm)]
        return dataclasses.replace(self, r=self.r[np.ix_(row_perm, col_perm)], c_par=c)

    @classmethod
    def uniform(cls, rows, cols, r, **kwargs):
        return cls(np.full((rows, cols), float(r)), **kwargs)

    @classmethod
    def random_log_uniform(cls, rows, cols, r_lo, r_hi, rng, **kwargs):
        """ Elements drawn log-uniformly in [r_lo, r_hi] """
        r = np.exp(rng.uniform(np.log(r_lo), np.log(r_hi), size=(rows, cols)))
        return cls(r, **kwargs)
