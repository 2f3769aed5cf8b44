"""
Utilities for testing
"""

import math

import numpy as np

from tdzsim.models.common.utils import derive_rng

# operating point
F_EXC = 125e3
F_CLK = 64e6
PHASES = 6
N0_TICKS = 512
N0_EFFECTIVE = PHASES * N0_TICKS
ROWS = 11
COLS = 23
N_SENSORS = ROWS * COLS
T_MEAS = 48e-6
FRAME_TIME = 12.144e-3

# published figures
PUBLISHED_FOM = {'rc-delay-1ch': 79.3, 'eit-td-208': 68.9, 'rc-72ch': 80.8, 'this-chip': 92.3}
PUBLISHED_ENOB = {'wireless-32ch': 11.4, 'rc-delay-1ch': 10.3, 'eit-td-208': 7.3, 'rc-72ch': 10.1,
                  'this-chip': 10.3}
TOTAL_POWER = 158e-6
READOUT_POWER = 28e-6
IDLE_DRIVER_POWER = 1.2 * 74e-6

FOM_TOL = 0.05
ENOB_TOL = 0.05

# loads
SWEEP_R_MIN = 20.0
SWEEP_R_MAX = 500e3
SWEEP_N_LOADS = 25
WAVEFORM_LOAD = 15e3

# chain without any random noise or mismatch
NOISELESS = {
    'frontend_noise_sigma': 0.0,
    'tdreadout_noise_sigma': 0.0,
    'sigsynth_mismatch_sigma': 0.0,
}

TEST_SEED = 1234


def rel_err(measured, true):
    return abs(measured - true) / abs(true)


def random_grids(n, rows, cols, r_lo, r_hi, seed=TEST_SEED):
    """ n log-uniform resistance matrices, one random stream per grid """
    return [np.exp(derive_rng(seed, k).uniform(math.log(r_lo), math.log(r_hi), size=(rows, cols)))
            for k in range(n)]
