"""
Pressure maps from reconstructed resistances, and synthetic insole frames for the gait phases.
"""

import numpy as np

from tdzsim.models.common.exceptions import ConfigurationError
from tdzsim.models.crossbar.grid import DEFAULT_COLS, DEFAULT_ROWS, SensorGrid

R_REF = 20.0
R_UNLOADED = 500e3

# columns run from heel (0) to toes; fractions of the foot length
HEEL = (0.0, 0.33)
MIDFOOT = (0.33, 0.6)
FOREFOOT = (0.6, 1.0)

FIXTURES = {
    # name -> (regions, pressure level)
    'single_leg_neutral': ((HEEL, MIDFOOT, FOREFOOT), 1.0),
    'double_leg_neutral': ((HEEL, MIDFOOT, FOREFOOT), 0.5),
    'forefoot': ((FOREFOOT,), 1.0),
    'rearfoot': ((HEEL,), 1.0),
}


def resistive_transfer(r_ref=R_REF):
    """ p = r_ref / R, strictly decreasing in R """
    return lambda r: r_ref / np.asarray(r, dtype=float)


def pressure_map(estimate, transfer=None):
    """ Apply a strictly decreasing transfer element-wise and normalize to [0, 1] by the maximum """
    transfer = transfer or resistive_transfer()
    estimate = np.asarray(estimate, dtype=float)
    values = np.unique(estimate)
    if values.size > 1 and np.any(np.diff(transfer(values)) >= 0):
        raise ConfigurationError("The pressure transfer must be strictly decreasing in resistance")
    p = np.asarray(transfer(estimate), dtype=float)
    if p.min() < 0:
        p = p - p.min()
    peak = p.max()
    if peak <= 0:
        return np.zeros_like(p)
    return p / peak


def foot_outline(rows=DEFAULT_ROWS, cols=DEFAULT_COLS):
    """ Boolean insole outline: narrow at the heel and the arch, widest across the ball of the foot """
    u = (np.arange(cols) + 0.5) / cols
    half_width = 0.30 + 0.12 * np.exp(-((u - 0.72) / 0.18) ** 2) - 0.08 * np.exp(-((u - 0.45) / 0.1) ** 2)
    v = (np.arange(rows) + 0.5) / rows - 0.5
    return np.abs(v)[:, None] <= half_width[None, :]


def fixture_mask(name, rows=DEFAULT_ROWS, cols=DEFAULT_COLS):
    """ Loaded sensors of a gait fixture """
    if name not in FIXTURES:
        raise ConfigurationError(f"Unknown fixture {name!r}; must be one of {', '.join(FIXTURES)}")
    regions, _ = FIXTURES[name]
    u = (np.arange(cols) + 0.5) / cols
    along = np.zeros(cols, dtype=bool)
    for lo, hi in regions:
        along |= (u >= lo) & (u < hi)
    return foot_outline(rows, cols) & along[None, :]


def gait_fixture(name, rows=DEFAULT_ROWS, cols=DEFAULT_COLS, r_ref=R_REF, r_unloaded=R_UNLOADED, **grid_kwargs):
    """ SensorGrid of a gait phase; loaded sensors read between 0.6 and 1 of the fixture's pressure level """
    mask = fixture_mask(name, rows, cols)
    _, level = FIXTURES[name]
    v = (np.arange(rows) + 0.5) / rows - 0.5
    u = (np.arange(cols) + 0.5) / cols
    # smooth profile peaking at 1 in the middle of the insole
    profile = 0.6 + 0.4 * np.exp(-(v[:, None] / 0.3) ** 2 - ((u[None, :] - 0.5) / 0.6) ** 2)
    r = np.where(mask, r_ref / (level * profile), r_unloaded)
    return SensorGrid(r, **grid_kwargs)
