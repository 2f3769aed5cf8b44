"""
Frame scan: every sensor is selected in turn and measured through the MUX
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from tdzsim.models.common.exceptions import ConfigurationError, NumericalSingularityError
from tdzsim.models.common.utils import resistance_from_impedance
from tdzsim.models.crossbar.grid import TerminationPolicy
from tdzsim.models.crossbar.nodal import equivalent_impedance, equivalent_impedance_matrix
from tdzsim.pipeline._constants import FAILURE_FLAGS, NUMERICAL_SINGULARITY

logger = logging.getLogger('tdzsim')

ACQUISITIONS = ('full-chain', 'ideal')
DEFAULT_T_MEAS = 48e-6


@dataclass
class ScanPlan:
    """ Order in which the sensors are visited

    Params:
        ordering - (row, col) of every sensor, in scan order
        t_meas   - seconds per measurement
    """
    ordering: List[Tuple[int, int]]
    t_meas: float = DEFAULT_T_MEAS

    def __post_init__(self):
        self.ordering = [(int(i), int(j)) for i, j in self.ordering]
        if len(set(self.ordering)) != len(self.ordering):
            raise ConfigurationError("A scan plan must visit every sensor exactly once")
        if not self.t_meas > 0:
            raise ConfigurationError("t_meas must be positive")

    @classmethod
    def row_major(cls, rows, cols, t_meas=DEFAULT_T_MEAS):
        return cls([(i, j) for i in range(rows) for j in range(cols)], t_meas)

    @property
    def n_sensors(self):
        return len(self.ordering)

    @property
    def frame_time(self):
        return self.n_sensors * self.t_meas

    @property
    def fps(self):
        return 1.0 / self.frame_time

    def check(self, grid):
        expected = {(i, j) for i in range(grid.rows) for j in range(grid.cols)}
        if set(self.ordering) != expected:
            raise ConfigurationError(f"Scan plan does not cover the {grid.rows}x{grid.cols} grid exactly once")


@dataclass
class FrameReport:
    """ Result of one scan

    Params:
        r_true      - true element resistances
        z_eq        - impedance presented to the chip by each selection (sneak paths included)
        z_meas      - measured impedance, nan where no impedance was obtained
        phasors     - per-sensor Phasor, None in ideal mode or on failure
        flags       - per-sensor set of flags
        elapsed     - model time spent, retries included [s]
        plan        - the ScanPlan
        acquisition - 'full-chain' or 'ideal'
        policy      - TerminationPolicy of the unselected lines
    """
    r_true: np.ndarray
    z_eq: np.ndarray
    z_meas: np.ndarray
    phasors: list
    flags: list
    elapsed: float
    plan: ScanPlan
    acquisition: str
    policy: TerminationPolicy
    r_meas: np.ndarray = field(init=False)

    def __post_init__(self):
        self.r_meas = np.where(np.isnan(self.z_meas.real), np.nan, resistance_from_impedance(
            np.where(np.isnan(self.z_meas.real), 1.0, self.z_meas)))

    @property
    def shape(self):
        return self.r_true.shape

    @property
    def frame_time(self):
        return self.plan.frame_time

    @property
    def theta(self):
        """ Phase of the measured impedance [rad] """
        return np.angle(self.z_meas)

    def n_failed(self):
        return sum(1 for f in self.flags_flat() if f & FAILURE_FLAGS)

    def flags_flat(self):
        return [self.flags[i][j] for i, j in self.plan.ordering]

    def rows(self):
        """ Per-sensor rows (row, col, r_true, r_meas, theta, flags) in scan order """
        theta = self.theta
        return [(i, j, float(self.r_true[i, j]), float(self.r_meas[i, j]), float(theta[i, j]),
                 '|'.join(sorted(self.flags[i][j]))) for i, j in self.plan.ordering]


def _measure_sensor(pipeline, z, seed, index):
    if not np.isfinite(z.real):
        z = complex(np.inf)
    return pipeline.measure(z, seed=seed, stream=(index,))


def scan_frame(grid, plan, acquisition='full-chain', policy=TerminationPolicy.FLOATING, pipeline=None, f=None,
               seed=None, n_jobs=1, verbose=False):
    """ Scan every sensor of the grid.

    In ideal mode the equivalent impedance of each selection is recorded directly; in full-chain
    mode it is measured through the pipeline with the random stream (seed, row * cols + col), so a
    frame is reproducible whatever the worker count.  Failures are recorded as flags.
    """
    if acquisition not in ACQUISITIONS:
        raise ConfigurationError(f"acquisition must be one of {ACQUISITIONS}, got {acquisition}")
    if acquisition == 'full-chain' and pipeline is None:
        raise ConfigurationError("Full-chain acquisition needs a pipeline")
    plan.check(grid)
    policy = TerminationPolicy.from_name(policy)
    if f is None:
        f = pipeline.f_exc if pipeline is not None else 125e3
    rows, cols = grid.shape
    flags = [[set() for _ in range(cols)] for _ in range(rows)]

    z_eq = None
    if policy == TerminationPolicy.FLOATING and grid.line_cap == 0:
        try:
            z_eq = equivalent_impedance_matrix(grid, policy, f)
        except NumericalSingularityError:
            z_eq = None
    if z_eq is None:
        z_eq = np.full((rows, cols), complex(np.nan))
        for i, j in plan.ordering:
            try:
                z_eq[i, j] = equivalent_impedance(grid, i, j, policy, f)
            except NumericalSingularityError as e:
                logger.warning(f"Sensor ({i}, {j}): {e}")
                flags[i][j].add(NUMERICAL_SINGULARITY)

    z_meas = np.full((rows, cols), complex(np.nan))
    phasors = [[None] * cols for _ in range(rows)]
    solvable = [(i, j) for i, j in plan.ordering if NUMERICAL_SINGULARITY not in flags[i][j]]
    if acquisition == 'ideal':
        for i, j in solvable:
            z_meas[i, j] = z_eq[i, j]
        elapsed = plan.frame_time
    else:
        work = tqdm(solvable, desc='Scanning', disable=not verbose)
        results = Parallel(n_jobs=n_jobs)(delayed(_measure_sensor)(pipeline, z_eq[i, j], seed, i * cols + j)
                                          for i, j in work)
        elapsed = plan.t_meas * (plan.n_sensors - len(solvable))
        for (i, j), m in zip(solvable, results):
            flags[i][j] |= m.flags
            phasors[i][j] = m.phasor
            if m.z is not None:
                z_meas[i, j] = m.z
            elapsed += m.elapsed
    report = FrameReport(grid.r.copy(), z_eq, z_meas, phasors, flags, elapsed, plan, acquisition, policy)
    failed = report.n_failed()
    if failed:
        logger.warning(f"{failed} of {plan.n_sensors} sensors flagged during the scan")
    logger.info(f"Scanned {rows}x{cols} grid ({acquisition}, {policy.value}): frame time "
                f"{plan.frame_time * 1e3:.3f} ms, {plan.fps:.1f} fps, model time {elapsed * 1e3:.3f} ms")
    return report
