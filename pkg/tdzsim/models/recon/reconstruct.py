"""
Crosstalk compensation: recover element resistances from sneak-path contaminated readings by
inverting the crossbar model.

gauss_newton Levenberg-Marquardt on log-conductances with a finite-difference Jacobian (default)
fixed_point  multiplicative update R <- R * meas / F(R), damped whenever the residual would grow;
             cheap, but it stalls on high-contrast grids
"""

import logging
from dataclasses import dataclass, field
from typing import List, Set

import numpy as np
from scipy import linalg

from tdzsim.models.common.exceptions import ConfigurationError
from tdzsim.models.common.utils import resistance_from_impedance
from tdzsim.models.crossbar.grid import SensorGrid, TerminationPolicy
from tdzsim.models.crossbar.nodal import equivalent_impedance_matrix
from tdzsim.pipeline._constants import JACOBIAN_FALLBACK, NOT_CONVERGED

logger = logging.getLogger('tdzsim')

METHODS = ('fixed_point', 'gauss_newton')
MIN_STEP_FRACTION = 1 / 64
MAX_DAMPING = 1e8


@dataclass
class ReconSpec:
    """ Reconstruction settings

    Params:
        method    - 'gauss_newton' (default) or 'fixed_point'
        max_iters - iteration budget
        tol       - stop when the largest relative update falls below tol
        damping   - initial Levenberg damping (gauss_newton)
        r_min     - lower clamp [Ohm]
        r_max     - upper clamp [Ohm]
        fd_step   - finite-difference step in log-conductance
    """
    method: str = 'gauss_newton'
    max_iters: int = 50
    tol: float = 1e-4
    damping: float = 1e-3
    r_min: float = 20.0
    r_max: float = 500e3
    fd_step: float = 1e-3

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}, got {self.method}")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")
        if not 0 < self.r_min < self.r_max:
            raise ConfigurationError("0 < r_min < r_max is required")
        if self.max_iters < 1 or not self.fd_step > 0 or self.damping < 0:
            raise ConfigurationError("max_iters >= 1, fd_step > 0 and damping >= 0 are required")

    @property
    def bounds(self):
        return self.r_min, self.r_max


@dataclass
class ReconResult:
    """ Estimate with its iteration count, final max relative residual and flags """
    estimate: np.ndarray
    iters: int
    residual: float
    converged: bool
    flags: Set[str] = field(default_factory=set)
    history: List[float] = field(default_factory=list)

    def __iter__(self):
        return iter((self.estimate, self.iters, self.residual))


class ForwardModel:
    """ F(R): the resistance each selection of a grid with elements R would read """

    def __init__(self, template, policy=TerminationPolicy.FLOATING, f=125e3):
        self.template = template
        self.policy = TerminationPolicy.from_name(policy)
        self.f = f
        self.evaluations = 0

    def __call__(self, r):
        self.evaluations += 1
        grid = SensorGrid(r, mux_r_on=self.template.mux_r_on, line_cap=self.template.line_cap)
        return resistance_from_impedance(equivalent_impedance_matrix(grid, self.policy, self.f))


def _max_rel(a, b):
    return float(np.max(np.abs(a / b - 1)))


def fixed_point(meas, spec, forward):
    lo, hi = spec.bounds
    r = np.clip(meas, lo, hi)
    f_r = forward(r)
    residual = _max_rel(f_r, meas)
    history = [residual]
    converged = False
    flags = set()
    iters = 0
    for iters in range(1, spec.max_iters + 1):
        fraction = 1.0
        while True:
            r_new = np.clip(r * (meas / f_r) ** fraction, lo, hi)
            f_new = forward(r_new)
            res_new = _max_rel(f_new, meas)
            if res_new <= residual or fraction <= MIN_STEP_FRACTION:
                break
            # residual grew: reject and damp the step
            fraction /= 2
        if res_new > residual:
            logger.warning(f"Fixed-point step {iters} cannot reduce the residual {residual:.3g}; stopping")
            break
        update = _max_rel(r_new, r)
        r, f_r, residual = r_new, f_new, res_new
        history.append(residual)
        if update < spec.tol:
            converged = True
            break
    if not converged:
        flags.add(NOT_CONVERGED)
    return ReconResult(r, iters, residual, converged, flags, history)


def _residuals(x, log_meas, shape, forward):
    r = np.exp(-x).reshape(shape)
    return np.log(forward(r)).ravel() - log_meas


def gauss_newton(meas, spec, forward):
    lo, hi = spec.bounds
    shape = meas.shape
    log_meas = np.log(meas).ravel()
    x_lo, x_hi = -np.log(hi), -np.log(lo)
    x = np.clip(-np.log(meas).ravel(), x_lo, x_hi)
    res = _residuals(x, log_meas, shape, forward)
    sse = float(res @ res)
    damping = spec.damping
    history = [float(np.max(np.abs(np.expm1(res))))]
    converged = False
    iters = 0
    for iters in range(1, spec.max_iters + 1):
        J = np.empty((res.size, x.size))
        for k in range(x.size):
            x_k = x.copy()
            x_k[k] += spec.fd_step
            J[:, k] = (_residuals(x_k, log_meas, shape, forward) - res) / spec.fd_step
        JtJ = J.T @ J
        g = J.T @ res
        while True:
            A = JtJ + damping * np.diag(np.diag(JtJ) + 1e-12)
            delta = linalg.solve(A, -g, assume_a='sym')
            x_new = np.clip(x + delta, x_lo, x_hi)
            res_new = _residuals(x_new, log_meas, shape, forward)
            sse_new = float(res_new @ res_new)
            if sse_new <= sse or damping > MAX_DAMPING:
                break
            damping *= 10
        if sse_new > sse:
            break
        step = float(np.max(np.abs(x_new - x)))
        x, res, sse = x_new, res_new, sse_new
        damping = max(damping / 10, 1e-12)
        history.append(float(np.max(np.abs(np.expm1(res)))))
        if step < spec.tol:
            converged = True
            break
    flags = set() if converged else {NOT_CONVERGED}
    return ReconResult(np.exp(-x).reshape(shape), iters, history[-1], converged, flags, history)


def reconstruct(meas, spec=None, policy=TerminationPolicy.FLOATING, template=None, f=125e3):
    """ Recover element resistances from a frame of readings.

    Args:
        meas: matrix of read resistances [Ohm], all positive and finite.
        spec: ReconSpec, defaults when None.
        policy: termination policy the frame was scanned with.
        template: SensorGrid supplying mux_r_on and line_cap of the forward model; an ideal MUX
            when None.
        f: excitation frequency [Hz].

    Returns:
        ReconResult, which also unpacks as (estimate, iters, residual).
    """
    spec = spec or ReconSpec()
    meas = np.array(meas, dtype=float, ndmin=2)
    if not np.all(np.isfinite(meas)) or np.any(meas <= 0):
        raise ConfigurationError("Readings must be positive and finite")
    if template is None:
        template = SensorGrid(meas, mux_r_on=0.0)
    elif template.shape != meas.shape:
        raise ConfigurationError(f"Readings shape {meas.shape} does not match grid shape {template.shape}")
    forward = ForwardModel(template, policy, f)
    if spec.method == 'gauss_newton':
        try:
            result = gauss_newton(meas, spec, forward)
        except linalg.LinAlgError:
            logger.warning("Singular Jacobian; falling back to the fixed-point iteration")
            result = fixed_point(meas, spec, forward)
            result.flags.add(JACOBIAN_FALLBACK)
    else:
        result = fixed_point(meas, spec, forward)
    if result.converged:
        logger.info(f"Reconstruction ({spec.method}) converged in {result.iters} iterations, "
                    f"max relative residual {result.residual:.3g}")
    else:
        logger.warning(f"Reconstruction ({spec.method}) did not converge in {spec.max_iters} iterations, "
                       f"max relative residual {result.residual:.3g}")
    logger.debug(f"{forward.evaluations} forward evaluations")
    return result
