"""
Basic testing of the crossbar: nodal solves, termination policies and frame scans
"""

import numpy as np
import pytest

from tdzsim import Pipeline
from tdzsim.models.common.exceptions import ConfigurationError, NumericalSingularityError
from tdzsim.models.crossbar.grid import SensorGrid, TerminationPolicy
from tdzsim.models.crossbar import nodal as nodal_module
from tdzsim.models.crossbar.nodal import equivalent_impedance, equivalent_impedance_matrix
from tdzsim.models.crossbar.scan import ScanPlan, scan_frame
from tdzsim.pipeline._constants import NUMERICAL_SINGULARITY
from tests import *

pytestmark = pytest.mark.crossbar


def test_uniform_two_by_two_floating():
    r = 1e3
    grid = SensorGrid.uniform(2, 2, r, mux_r_on=0.0)
    z = equivalent_impedance(grid, 0, 0, TerminationPolicy.FLOATING)
    # the element in parallel with the three-element sneak path
    assert z.real == pytest.approx(0.75 * r, rel=1e-9)
    assert abs(z.imag) < 1e-9


def test_grounded_isolates_the_element():
    for r in random_grids(100, 4, 4, 100.0, 100e3):
        grid = SensorGrid(r, mux_r_on=0.0)
        i, j = 1, 2
        z = equivalent_impedance(grid, i, j, TerminationPolicy.GROUNDED)
        assert z.real == pytest.approx(r[i, j], rel=1e-9)


def test_driven_guard_reads_the_column():
    r = random_grids(1, 3, 3, 1e3, 10e3)[0]
    grid = SensorGrid(r, mux_r_on=0.0)
    z = equivalent_impedance(grid, 0, 1, 'driven_guard')
    # every row sits at the drive potential
    assert z.real == pytest.approx(1.0 / np.sum(1.0 / r[:, 1]), rel=1e-9)


def test_drive_side_is_symmetric_when_floating():
    r = random_grids(1, 3, 4, 1e3, 10e3)[0]
    grid = SensorGrid(r)
    z_row = equivalent_impedance(grid, 2, 1, drive='row')
    z_col = equivalent_impedance(grid, 2, 1, drive='col')
    assert z_row == pytest.approx(z_col, rel=1e-9)


def test_isolated_line_is_singular():
    r = np.full((3, 4), 1e3)
    r[:, 2] = np.inf
    grid = SensorGrid(r)
    with pytest.raises(NumericalSingularityError) as excinfo:
        equivalent_impedance(grid, 0, 0, TerminationPolicy.FLOATING)
    assert excinfo.value.line == 'col 2'
    # grounding the unselected lines anchors it
    equivalent_impedance(grid, 0, 0, TerminationPolicy.GROUNDED)


def test_matrix_matches_single_solves():
    r = random_grids(1, 3, 4, 100.0, 100e3)[0]
    grid = SensorGrid(r, c_par=np.full(r.shape, 1e-12))
    fast = equivalent_impedance_matrix(grid, TerminationPolicy.FLOATING)
    for i in range(grid.rows):
        for j in range(grid.cols):
            assert fast[i, j] == pytest.approx(equivalent_impedance(grid, i, j), rel=1e-8)


def test_line_capacitance_anchors_lines():
    r = np.full((2, 3), 1e3)
    r[:, 2] = np.inf
    grid = SensorGrid(r, line_cap=10e-12)
    z = equivalent_impedance(grid, 0, 0)
    assert np.isfinite(z.real)
    assert z.imag != 0


def test_grid_and_policy_rejects():
    with pytest.raises(ConfigurationError):
        SensorGrid(np.array([[1e3, -1.0]]))
    with pytest.raises(ConfigurationError):
        SensorGrid(np.ones((2, 2)), c_par=np.ones((2, 3)))
    with pytest.raises(ConfigurationError):
        TerminationPolicy.from_name('shorted')
    with pytest.raises(ConfigurationError):
        equivalent_impedance(SensorGrid.uniform(2, 2, 1e3), 2, 0)


def test_scan_plan_timing():
    plan = ScanPlan.row_major(ROWS, COLS, T_MEAS)
    assert plan.n_sensors == N_SENSORS
    assert plan.frame_time == pytest.approx(FRAME_TIME)
    assert plan.fps == pytest.approx(82.35, abs=0.01)
    with pytest.raises(ConfigurationError):
        ScanPlan([(0, 0), (0, 0)], T_MEAS)
    with pytest.raises(ConfigurationError):
        ScanPlan.row_major(2, 2).check(SensorGrid.uniform(2, 3, 1e3))


def test_ideal_grounded_scan_recovers_elements():
    r = random_grids(1, 4, 5, 100.0, 100e3)[0]
    grid = SensorGrid(r, mux_r_on=0.0)
    report = scan_frame(grid, ScanPlan.row_major(4, 5), acquisition='ideal', policy='grounded')
    assert np.allclose(report.r_meas, r, rtol=1e-9)
    assert report.n_failed() == 0
    assert len(report.rows()) == 20


def test_ideal_floating_scan_shows_crosstalk():
    r = np.full((3, 3), 10e3)
    r[1, 1] = 100.0
    grid = SensorGrid(r, mux_r_on=0.0)
    report = scan_frame(grid, ScanPlan.row_major(3, 3), acquisition='ideal')
    # sneak paths through the low element pull its neighbours down
    assert report.r_meas[0, 0] < r[0, 0]
    assert report.r_meas[1, 1] < r[1, 1]


def test_scan_flags_isolated_lines():
    r = np.full((2, 3), 1e3)
    r[:, 2] = np.inf
    grid = SensorGrid(r)
    report = scan_frame(grid, ScanPlan.row_major(2, 3), acquisition='ideal')
    assert NUMERICAL_SINGULARITY in report.flags[0][0]
    assert report.n_failed() == 4
    assert np.all(np.isnan(report.r_meas[:, :2]))
    # the empty column itself is an open reading
    assert np.all(np.isinf(report.r_meas[:, 2]))


def test_full_chain_scan():
    pipeline = Pipeline(seed=TEST_SEED, logging_level='WARNING', **NOISELESS)
    r = np.array([[1e3, 5e3, 20e3], [2e3, 50e3, 200.0]])
    grid = SensorGrid(r, mux_r_on=0.0)
    plan = ScanPlan.row_major(2, 3, pipeline.conversion_time)
    report = scan_frame(grid, plan, policy='grounded', pipeline=pipeline)
    assert report.n_failed() == 0
    assert np.all(np.abs(report.r_meas - r) / r < 0.01)
    assert report.elapsed >= plan.frame_time
    with pytest.raises(ConfigurationError):
        scan_frame(grid, plan, acquisition='full-chain', pipeline=None)


def test_floating_readings_never_exceed_the_element():
    for r in random_grids(50, 4, 5, 20.0, 500e3):
        grid = SensorGrid(r, mux_r_on=0.0)
        z = equivalent_impedance_matrix(grid)
        # parallel sneak paths only lower the reading
        assert np.all(z.real <= r * (1 + 1e-9))


@pytest.mark.parametrize('policy', ['floating', 'grounded', 'driven_guard'])
def test_resistive_grid_is_frequency_flat(policy):
    r = random_grids(1, 3, 4, 100.0, 100e3)[0]
    grid = SensorGrid(r)
    near_dc = equivalent_impedance_matrix(grid, policy, f=1e-3)
    at_f_exc = equivalent_impedance_matrix(grid, policy, f=F_EXC)
    assert np.allclose(near_dc, at_f_exc, rtol=1e-12, atol=0)


def test_inexact_solves_are_rejected(monkeypatch):
    exact = nodal_module.linalg.solve

    def inexact(a, b, *args, **kwargs):
        return exact(a, b, *args, **kwargs) * (1 + 1e-6)

    monkeypatch.setattr(nodal_module.linalg, 'solve', inexact)
    r = random_grids(1, 3, 3, 1e3, 10e3)[0]
    grid = SensorGrid(r, mux_r_on=0.0)
    with pytest.raises(NumericalSingularityError):
        equivalent_impedance_matrix(grid)
    with pytest.raises(NumericalSingularityError):
        equivalent_impedance(grid, 0, 0)
    # a frame records the failures instead of aborting
    report = scan_frame(grid, ScanPlan.row_major(3, 3), acquisition='ideal')
    assert report.n_failed() == 9
    assert NUMERICAL_SINGULARITY in report.flags[1][1]
