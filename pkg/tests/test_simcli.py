"""
Test the command line entry point: outputs, exit codes and reproducibility
"""

import json
import logging.config
import re

import numpy as np
import pytest

from tdzsim import logging_config
from tdzsim.models import simcli
from tdzsim.models.crossbar.grid import SensorGrid
from tdzsim.utils.formats import write_grid
from tests import *

pytestmark = pytest.mark.cli

IDEAL_CONFIG = {'crossbar': {'acquisition': 'ideal', 'mux_r_on': 0.0}, 'recon': {'method': 'gauss_newton'}}


def run_cli(out_dir, *args):
    return simcli.main([*args, '--out', str(out_dir), '--seed', str(TEST_SEED), '--logging_level', 'WARNING'])


def read_text(path):
    with open(path) as fin:
        return fin.read()


def write_json(path, obj):
    with open(path, 'w') as fout:
        json.dump(obj, fout)
    return str(path)


@pytest.fixture
def small_grid(tmp_path):
    r = np.array([[1e3, 5e3, 20e3], [2e3, 50e3, 200.0], [8e3, 300.0, 3e3]])
    path = tmp_path / 'grid.csv'
    write_grid(str(path), SensorGrid(r))
    return str(path)


def test_table_is_reproducible(tmp_path):
    assert run_cli(tmp_path / 'a', 'table') == simcli.EXIT_OK
    assert run_cli(tmp_path / 'b', 'table') == simcli.EXIT_OK
    for name in ('table.csv', 'budget.csv'):
        first = read_text(tmp_path / 'a' / name)
        assert first.startswith('# config=')
        assert f'seed={TEST_SEED}' in first.splitlines()[0]
        assert first == read_text(tmp_path / 'b' / name)


def test_measure_outputs(tmp_path):
    assert run_cli(tmp_path, 'measure', '--load', '15e3', '--amp_codes', '16', '32', '64') == simcli.EXIT_OK
    for name in ('measure.csv', 'measure_bits.csv', 'measure_counts.csv', 'measure_current.csv',
                 'amplitude.csv', 'amplitude.svg'):
        assert (tmp_path / name).exists()
    lines = read_text(tmp_path / 'measure.csv').splitlines()
    assert lines[1].startswith('load_re,load_im')
    assert len(read_text(tmp_path / 'amplitude.csv').splitlines()) == 2 + 3
    assert read_text(tmp_path / 'amplitude.svg').lstrip().startswith('<svg')


def test_measure_is_reproducible(tmp_path):
    assert run_cli(tmp_path / 'a', 'measure', '--load', '5e3') == simcli.EXIT_OK
    assert run_cli(tmp_path / 'b', 'measure', '--load', '5e3') == simcli.EXIT_OK
    for name in ('measure.csv', 'measure_bits.csv', 'measure_counts.csv'):
        assert read_text(tmp_path / 'a' / name) == read_text(tmp_path / 'b' / name)


def test_shorted_load_is_flagged_not_fatal(tmp_path):
    assert run_cli(tmp_path, 'measure', '--load', '0') == simcli.EXIT_OK
    assert 'short_circuit' in read_text(tmp_path / 'measure.csv')


def test_fixed_setting_from_flags(tmp_path):
    assert run_cli(tmp_path, 'measure', '--load', '20e3', '--amp_code', '64', '--mirror_ratio', '1',
                   '--offset_code', '48') == simcli.EXIT_OK
    row = read_text(tmp_path / 'measure.csv').splitlines()[2].split(',')
    header = read_text(tmp_path / 'measure.csv').splitlines()[1].split(',')
    record = dict(zip(header, row))
    assert record['attempts'] == '1'
    assert record['offset_code_n'] == '48'


def test_missing_grid_is_a_config_error(tmp_path):
    assert run_cli(tmp_path, 'frame', '--grid', str(tmp_path / 'nope.csv')) == simcli.EXIT_CONFIG


def test_bad_config_key(tmp_path):
    config = write_json(tmp_path / 'bad.json', {'tdreadout': {'phase_count': 6}})
    assert run_cli(tmp_path, 'table', '--config', config) == simcli.EXIT_CONFIG
    config = write_json(tmp_path / 'bad_section.json', {'adc': {'bits': 12}})
    assert run_cli(tmp_path, 'table', '--config', config) == simcli.EXIT_CONFIG


def test_unwritable_output_is_an_io_error(tmp_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('not a directory')
    assert simcli.main(['table', '--out', str(blocker), '--logging_level', 'WARNING']) == simcli.EXIT_IO


def test_dump_config(tmp_path):
    config = write_json(tmp_path / 'in.json', {'tdreadout_noise_sigma': 0.0})
    assert run_cli(tmp_path / 'out', 'table', '--config', config, '--dump_config') == simcli.EXIT_OK
    with open(tmp_path / 'out' / 'config.json') as fin:
        dumped = json.load(fin)
    assert dumped['tdreadout_noise_sigma'] == 0.0
    assert dumped['sigsynth_f_exc'] == F_EXC


def test_frame_on_a_grid_file(tmp_path, small_grid):
    config = write_json(tmp_path / 'ideal.json', IDEAL_CONFIG)
    assert run_cli(tmp_path / 'a', 'frame', '--grid', small_grid, '--config', config) == simcli.EXIT_OK
    assert run_cli(tmp_path / 'b', 'frame', '--grid', small_grid, '--config', config) == simcli.EXIT_OK
    for name in ('frame.csv', 'frame_grid.csv', 'frame.pgm'):
        assert read_text(tmp_path / 'a' / name) == read_text(tmp_path / 'b' / name)
    lines = read_text(tmp_path / 'a' / 'frame.csv').splitlines()
    assert len(lines) == 2 + 9
    pgm = read_text(tmp_path / 'a' / 'frame.pgm').splitlines()
    assert pgm[0] == 'P2'
    assert '3 3' in pgm


def test_recon_on_a_grid_file(tmp_path, small_grid):
    config = write_json(tmp_path / 'ideal.json', IDEAL_CONFIG)
    assert run_cli(tmp_path / 'a', 'recon', '--grid', small_grid, '--config', config) == simcli.EXIT_OK
    assert run_cli(tmp_path / 'b', 'recon', '--grid', small_grid, '--config', config) == simcli.EXIT_OK
    for name in ('recon.csv', 'recon.pgm', 'recon_residual.svg'):
        assert read_text(tmp_path / 'a' / name) == read_text(tmp_path / 'b' / name)
    lines = read_text(tmp_path / 'a' / 'recon.csv').splitlines()
    assert lines[1] == 'row,col,r_true,r_meas,r_est,pressure'
    assert len(lines) == 2 + 9


def test_montecarlo_is_reproducible(tmp_path):
    assert run_cli(tmp_path / 'a', 'montecarlo', '--repeats', '3') == simcli.EXIT_OK
    assert run_cli(tmp_path / 'b', 'montecarlo', '--repeats', '3', '--jobs', '2') == simcli.EXIT_OK
    assert read_text(tmp_path / 'a' / 'montecarlo.csv') == read_text(tmp_path / 'b' / 'montecarlo.csv')


@pytest.mark.slow
def test_sweep_is_reproducible(tmp_path):
    assert run_cli(tmp_path / 'a', 'sweep') == simcli.EXIT_OK
    assert run_cli(tmp_path / 'b', 'sweep', '--jobs', '2') == simcli.EXIT_OK
    for name in ('sweep.csv', 'sweep_error.svg'):
        assert read_text(tmp_path / 'a' / name) == read_text(tmp_path / 'b' / name)
    assert len(read_text(tmp_path / 'a' / 'sweep.csv').splitlines()) == 2 + SWEEP_N_LOADS


@pytest.mark.slow
def test_thd_is_reproducible(tmp_path):
    assert run_cli(tmp_path / 'a', 'thd') == simcli.EXIT_OK
    assert run_cli(tmp_path / 'b', 'thd') == simcli.EXIT_OK
    for name in ('thd.csv', 'thd.svg'):
        assert read_text(tmp_path / 'a' / name) == read_text(tmp_path / 'b' / name)


def test_unknown_command():
    with pytest.raises(SystemExit):
        simcli.parse_args(['calibrate'])


def test_log_file(tmp_path):
    log_file = tmp_path / 'logs' / 'run.log'
    try:
        code = simcli.main(['table', '--out', str(tmp_path), '--seed', str(TEST_SEED), '--log_file', str(log_file)])
    finally:
        logging.config.dictConfig(logging_config())
    assert code == simcli.EXIT_OK
    text = log_file.read_text()
    assert re.search(r'^\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2} INFO: Running table with seed ' + str(TEST_SEED) + '$', text, re.M)


def test_bad_logging_level_is_a_configuration_error(tmp_path):
    code = simcli.main(['table', '--out', str(tmp_path), '--logging_level', 'LOUD'])
    assert code == simcli.EXIT_CONFIG
