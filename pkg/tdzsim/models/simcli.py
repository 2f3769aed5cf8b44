"""
Entry point for running the simulator from the command line.

    tdzsim <measure|sweep|montecarlo|frame|recon|thd|table> [--config FILE] [--seed N] [--jobs N] [--out DIR]

Every command writes its results under --out; each file carries the hash of the resolved config
and the master seed in its first line, so identical (config, seed) pairs give identical files.
Exit codes: 0 on success (measurement failures are reported as flags), 2 on a configuration
error, 3 on an I/O error.
"""

import argparse
import logging
import logging.config
import os

import numpy as np

from tdzsim import logging_config
from tdzsim.models.common.exceptions import ConfigurationError, TdzsimError
from tdzsim.models.common.utils import log_spaced, print_config, save_config
from tdzsim.models.crossbar.scan import ScanPlan, scan_frame
from tdzsim.models.frontend.driver import linear_range, thd_sweep
from tdzsim.models.metrics.comparison import COMPARISON_HEADER, comparison_rows
from tdzsim.models.metrics.scorer import dynamic_range_db
from tdzsim.models.metrics.sweep import (SWEEP_HEADER, amplitude_sweep, chip_spread, error_sweep, load_impedance,
                                         montecarlo, sweep_loads)
from tdzsim.models.recon.pressure import gait_fixture, pressure_map, resistive_transfer
from tdzsim.models.recon.reconstruct import ReconSpec, reconstruct
from tdzsim.models.sigsynth.waveform import Waveform
from tdzsim.models.tdreadout.autorange import RangeSetting
from tdzsim.models.tdreadout.readout import bits_rows, counts_rows
from tdzsim.pipeline._constants import FRONTEND, TDREADOUT
from tdzsim.pipeline.core import Pipeline, PipelineRequirementsException
from tdzsim.utils import formats
from tdzsim.utils.helper_func import make_table
from tdzsim.utils.resources import ensure_dir, schema_help

logger = logging.getLogger('tdzsim')

COMMANDS = ['measure', 'sweep', 'montecarlo', 'frame', 'recon', 'thd', 'table']

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def parse_args(args=None):
    parser = argparse.ArgumentParser(prog='tdzsim', formatter_class=argparse.RawDescriptionHelpFormatter,
                                     epilog='Config keys (JSON file, sections or flat keys):\n' + schema_help())
    parser.add_argument('command', choices=COMMANDS, help='What to run.')
    parser.add_argument('--config', type=str, default=None, help='JSON config file.')
    parser.add_argument('--seed', type=int, default=None, help='Master seed; TDZSIM_SEED or 1234 when unset.')
    parser.add_argument('--jobs', type=int, default=1, help='Worker processes for sweeps and scans.')
    parser.add_argument('--out', type=str, default='.', help='Output directory.')
    parser.add_argument('--logging_level', type=str, default='INFO')
    parser.add_argument('--log_file', type=str, default=None, help='Also write timestamped log lines to this file.')
    parser.add_argument('--dump_config', action='store_true', help='Write the resolved config to <out>/config.json.')

    parser.add_argument('--load', type=float, default=15e3, help='Load resistance for measure [Ohm].')
    parser.add_argument('--cap', type=float, default=None, help='Capacitance parallel to the load [F].')
    parser.add_argument('--amp_code', type=int, default=None, help='Fixed amplitude code; disables auto-ranging.')
    parser.add_argument('--mirror_ratio', type=int, default=None, help='Fixed mirror ratio; disables auto-ranging.')
    parser.add_argument('--offset_code', type=int, default=None, help='Fixed negative offset code; disables auto-ranging.')
    parser.add_argument('--no_autorange', dest='autorange', action='store_false', help='Use the configured setting.')
    parser.add_argument('--amp_codes', type=int, nargs='+', default=None,
                        help='With measure: also sweep N1 over these amplitude codes.')

    parser.add_argument('--grid', type=str, default=None, help='Grid CSV for frame/recon.')
    parser.add_argument('--fixture', type=str, default=None, help='Gait fixture used when no grid is given.')
    parser.add_argument('--repeats', type=int, default=None, help='Repeats per load for sweep/montecarlo.')
    args = parser.parse_args(args=args)
    return args


def config_overrides(args):
    """ Config keys set by command line flags """
    overrides = {}
    if args['grid'] is not None:
        overrides['crossbar_grid'] = args['grid']
    if args['fixture'] is not None:
        overrides['crossbar_fixture'] = args['fixture']
    if not args['autorange']:
        overrides['tdreadout_autorange'] = False
    return overrides


def main(args=None):
    args = vars(parse_args(args=args))
    if args['log_file']:
        ensure_dir(os.path.dirname(os.path.abspath(args['log_file'])))
    logging.config.dictConfig(logging_config('minimal', args['log_file']))
    try:
        run(args)
    except (ConfigurationError, PipelineRequirementsException) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except TdzsimError as e:
        logger.error(str(e))
        return EXIT_CONFIG
    return EXIT_OK


def run(args):
    pipeline = Pipeline(config=args['config'], seed=args['seed'], logging_level=args['logging_level'],
                        **config_overrides(args))
    print_config(pipeline.config)
    ensure_dir(args['out'])
    if args['dump_config']:
        save_config(pipeline.config, os.path.join(args['out'], 'config.json'))
    logger.info("Running {} with seed {}".format(args['command'], pipeline.seed))
    COMMAND_FUNCS[args['command']](pipeline, args)


def _out(args, name):
    return os.path.join(args['out'], name)


def _stamp(pipeline):
    return dict(config_hash=pipeline.config_hash, seed=pipeline.seed)


def fixed_setting(pipeline, args):
    """ The setting requested on the command line, None to auto-range """
    given = [args['amp_code'], args['mirror_ratio'], args['offset_code']]
    if all(v is None for v in given) and pipeline.config['tdreadout_autorange']:
        return None
    default = pipeline.default_setting
    return RangeSetting(default.amp_code if args['amp_code'] is None else args['amp_code'],
                        default.mirror_ratio if args['mirror_ratio'] is None else args['mirror_ratio'],
                        default.offset_code_p,
                        default.offset_code_n if args['offset_code'] is None else args['offset_code'])


def cmd_measure(pipeline, args):
    cap = args['cap'] or 0.0
    z = load_impedance(args['load'], cap, pipeline.f_exc)
    m = pipeline.measure(z, setting=fixed_setting(pipeline, args))
    record = m.to_dict()
    logger.info('\n' + make_table(['Field', 'Value'], [[k, v] for k, v in record.items()]))
    formats.write_csv(_out(args, 'measure.csv'), list(record.keys()), [list(record.values())], **_stamp(pipeline))
    if m.bits is not None:
        spec = pipeline.processors[TDREADOUT].spec
        formats.write_csv(_out(args, 'measure_bits.csv'), ['cycle', 'phase', 'tick', 'bit'],
                          bits_rows(m.bits, spec), **_stamp(pipeline))
    if m.counts is not None:
        formats.write_csv(_out(args, 'measure_counts.csv'), ['n0', 'n1', 'n2'], counts_rows([m.counts]),
                          **_stamp(pipeline))
    if m.diff_current is not None:
        f_clk = pipeline.config['sigsynth_f_clk']
        current = Waveform(m.diff_current[0], f_clk, 'A', pipeline.f_exc)
        formats.write_waveform_csv(_out(args, 'measure_current.csv'), current, **_stamp(pipeline))
    if args['amp_codes']:
        setting = m.setting
        rows = amplitude_sweep(z, pipeline, args['amp_codes'], mirror_ratio=setting.mirror_ratio)
        formats.write_csv(_out(args, 'amplitude.csv'), ['amp_code', 'n1', 'n2', 'r', 'flags'], rows,
                          **_stamp(pipeline))
        formats.write_svg_plot(_out(args, 'amplitude.svg'), {'N1': ([r[0] for r in rows], [r[1] for r in rows])},
                               f"N1 vs amplitude code at {args['load']:g} Ohm", 'amplitude code', 'N1 [ticks]',
                               **_stamp(pipeline))


def _sweep_plots(pipeline, args, name, rows):
    loads = [row.load for row in rows]
    formats.write_svg_plot(_out(args, f'{name}_error.svg'),
                           {'mean error': (loads, [row.rel_err * 100 for row in rows])},
                           'Relative resistance error', 'load [Ohm]', 'error [%]', logx=True, **_stamp(pipeline))
    if any(np.isfinite(row.snr_db) for row in rows):
        formats.write_svg_plot(_out(args, f'{name}_snr.svg'), {'SNR': (loads, [row.snr_db for row in rows])},
                               'SNR of repeated readings', 'load [Ohm]', 'SNR [dB]', logx=True, **_stamp(pipeline))


def cmd_sweep(pipeline, args):
    config = pipeline.config
    loads = sweep_loads(config)
    repeats = args['repeats'] or config['metrics_sweep_repeats']
    c_par = config['metrics_c_par'] if args['cap'] is None else args['cap']
    chips = config['metrics_chips']
    if chips > 1:
        results, mean_err = chip_spread(loads, pipeline, chips, repeats, c_par, pipeline.seed, args['jobs'])
        rows = [(chip,) + row.as_tuple() for chip, result in enumerate(results) for row in result.rows]
        formats.write_csv(_out(args, 'sweep.csv'), ['chip'] + SWEEP_HEADER, rows, **_stamp(pipeline))
        _sweep_plots(pipeline, args, 'sweep', results[0].rows)
        return
    result = error_sweep(loads, pipeline, repeats, c_par, pipeline.seed, args['jobs'])
    formats.write_csv(_out(args, 'sweep.csv'), SWEEP_HEADER, [row.as_tuple() for row in result.rows],
                      **_stamp(pipeline))
    _sweep_plots(pipeline, args, 'sweep', result.rows)
    logger.info("Input dynamic range: {:.1f} dB".format(dynamic_range_db(min(loads), max(loads))))


def cmd_montecarlo(pipeline, args):
    config = pipeline.config
    repeats = args['repeats'] or config['metrics_repeats']
    c_par = config['metrics_c_par'] if args['cap'] is None else args['cap']
    result = montecarlo(config['metrics_mc_loads'], pipeline, repeats, c_par, pipeline.seed, args['jobs'])
    formats.write_csv(_out(args, 'montecarlo.csv'), SWEEP_HEADER, [row.as_tuple() for row in result.rows],
                      **_stamp(pipeline))
    _sweep_plots(pipeline, args, 'montecarlo', result.rows)


def frame_grid(pipeline):
    """ The grid file of the config, or the configured gait fixture """
    config = pipeline.config
    kwargs = dict(mux_r_on=config['crossbar_mux_r_on'], line_cap=config['crossbar_line_cap'])
    if config['crossbar_grid'] is not None:
        return formats.read_grid(config['crossbar_grid'], **kwargs)
    return gait_fixture(config['crossbar_fixture'], config['crossbar_rows'], config['crossbar_cols'],
                        r_ref=config['recon_r_ref'], **kwargs)


def scan(pipeline, args):
    config = pipeline.config
    grid = frame_grid(pipeline)
    plan = ScanPlan.row_major(grid.rows, grid.cols, pipeline.conversion_time)
    report = scan_frame(grid, plan, config['crossbar_acquisition'], config['crossbar_policy'], pipeline,
                        seed=pipeline.seed, n_jobs=args['jobs'])
    logger.info("Sensors\tFrame time(ms)\tfps\tFlagged")
    logger.info("{}\t{:.3f}\t{:.1f}\t{}".format(plan.n_sensors, plan.frame_time * 1e3, plan.fps, report.n_failed()))
    return grid, report


def cmd_frame(pipeline, args):
    config = pipeline.config
    grid, report = scan(pipeline, args)
    formats.write_csv(_out(args, 'frame.csv'), ['row', 'col', 'r_true', 'r_meas', 'theta', 'flags'],
                      report.rows(), **_stamp(pipeline))
    formats.write_grid(_out(args, 'frame_grid.csv'), grid, **_stamp(pipeline))
    formats.write_pgm(_out(args, 'frame.pgm'), report.r_meas, config['recon_r_min'], config['recon_r_max'],
                      **_stamp(pipeline))


def cmd_recon(pipeline, args):
    config = pipeline.config
    grid, report = scan(pipeline, args)
    spec = ReconSpec(method=config['recon_method'], max_iters=config['recon_max_iters'], tol=config['recon_tol'],
                     damping=config['recon_damping'], r_min=config['recon_r_min'], r_max=config['recon_r_max'],
                     fd_step=config['recon_fd_step'])
    # flagged sensors read as the upper clamp
    meas = np.where(np.isfinite(report.r_meas), report.r_meas, spec.r_max)
    meas = np.clip(meas, spec.r_min, spec.r_max)
    result = reconstruct(meas, spec, report.policy, grid, pipeline.f_exc)
    pressure = pressure_map(result.estimate, resistive_transfer(config['recon_r_ref']))
    rows = [(i, j, grid.r[i, j], meas[i, j], result.estimate[i, j], pressure[i, j])
            for i, j in report.plan.ordering]
    formats.write_csv(_out(args, 'recon.csv'), ['row', 'col', 'r_true', 'r_meas', 'r_est', 'pressure'], rows,
                      **_stamp(pipeline))
    formats.write_pgm(_out(args, 'recon.pgm'), result.estimate, spec.r_min, spec.r_max, **_stamp(pipeline))
    formats.write_svg_plot(_out(args, 'recon_residual.svg'),
                           {'residual': (list(range(len(result.history))), list(result.history))},
                           'Reconstruction residual', 'iteration', 'max relative residual', **_stamp(pipeline))
    error = np.abs(result.estimate / grid.r - 1)
    logger.info("Iterations\tResidual\tMax error(%)\tFlags")
    logger.info("{}\t{:.3g}\t{:.3f}\t{}".format(result.iters, result.residual, float(np.max(error)) * 100,
                                                 '|'.join(sorted(result.flags)) or '-'))


def cmd_thd(pipeline, args):
    spec = pipeline.processors[FRONTEND].spec
    range_on = linear_range(spec, adaptive=True)
    range_off = linear_range(spec, adaptive=False)
    amplitudes = log_spaced(range_off / 10, range_on * 2, pipeline.config['metrics_thd_points'])
    rows = thd_sweep(spec, amplitudes, adaptive=True) + thd_sweep(spec, amplitudes, adaptive=False)
    formats.write_csv(_out(args, 'thd.csv'), ['amplitude', 'thd', 'adaptive'], rows, **_stamp(pipeline))
    series = {'adaptive bias on': (amplitudes, [r[1] * 100 for r in rows if r[2]]),
              'adaptive bias off': (amplitudes, [r[1] * 100 for r in rows if not r[2]])}
    formats.write_svg_plot(_out(args, 'thd.svg'), series, 'THD of the load current', 'amplitude [A]', 'THD [%]',
                           logx=True, **_stamp(pipeline))
    logger.info("Linear range on(uA)\tLinear range off(uA)\tRatio")
    logger.info("{:.2f}\t{:.2f}\t{:.2f}".format(range_on * 1e6, range_off * 1e6, range_on / range_off))


def cmd_table(pipeline, args):
    rows = comparison_rows()
    formats.write_csv(_out(args, 'table.csv'), COMPARISON_HEADER, rows, **_stamp(pipeline))
    report = pipeline.power_budget()
    formats.write_csv(_out(args, 'budget.csv'), ['item', 'value', 'unit'], report.rows(), **_stamp(pipeline))
    display = [[row[0], row[12], row[13], row[9], row[10]] for row in rows]
    logger.info('\n' + make_table(['Chip', 'FoM', 'FoM recomputed', 'ENOB', 'ENOB recomputed'], display))
    logger.info("Total(uW)\tPer sensor(uW)\tEnergy/sensor(nJ)\tfps")
    logger.info("{:.2f}\t{:.4f}\t{:.3f}\t{:.2f}".format(report.total * 1e6, report.per_sensor * 1e6,
                                                        report.energy_per_sensor * 1e9, report.fps))


COMMAND_FUNCS = {
    'measure': cmd_measure,
    'sweep': cmd_sweep,
    'montecarlo': cmd_montecarlo,
    'frame': cmd_frame,
    'recon': cmd_recon,
    'thd': cmd_thd,
    'table': cmd_table,
}

if __name__ == '__main__':
    raise SystemExit(main())
