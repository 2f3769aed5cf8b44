"""
Configuration defaults, config files and logging control
"""

import hashlib
import json
import logging
import os
from collections import OrderedDict
from pathlib import Path

from tdzsim.models.common.exceptions import ConfigurationError
from tdzsim.pipeline._constants import SIGSYNTH, FRONTEND, TDREADOUT, CROSSBAR, RECON, METRICS
from tdzsim.utils.helper_func import make_table

logger = logging.getLogger('tdzsim')

SEED_ENV_VAR = 'TDZSIM_SEED'
FALLBACK_SEED = 1234
PIPELINE_NAMES = [SIGSYNTH, FRONTEND, TDREADOUT]
CONFIG_SECTIONS = [SIGSYNTH, FRONTEND, TDREADOUT, CROSSBAR, RECON, METRICS]


def default_seed():
    value = os.getenv(SEED_ENV_VAR)
    if value is None:
        return FALLBACK_SEED
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{SEED_ENV_VAR} must be an integer, got {value!r}")

# key -> (type, default, help); every default reproduces the 125 kHz / 64 MHz / 6-phase / 253-sensor
# operating point
CONFIG_SCHEMA = OrderedDict([
    ('sigsynth_f_exc', ('float', 125e3, 'excitation frequency [Hz]')),
    ('sigsynth_f_clk', ('float', 64e6, 'DDS and comparator clock [Hz]')),
    ('sigsynth_amp_code', ('int', 64, 'amplitude code 1..64 when auto-ranging is off')),
    ('sigsynth_lut_bits', ('int', 8, 'quarter-wave table address width')),
    ('sigsynth_phases', ('int', 6, 'interleaved clock phases')),
    ('sigsynth_enforce_range', ('bool', True, 'restrict f_exc to 125 kHz..1 MHz')),
    ('sigsynth_test_mode', ('bool', False, 'allow amp_code 0')),
    ('sigsynth_coarse_units', ('int', 15, 'coarse I-DAC unit elements')),
    ('sigsynth_fine_units', ('int', 16, 'fine I-DAC unit elements')),
    ('sigsynth_mismatch_sigma', ('float', 0.005, 'relative unit-element mismatch')),
    ('sigsynth_dem_enabled', ('bool', True, 'dynamic element matching')),
    ('sigsynth_chip_seed', ('int', 0, 'seed of the frozen DAC mismatch (one chip)')),
    ('sigsynth_ti_cutoff_ratio', ('float', 2.0, 'TI filter cutoff as a multiple of f_exc')),
    ('sigsynth_max_harmonic', ('int', 64, 'highest excitation harmonic kept')),
    ('frontend_i_bias_q', ('float', 74e-6, 'quiescent bias [A]')),
    ('frontend_i_limit', ('float', 24e-6, 'adaptive-bias threshold margin [A]')),
    ('frontend_i_adp_step', ('float', 49e-6, 'adaptive-bias step [A]')),
    ('frontend_adp_max_steps', ('int', 4, 'maximum adaptive-bias steps')),
    ('frontend_hysteresis', ('float?', None, 'disengage hysteresis [A], null for half a step')),
    ('frontend_adaptive_enabled', ('bool', True, 'pre-saturation adaptive bias')),
    ('frontend_mirror_ratio', ('int', 1, 'mirror ratio when auto-ranging is off')),
    ('frontend_mirror_steps', ('ints', [1, 5, 10, 15, 25], 'the five programmable mirror ratios')),
    ('frontend_beta', ('float', 12.0, 'linear output capability per unit bias')),
    ('frontend_supply_v', ('float', 1.2, 'supply voltage [V]')),
    ('frontend_i_cm', ('float', 15.75e-6, 'mirror common-mode current [A]')),
    ('frontend_noise_sigma', ('float', 2e-9, 'load-referred driver noise [A]')),
    ('tdreadout_cycles_per_meas', ('int', 6, 'excitation cycles per conversion')),
    ('tdreadout_offset_code_p', ('int', 0, 'positive offset DAC code when auto-ranging is off')),
    ('tdreadout_offset_code_n', ('int', 48, 'negative offset DAC code when auto-ranging is off')),
    ('tdreadout_offset_lsb', ('float', 0.5e-6, 'offset DAC step [A]')),
    ('tdreadout_noise_sigma', ('float', 10e-9, 'comparator input noise [A]')),
    ('tdreadout_jitter_sigma', ('float', 0.0, 'clock jitter [s]')),
    ('tdreadout_merge', ('str', 'majority', 'merging of repeated phases: majority or sum')),
    ('tdreadout_e_conv', ('float', 1.75e-12, 'comparator energy per clock edge [J]')),
    ('tdreadout_duty_gate', ('float', 0.25, 'conducting fraction with clock gating')),
    ('tdreadout_clock_gating', ('bool', True, 'asynchronous clock gating')),
    ('tdreadout_autorange', ('bool', True, 'choose the gain setting per load')),
    ('tdreadout_max_retries', ('int', 3, 'auto-range retries of the targeted setting')),
    ('tdreadout_d_target', ('float', 0.1, 'auto-range target duty')),
    ('tdreadout_d_max', ('float', 0.45, 'auto-range largest accepted duty')),
    ('crossbar_rows', ('int', 11, 'grid rows')),
    ('crossbar_cols', ('int', 23, 'grid columns')),
    ('crossbar_mux_r_on', ('float', 50.0, 'MUX on-resistance per selected line [Ohm]')),
    ('crossbar_line_cap', ('float', 0.0, 'capacitance of every line to ground [F]')),
    ('crossbar_policy', ('str', 'floating', 'unselected lines: floating, grounded or driven_guard')),
    ('crossbar_acquisition', ('str', 'full-chain', 'frame acquisition: full-chain or ideal')),
    ('crossbar_grid', ('str?', None, 'grid CSV file')),
    ('crossbar_fixture', ('str', 'single_leg_neutral', 'gait fixture used when no grid file is set')),
    ('recon_method', ('str', 'gauss_newton', 'gauss_newton or fixed_point')),
    ('recon_max_iters', ('int', 50, 'iteration budget')),
    ('recon_tol', ('float', 1e-4, 'relative convergence tolerance')),
    ('recon_damping', ('float', 1e-3, 'initial Levenberg damping')),
    ('recon_r_min', ('float', 20.0, 'lower resistance clamp [Ohm]')),
    ('recon_r_max', ('float', 500e3, 'upper resistance clamp [Ohm]')),
    ('recon_fd_step', ('float', 1e-3, 'finite-difference step in log-conductance')),
    ('recon_r_ref', ('float', 20.0, 'reference resistance of the pressure transfer [Ohm]')),
    ('metrics_r_min', ('float', 20.0, 'smallest swept load [Ohm]')),
    ('metrics_r_max', ('float', 500e3, 'largest swept load [Ohm]')),
    ('metrics_n_loads', ('int', 25, 'number of log-spaced swept loads')),
    ('metrics_sweep_repeats', ('int', 1, 'repeats per swept load')),
    ('metrics_repeats', ('int', 1000, 'Monte-Carlo repeats per load')),
    ('metrics_mc_loads', ('floats', [1e3, 500e3], 'Monte-Carlo loads [Ohm]')),
    ('metrics_c_par', ('float', 2e-12, 'sense-path parasitic capacitance in sweeps [F]')),
    ('metrics_chips', ('int', 1, 'number of chips (mismatch seeds) in sweeps')),
    ('metrics_p_other', ('float', 41.2e-6, 'digital, PLL and DDS power [W]')),
    ('metrics_thd_points', ('int', 25, 'amplitudes in the THD sweep')),
    ('metrics_literal_enob', ('bool', False, 'use the ENOB footnote as printed')),
])

_CHECKS = {
    'float': lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    'int': lambda v: isinstance(v, int) and not isinstance(v, bool),
    'bool': lambda v: isinstance(v, bool),
    'str': lambda v: isinstance(v, str),
    'floats': lambda v: isinstance(v, (list, tuple)) and all(_CHECKS['float'](x) for x in v),
    'ints': lambda v: isinstance(v, (list, tuple)) and all(_CHECKS['int'](x) for x in v),
}


def _coerce(key, value):
    kind = CONFIG_SCHEMA[key][0]
    if kind.endswith('?'):
        if value is None:
            return None
        kind = kind[:-1]
    if not _CHECKS[kind](value):
        raise ConfigurationError(f"Config key {key} expects {CONFIG_SCHEMA[key][0]}, got {value!r}")
    if kind == 'float':
        return float(value)
    if kind == 'floats':
        return [float(x) for x in value]
    if kind == 'ints':
        return [int(x) for x in value]
    return value


def validate_config(config):
    """ Check keys and types, returning a coerced copy """
    unknown = [k for k in config if k not in CONFIG_SCHEMA]
    if unknown:
        raise ConfigurationError(f"Unknown config keys: {', '.join(sorted(unknown))}")
    return {k: _coerce(k, v) for k, v in config.items()}


def build_default_config():
    return {key: (list(default) if isinstance(default, list) else default)
            for key, (_, default, _) in CONFIG_SCHEMA.items()}


def flatten_config(raw):
    """ Flatten {"section": {"key": value}} into {"section_key": value}; flat keys pass through. """
    flat = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            if key not in CONFIG_SECTIONS:
                raise ConfigurationError(f"Unknown config section: {key}")
            for sub_key, sub_value in value.items():
                flat[f"{key}_{sub_key}"] = sub_value
        else:
            flat[key] = value
    return flat


def load_config_file(path):
    """ Read a JSON config file (sections or flat prefixed keys) and validate it. """
    if not os.path.exists(path):
        raise ConfigurationError(f"Config file not found at: {path}")
    try:
        with open(path) as infile:
            raw = json.load(infile)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Config file {path} is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise ConfigurationError(f"Config file {path} must hold a JSON object")
    return validate_config(flatten_config(raw))


def resolve_config(overrides=None, path=None):
    config = build_default_config()
    if path is not None:
        config.update(load_config_file(path))
    if overrides:
        config.update(validate_config(overrides))
    return config


def config_hash(config):
    """ md5 of the canonical JSON form of a resolved config """
    canonical = json.dumps(config, sort_keys=True, separators=(',', ':'))
    return hashlib.md5(canonical.encode('utf-8')).hexdigest()


def schema_help():
    rows = [[key, kind, json.dumps(default), text] for key, (kind, default, text) in CONFIG_SCHEMA.items()]
    return make_table(['Key', 'Type', 'Default', 'Description'], rows)


def ensure_dir(dir):
    Path(dir).mkdir(parents=True, exist_ok=True)


def set_logging_level(logging_level, verbose):
    # verbose overrides the level; None keeps it
    if verbose is not None:
        logging_level = 'INFO' if verbose else 'ERROR'

    # Set logging level
    logging_level = logging_level.upper()
    all_levels = ['DEBUG', 'INFO', 'WARNING', 'WARN', 'ERROR', 'CRITICAL', 'FATAL']
    if logging_level not in all_levels:
        raise ConfigurationError(f"Unrecognized logging level for pipeline: {logging_level}. Must be one of {', '.join(all_levels)}.")
    logger.setLevel(logging_level)
    return logging_level
