"""
Utility functions.
"""
import json
import math
import logging

import numpy as np

logger = logging.getLogger('tdzsim')

# random streams
def derive_rng(master_seed, *indices):
    """ Build an independent generator for the stream identified by (master_seed, *indices).

    The same (seed, indices) pair always yields the same stream, whatever order the streams are
    consumed in, so work items can be scheduled on any number of workers.
    """
    spawn_key = tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(master_seed), spawn_key=spawn_key))

# phase helpers
def wrap_phase(x):
    """ Wrap an angle (scalar or array) into (-pi, pi]. """
    wrapped = x - 2 * np.pi * np.ceil((x - np.pi) / (2 * np.pi))
    if np.isscalar(x):
        return float(wrapped)
    return wrapped

def resistance_from_impedance(z):
    """ Parallel-equivalent resistance 1/Re(1/Z); robust against shunt capacitance. """
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide='ignore', invalid='ignore'):
        g = np.real(1.0 / z)
        r = np.where(g > 0, 1.0 / np.where(g > 0, g, 1.0), np.inf)
    if r.ndim == 0:
        return float(r)
    return r

def log_spaced(lo, hi, n):
    """ n points geometrically spaced from lo to hi (inclusive). """
    if n == 1:
        return [float(lo)]
    return [float(v) for v in np.geomspace(lo, hi, n)]

def is_integer_ratio(num, den, rtol=1e-9):
    ratio = num / den
    return abs(ratio - round(ratio)) <= rtol * max(1.0, abs(ratio))

def db20(x):
    return 20 * math.log10(x)

# config
def save_config(config, path, verbose=True):
    with open(path, 'w') as outfile:
        json.dump(config, outfile, indent=2, sort_keys=True)
    if verbose:
        logger.info("Config saved to file {}".format(path))
    return config

def print_config(config):
    info = "Running with the following configs:\n"
    for k, v in sorted(config.items()):
        info += "\t{} : {}\n".format(k, str(v))
    logger.debug("\n" + info)
