"""
Load sweeps, Monte-Carlo repeats, amplitude sweeps and chip-to-chip spread through the full chain.

Every conversion draws its noise from the stream (seed, load index, repeat index), so the
results do not depend on the number of workers or the order in which work items finish.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Set

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from tdzsim.models.common.exceptions import ConfigurationError
from tdzsim.models.common.utils import log_spaced
from tdzsim.models.metrics.scorer import enob, relative_error, snr_db, snr_flags
from tdzsim.models.tdreadout.autorange import RangeSetting
from tdzsim.models.tdreadout.readout import OFFSET_CODE_MAX
from tdzsim.pipeline._constants import FAILURE_FLAGS
from tdzsim.pipeline.core import Pipeline

logger = logging.getLogger('tdzsim')


def load_impedance(r, c_par, f):
    """ R in parallel with C at frequency f """
    if c_par == 0:
        return complex(r)
    return complex(r / (1 + 2j * np.pi * f * r * c_par))


def sweep_loads(config):
    return log_spaced(config['metrics_r_min'], config['metrics_r_max'], config['metrics_n_loads'])


def _chunks(n, n_jobs):
    size = max(1, math.ceil(n / max(1, 4 * n_jobs)))
    return [(start, min(n, start + size)) for start in range(0, n, size)]


def _measure_block(pipeline, z, seed, k, start, stop, setting):
    """ Compact records (resistance, n1, flags) of repeats start..stop-1 of load k """
    out = []
    for r in range(start, stop):
        m = pipeline.measure(z, seed=seed, stream=(k, r), setting=setting)
        out.append((m.resistance, m.counts.n1 if m.counts is not None else 0, frozenset(m.flags)))
    return out


def _run(pipeline, jobs, seed, n_jobs, verbose, desc):
    """ jobs: list of (key, z, k, repeats, setting, offset); returns {key: list of records} in order """
    work = [(key, z, k, start + offset, stop + offset, setting)
            for key, z, k, repeats, setting, offset in jobs for start, stop in _chunks(repeats, n_jobs)]
    blocks = Parallel(n_jobs=n_jobs)(delayed(_measure_block)(pipeline, z, seed, k, start, stop, setting)
                                     for key, z, k, start, stop, setting in tqdm(work, desc=desc, disable=not verbose))
    results = {}
    for (key, *_), block in zip(work, blocks):
        results.setdefault(key, []).extend(block)
    return results


@dataclass
class SweepRow:
    """ Statistics of the repeated readings of one load

    Params:
        load      - true resistance [Ohm]
        mean_r    - mean reading [Ohm]
        std_r     - population standard deviation [Ohm]
        rel_err   - |mean_r - load| / load
        snr_db    - 20 log10(mean / std), nan with a single reading
        enob      - effective bits of the readings
        n_ok      - readings without failure flags
        flags     - union of the flags of all readings
    """
    load: float
    mean_r: float
    std_r: float
    rel_err: float
    snr_db: float
    enob: float
    n_ok: int
    flags: Set[str] = field(default_factory=set)

    @property
    def failed(self):
        return bool(self.flags & FAILURE_FLAGS)

    def as_tuple(self):
        return (self.load, self.mean_r, self.std_r, self.rel_err, self.snr_db, self.enob, self.n_ok,
                '|'.join(sorted(self.flags)))


SWEEP_HEADER = ['load', 'mean_r', 'std_r', 'mean_rel_err', 'snr_db', 'enob', 'n_ok', 'flags']


def summarize(load, records, literal_enob=False):
    readings = np.array([r for r, _, flags in records if not flags & FAILURE_FLAGS], dtype=float)
    flags = set().union(*[flags for _, _, flags in records])
    if readings.size == 0:
        return SweepRow(load, math.nan, math.nan, math.nan, math.nan, math.nan, 0, flags)
    mean = float(readings.mean())
    std = float(readings.std())
    snr = bits = math.nan
    if readings.size >= 2:
        snr = snr_db(readings)
        bits = enob(readings, literal_enob)
        flags |= snr_flags(snr)
    return SweepRow(load, mean, std, relative_error(mean, load), snr, bits, int(readings.size), flags)


@dataclass
class SweepResult:
    rows: List[SweepRow]

    @property
    def included(self):
        return [row for row in self.rows if not row.failed]

    @property
    def mean_rel_err(self):
        """ Headline error: mean over loads without failure flags """
        errors = [row.rel_err for row in self.included]
        return float(np.mean(errors)) if errors else math.nan

    @property
    def max_snr(self):
        values = [row.snr_db for row in self.included if np.isfinite(row.snr_db)]
        return max(values) if values else math.nan


def error_sweep(loads, pipeline, repeats=1, c_par=0.0, seed=None, n_jobs=1, verbose=False):
    """ Full-chain readings of each load with auto-ranging; rows of (load, mean_rel_err, snr_db, ...) """
    if repeats < 1:
        raise ConfigurationError("repeats must be at least 1")
    f = pipeline.f_exc
    jobs = [(k, load_impedance(load, c_par, f), k, repeats, None, 0) for k, load in enumerate(loads)]
    results = _run(pipeline, jobs, seed, n_jobs, verbose, 'Sweep')
    literal = pipeline.config['metrics_literal_enob']
    rows = [summarize(float(load), results[k], literal) for k, load in enumerate(loads)]
    result = SweepResult(rows)
    for row in rows:
        if row.failed:
            logger.warning(f"Load {row.load:.6g} Ohm flagged ({', '.join(sorted(row.flags))}); "
                           f"excluded from the mean error")
    logger.info("Loads\tMean error(%)\tMax SNR(dB)")
    logger.info("{}\t{:.3f}\t{:.2f}".format(len(result.included), result.mean_rel_err * 100, result.max_snr))
    return result


def montecarlo(loads, pipeline, repeats=1000, c_par=0.0, seed=None, n_jobs=1, verbose=False):
    """ Repeated readings at a gain setting fixed by one auto-ranged reading of each load """
    if repeats < 2:
        raise ConfigurationError("Monte-Carlo needs at least 2 repeats")
    f = pipeline.f_exc
    jobs = []
    for k, load in enumerate(loads):
        z = load_impedance(load, c_par, f)
        trial = pipeline.measure(z, seed=seed, stream=(k, 0))
        logger.debug(f"Load {load:.6g} Ohm ranged to {trial.setting}")
        jobs.append((k, z, k, repeats, trial.setting, 1))
    results = _run(pipeline, jobs, seed, n_jobs, verbose, 'Monte-Carlo')
    literal = pipeline.config['metrics_literal_enob']
    result = SweepResult([summarize(float(load), results[k], literal) for k, load in enumerate(loads)])
    logger.info("Load(Ohm)\tSNR(dB)\tENOB")
    for row in result.rows:
        logger.info("{:.6g}\t{:.2f}\t{:.2f}".format(row.load, row.snr_db, row.enob))
    return result


def amplitude_sweep(load, pipeline, amp_codes, mirror_ratio=1, offset_code=None, seed=None):
    """ Rows (amp_code, n1, n2, resistance, flags) at a fixed mirror ratio and threshold """
    amp_codes = sorted(amp_codes)
    lsb = pipeline.offset_lsb
    if offset_code is None:
        i_min = mirror_ratio * RangeSetting(amp_codes[0], mirror_ratio).v_peak() / abs(load)
        offset_code = int(min(OFFSET_CODE_MAX, max(1, math.floor(0.5 * i_min / lsb))))
    rows = []
    for k, code in enumerate(amp_codes):
        setting = RangeSetting(code, mirror_ratio, 0, offset_code)
        m = pipeline.measure(load, seed=seed, stream=(k,), setting=setting)
        c = m.counts
        rows.append((code, c.n1 if c else 0, c.n2 if c else 0, m.resistance, '|'.join(sorted(m.flags))))
    return rows


def chip_spread(loads, pipeline, chips, repeats=1, c_par=0.0, seed=None, n_jobs=1, verbose=False):
    """ error_sweep on `chips` chips differing only in their DAC mismatch seed.

    Returns (per-chip SweepResults, mean headline error across chips).
    """
    results = []
    for chip in range(chips):
        config = dict(pipeline.config, sigsynth_chip_seed=pipeline.config['sigsynth_chip_seed'] + chip)
        chip_pipeline = Pipeline(processors=pipeline.load_list, seed=pipeline.seed,
                                 logging_level=pipeline.logging_level, **config)
        results.append(error_sweep(loads, chip_pipeline, repeats, c_par, seed, n_jobs, verbose))
    errors = [r.mean_rel_err for r in results]
    logger.info("Chips\tMean error(%)\tSpread(%)")
    logger.info("{}\t{:.3f}\t{:.3f}".format(chips, np.mean(errors) * 100, (max(errors) - min(errors)) * 100))
    return results, float(np.mean(errors))
