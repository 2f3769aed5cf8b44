"""
Test building the acquisition pipeline and single-channel conversions
"""

import math

import pytest

from tdzsim import Pipeline
from tdzsim.models.common.exceptions import ConfigurationError
from tdzsim.models.metrics.sweep import amplitude_sweep
from tdzsim.models.tdreadout.autorange import RangeSetting
from tdzsim.pipeline._constants import OPEN_CIRCUIT, SHORT_CIRCUIT
from tdzsim.pipeline.core import PipelineRequirementsException
from tdzsim.pipeline.processor import ProcessorRequirementsException
from tdzsim.utils.resources import build_default_config, config_hash
from tests import *

pytestmark = pytest.mark.sim


@pytest.fixture(scope="module")
def noiseless_pipeline():
    return Pipeline(seed=TEST_SEED, logging_level='WARNING', **NOISELESS)


def check_exception_vals(req_exception, req_exception_vals):
    """
    Check the values of a ProcessorRequirementsException against a dict of expected values.
    :param req_exception: the ProcessorRequirementsException to evaluate
    :param req_exception_vals: expected values for the ProcessorRequirementsException
    :return: None
    """
    assert isinstance(req_exception, ProcessorRequirementsException)
    assert req_exception.processor_type == req_exception_vals['processor_type']
    assert req_exception.processors_list == req_exception_vals['processors_list']
    assert req_exception.err_processor.requires == req_exception_vals['requires']


def test_missing_requirements():
    """
    Try to build pipelines with missing upstream stages and check thrown exceptions against gold exceptions.
    :return: None
    """
    bad_config_lists = [
        # driver without an excitation
        (
            {'processors': 'frontend'},
            [
                {'processor_type': 'FrontendProcessor', 'processors_list': ['frontend'],
                 'requires': set(['sigsynth'])},
            ]
        ),
        # readout without an excitation; the broken driver still counts as provided
        (
            {'processors': 'frontend,tdreadout'},
            [
                {'processor_type': 'FrontendProcessor', 'processors_list': ['frontend', 'tdreadout'],
                 'requires': set(['sigsynth'])},
                {'processor_type': 'TdreadoutProcessor', 'processors_list': ['frontend', 'tdreadout'],
                 'requires': set(['sigsynth', 'frontend'])},
            ]
        ),
    ]
    pipeline_fails = 0
    for bad_config, gold_exceptions in bad_config_lists:
        try:
            Pipeline(logging_level='WARNING', **bad_config)
        except PipelineRequirementsException as e:
            pipeline_fails += 1
            assert len(e.processor_req_fails) == len(gold_exceptions)
            for processor_req_e, gold_exception in zip(e.processor_req_fails, gold_exceptions):
                check_exception_vals(processor_req_e, gold_exception)
    assert pipeline_fails == 2


def test_unknown_processor_and_key():
    with pytest.raises(ConfigurationError):
        Pipeline(processors='sigsynth,adc', logging_level='WARNING')
    with pytest.raises(ConfigurationError):
        Pipeline(logging_level='WARNING', tdreadout_bogus=1)
    with pytest.raises(ConfigurationError):
        Pipeline(logging_level='WARNING', tdreadout_cycles_per_meas='six')


def test_logging_levels():
    with pytest.raises(ConfigurationError):
        Pipeline(logging_level='LOUD')
    assert Pipeline(logging_level='DEBUG', verbose=False).logging_level == 'ERROR'
    assert Pipeline(logging_level='DEBUG', verbose=True).logging_level == 'INFO'
    assert Pipeline(logging_level='warning').logging_level == 'WARNING'


def test_partial_pipeline_cannot_measure():
    pipeline = Pipeline(processors='sigsynth', logging_level='WARNING')
    with pytest.raises(ConfigurationError):
        pipeline.measure(15e3)


def test_default_operating_point():
    pipeline = Pipeline(logging_level='WARNING')
    assert pipeline.config_hash == config_hash(build_default_config())
    assert pipeline.f_exc == F_EXC
    assert pipeline.conversion_time == pytest.approx(T_MEAS)
    assert pipeline.default_setting == RangeSetting(64, 1, 0, 48)
    assert pipeline.load_list == ['sigsynth', 'frontend', 'tdreadout']


def test_fixed_setting_measurement(noiseless_pipeline):
    m = noiseless_pipeline.measure(20e3, setting=noiseless_pipeline.default_setting)
    assert m.ok
    assert rel_err(m.resistance, 20e3) < 0.005
    assert m.attempts == 1
    assert m.elapsed == pytest.approx(T_MEAS)
    assert m.counts.n0 == N0_EFFECTIVE


def test_autoranged_measurement(noiseless_pipeline):
    m = noiseless_pipeline.measure(WAVEFORM_LOAD)
    assert m.ok
    assert rel_err(m.resistance, WAVEFORM_LOAD) < 0.005
    assert m.elapsed == pytest.approx(m.attempts * T_MEAS)
    assert m.counts.duty <= 0.45


def test_short_and_open_loads(noiseless_pipeline):
    short = noiseless_pipeline.measure(0.0)
    assert SHORT_CIRCUIT in short.flags
    assert math.isnan(short.resistance)
    assert not short.ok
    assert short.to_dict()['flags'] == SHORT_CIRCUIT

    opened = noiseless_pipeline.measure(math.inf)
    assert OPEN_CIRCUIT in opened.flags
    assert not opened.ok


def test_same_stream_same_result():
    pipeline = Pipeline(seed=TEST_SEED, logging_level='WARNING')
    first = pipeline.measure(15e3, stream=(3, 1)).to_dict()
    second = pipeline.measure(15e3, stream=(3, 1)).to_dict()
    assert first == second
    other = pipeline.measure(15e3, stream=(3, 2)).to_dict()
    assert other['load_re'] == first['load_re']


def test_counts_grow_with_amplitude(noiseless_pipeline):
    rows = amplitude_sweep(WAVEFORM_LOAD, noiseless_pipeline, [16, 24, 32, 48, 64])
    n1 = [row[1] for row in rows]
    assert all(a < b for a, b in zip(n1, n1[1:]))
    assert all(row[4] == '' for row in rows)


def test_power_budget():
    pipeline = Pipeline(logging_level='WARNING')
    report = pipeline.power_budget()
    assert report.total == pytest.approx(TOTAL_POWER, rel=1e-3)
    assert report.components['readout'] == pytest.approx(READOUT_POWER)
    assert report.components['driver'] == pytest.approx(IDLE_DRIVER_POWER)
    assert report.frame_time == pytest.approx(FRAME_TIME)
    assert report.per_sensor == pytest.approx(TOTAL_POWER / N_SENSORS, rel=1e-3)
    assert report.energy_per_sensor == pytest.approx(TOTAL_POWER * FRAME_TIME / N_SENSORS, rel=1e-3)
    assert sum(report.shares.values()) == pytest.approx(1.0)
