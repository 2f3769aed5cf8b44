"""
Pipeline that runs sigsynth,frontend,tdreadout
"""

import io
import itertools
import logging

from tdzsim.pipeline._constants import *
from tdzsim.models.common.exceptions import ConfigurationError, ShortCircuitError
from tdzsim.models.common.measurement import Measurement
from tdzsim.models.common.utils import derive_rng
from tdzsim.models.frontend.driver import DriverState, driver_power
from tdzsim.models.metrics.scorer import budget
from tdzsim.models.tdreadout.autorange import AutoRangePolicy, RangeSetting, autorange
from tdzsim.models.tdreadout.readout import readout_power
from tdzsim.pipeline.processor import ProcessorRequirementsException
from tdzsim.pipeline.sigsynth_processor import SigsynthProcessor
from tdzsim.pipeline.frontend_processor import FrontendProcessor
from tdzsim.pipeline.tdreadout_processor import TdreadoutProcessor
from tdzsim.utils.resources import PIPELINE_NAMES, resolve_config, set_logging_level, config_hash, default_seed
from tdzsim.utils.helper_func import make_table

logger = logging.getLogger('tdzsim')

NAME_TO_PROCESSOR_CLASS = {SIGSYNTH: SigsynthProcessor, FRONTEND: FrontendProcessor, TDREADOUT: TdreadoutProcessor}

# model built by each stage, for the load table
PROCESSOR_MODELS = {SIGSYNTH: 'DDS + co-prime I-DAC + TI filter', FRONTEND: 'TC driver, adaptive bias',
                    TDREADOUT: 'interleaved comparator + demodulation'}


class PipelineRequirementsException(Exception):
    """
    Exception indicating one or more requirements failures while attempting to build a pipeline.
    Contains a ProcessorRequirementsException list.
    """

    def __init__(self, processor_req_fails):
        self._processor_req_fails = processor_req_fails
        self.build_message()

    @property
    def processor_req_fails(self):
        return self._processor_req_fails

    def build_message(self):
        err_msg = io.StringIO()
        print(*[req_fail.message for req_fail in self.processor_req_fails], sep='\n', file=err_msg)
        self.message = '\n\n' + err_msg.getvalue()

    def __str__(self):
        return self.message


def parse_processors(processors):
    """ Normalize 'sigsynth,frontend' or a list of names into execution order """
    if isinstance(processors, str):
        processors = [name.strip() for name in processors.split(',') if name.strip()]
    unknown = [name for name in processors if name not in NAME_TO_PROCESSOR_CLASS]
    if unknown:
        raise ConfigurationError(f"Unknown processors: {', '.join(unknown)}. Must be in {', '.join(PIPELINE_NAMES)}.")
    return [name for name in PIPELINE_NAMES if name in processors]


class Pipeline:
    """ The acquisition chain of one chip.

    Keyword arguments are `<stage>_<field>` config keys and override the values of the optional
    JSON `config` file, which in turn override the defaults.
    """

    def __init__(self, processors='sigsynth,frontend,tdreadout', config=None, seed=None, logging_level='INFO',
                 verbose=None, **kwargs):
        # set global logging level
        set_logging_level(logging_level, verbose)
        self.logging_level = logging.getLevelName(logger.level)

        self.config = resolve_config(kwargs, config)
        self.seed = default_seed() if seed is None else int(seed)
        self.config_hash = config_hash(self.config)

        self.load_list = parse_processors(processors)
        if len(self.load_list) == 0:
            raise ConfigurationError('No processor to load. Please check the processors list.')
        load_table = make_table(['Processor', 'Model'], [[name, PROCESSOR_MODELS[name]] for name in self.load_list])
        logger.info(f'Building acquisition stages (config {self.config_hash[:8]}, seed {self.seed}):\n{load_table}')

        # Load processors
        self.processors = {}

        # configs that are the same for all processors
        pipeline_level_configs = {'f_exc': self.config['sigsynth_f_exc'], 'f_clk': self.config['sigsynth_f_clk'],
                                  'phases': self.config['sigsynth_phases'],
                                  'cycles_per_meas': self.config['tdreadout_cycles_per_meas']}

        # set up processors
        pipeline_reqs_exceptions = []
        for processor_name in self.load_list:
            logger.debug('Loading: ' + processor_name)
            curr_processor_config = self.filter_config(processor_name, self.config)
            curr_processor_config.update(pipeline_level_configs)
            logger.debug('With settings: ')
            logger.debug(curr_processor_config)
            try:
                # try to build processor, throw an exception if there is a requirements issue
                self.processors[processor_name] = NAME_TO_PROCESSOR_CLASS[processor_name](config=curr_processor_config,
                                                                                          pipeline=self)
            except ProcessorRequirementsException as e:
                # if there was a requirements issue, add it to list which will be printed at end
                pipeline_reqs_exceptions.append(e)
                # add the broken processor to the loaded processors for the sake of analyzing the validity of the
                # entire proposed pipeline, but at this point the pipeline will not be built successfully
                self.processors[processor_name] = e.err_processor

        # if there are any processor exceptions, throw an exception to indicate pipeline build failure
        if pipeline_reqs_exceptions:
            logger.info('\n')
            raise PipelineRequirementsException(pipeline_reqs_exceptions)

        self.autorange_policy = AutoRangePolicy(d_target=self.config['tdreadout_d_target'],
                                                d_max=self.config['tdreadout_d_max'],
                                                max_retries=self.config['tdreadout_max_retries'])
        logger.debug("Done loading processors!")

    def filter_config(self, prefix, config_dict):
        filtered_dict = {}
        for key in config_dict.keys():
            k, v = key.split('_', 1) # split frontend_mirror_ratio to frontend+mirror_ratio
            if k == prefix:
                filtered_dict[v] = config_dict[key]
        return filtered_dict

    @property
    def loaded_processors(self):
        """
        Return all currently loaded processors in execution order.
        :return: list of Processor instances
        """
        return [self.processors[processor_name] for processor_name in PIPELINE_NAMES if self.processors.get(processor_name)]

    @property
    def mirror_steps(self):
        return tuple(self.config['frontend_mirror_steps'])

    @property
    def offset_lsb(self):
        return self.config['tdreadout_offset_lsb']

    @property
    def f_exc(self):
        return self.config['sigsynth_f_exc']

    @property
    def conversion_time(self):
        """ Model time of one conversion, cycles_per_meas / f_exc """
        return self.config['tdreadout_cycles_per_meas'] / self.f_exc

    @property
    def default_setting(self):
        """ The fixed gain setting used when auto-ranging is off """
        return RangeSetting(self.config['sigsynth_amp_code'], self.config['frontend_mirror_ratio'],
                            self.config['tdreadout_offset_code_p'], self.config['tdreadout_offset_code_n'])

    def process(self, measurement):
        # run the pipeline
        for processor_name in PIPELINE_NAMES:
            if self.processors.get(processor_name):
                measurement = self.processors[processor_name].process(measurement)
        return measurement

    def __call__(self, measurement):
        assert isinstance(measurement, Measurement), 'input should be a Measurement'
        return self.process(measurement)

    def measure(self, load, seed=None, stream=(), setting=None, autorange_enabled=None):
        """ Measure one load through the whole chain.

        Args:
            load: complex impedance presented to the driver (Ohm).
            seed: master seed; the pipeline seed when None.
            stream: integer indices identifying this work item, e.g. (sensor, repeat); the noise of
                every conversion is drawn from the stream (seed, *stream, attempt).
            setting: a RangeSetting to measure with; disables auto-ranging.
            autorange_enabled: override the tdreadout_autorange config key.

        Returns:
            the final Measurement, with failures recorded in its flags.
        """
        missing = [name for name in PIPELINE_NAMES if name not in self.processors]
        if missing:
            raise ConfigurationError(f"measure() needs the full acquisition chain; missing {', '.join(missing)}")
        seed = self.seed if seed is None else seed
        if autorange_enabled is None:
            autorange_enabled = self.config['tdreadout_autorange']
        attempt = itertools.count()

        def measure_once(s):
            m = Measurement(load, s, rng=derive_rng(seed, *stream, next(attempt)))
            try:
                return self.process(m)
            except ShortCircuitError as e:
                logger.debug(str(e))
                m.flags.add(SHORT_CIRCUIT)
                return m

        if setting is None and autorange_enabled:
            m = autorange(measure_once, self.autorange_policy, self.mirror_steps, self.offset_lsb)
        else:
            m = measure_once(setting or self.default_setting)
        m.elapsed = m.attempts * self.conversion_time
        if not m.ok:
            logger.debug(f"Measurement of {complex(load)} Ohm flagged: {', '.join(sorted(m.flags))}")
        return m

    def power_budget(self, n_sensors=None, frame_time=None, driver_trace=None):
        """ Power budget of the chip: driver (idle unless a driver trace is given), readout and the
        remaining digital/PLL/DDS blocks.
        """
        driver_spec = self.processors[FRONTEND].spec
        readout_spec = self.processors[TDREADOUT].spec
        trace = driver_trace if driver_trace is not None else DriverState.idle(driver_spec)
        components = {
            'driver': driver_power(driver_spec, trace),
            'readout': readout_power(readout_spec),
            'other': self.config['metrics_p_other'],
        }
        if n_sensors is None:
            n_sensors = self.config['crossbar_rows'] * self.config['crossbar_cols']
        if frame_time is None:
            frame_time = n_sensors * self.conversion_time
        return budget(components, n_sensors, frame_time)
