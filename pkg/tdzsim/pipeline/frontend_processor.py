"""
Processor for driving the load and mirroring its current to the comparator
"""

import dataclasses
import logging

from tdzsim.models.frontend.driver import DriverSpec, drive_trace
from tdzsim.pipeline._constants import *
from tdzsim.pipeline.processor import StageProcessor

logger = logging.getLogger('tdzsim')


class FrontendProcessor(StageProcessor):

    # set of processor requirements this processor fulfills
    PROVIDES_DEFAULT = set([FRONTEND])
    # set of processor requirements for this processor
    REQUIRES_DEFAULT = set([SIGSYNTH])

    def _set_up_model(self, config):
        self._spec = DriverSpec(i_bias_q=config['i_bias_q'], i_limit=config['i_limit'],
                                i_adp_step=config['i_adp_step'], adp_max_steps=config['adp_max_steps'],
                                hysteresis=config['hysteresis'], adaptive_enabled=config['adaptive_enabled'],
                                mirror_ratio=config['mirror_ratio'], mirror_steps=tuple(config['mirror_steps']),
                                beta=config['beta'], supply_v=config['supply_v'], i_cm=config['i_cm'],
                                noise_sigma=config['noise_sigma'])

    def process(self, measurement):
        spec = self._spec
        if measurement.setting.mirror_ratio != spec.mirror_ratio:
            spec = dataclasses.replace(spec, mirror_ratio=measurement.setting.mirror_ratio)
        response = drive_trace(spec, measurement.v_in, measurement.load, window=measurement.settle,
                               rng=measurement.rng)
        if response.event_count:
            logger.debug(f"Adaptive bias changed {response.event_count} time(s), final bias "
                         f"{response.final_state.i_bias_total * 1e6:.1f} uA")
        measurement.driver = response.tail(measurement.sample_times.size)
        measurement.diff_current = measurement.driver.diff.reshape(measurement.sample_times.shape)
        return measurement
