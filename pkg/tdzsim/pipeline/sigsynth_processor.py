"""
Processor for synthesizing the sine excitation
"""

import logging

import numpy as np

from tdzsim.models.sigsynth.dac import CoPrimeDacSpec
from tdzsim.models.sigsynth.dds import ExcitationSpec
from tdzsim.models.sigsynth.generator import SineGenerator
from tdzsim.models.tdreadout.readout import interleaved_times
from tdzsim.pipeline._constants import *
from tdzsim.pipeline.processor import StageProcessor

logger = logging.getLogger('tdzsim')


class SigsynthProcessor(StageProcessor):

    # set of processor requirements this processor fulfills
    PROVIDES_DEFAULT = set([SIGSYNTH])
    # set of processor requirements for this processor
    REQUIRES_DEFAULT = set([])

    def _set_up_model(self, config):
        self._spec = ExcitationSpec(f_exc=config['f_exc'], amp_code=config['amp_code'], f_clk=config['f_clk'],
                                    lut_bits=config['lut_bits'], phases=config['phases'],
                                    enforce_range=config['enforce_range'], test_mode=config['test_mode'])
        self._dac_spec = CoPrimeDacSpec(coarse_units=config['coarse_units'], fine_units=config['fine_units'],
                                        unit_mismatch_sigma=config['mismatch_sigma'],
                                        dem_enabled=config['dem_enabled'])
        self._generator = SineGenerator(self._spec, self._dac_spec, chip_seed=config['chip_seed'],
                                        periods=config['cycles_per_meas'], cutoff_ratio=config['ti_cutoff_ratio'],
                                        max_harmonic=config['max_harmonic'])
        self._times = interleaved_times(self._spec.f_clk, self._spec.f_exc, config['cycles_per_meas'],
                                        self._spec.phases)
        self._records = {}

    def mark_inactive(self):
        super().mark_inactive()
        self._generator = None
        self._records = {}

    @property
    def generator(self):
        return self._generator

    @property
    def dac_spec(self):
        return self._dac_spec

    def excitation_record(self, amp_code):
        """ Analytic V_in over one settling period followed by the conversion window """
        if amp_code not in self._records:
            times = self._times
            # the settling period fills the driver's peak estimator
            record = np.concatenate([times[0] - 1 / self._spec.f_exc, times.ravel()])
            self._records[amp_code] = self._generator.signal(amp_code).analytic(record)
        return self._records[amp_code]

    def process(self, measurement):
        amp_code = measurement.setting.amp_code
        signal = self._generator.signal(amp_code)
        measurement.excitation = signal
        measurement.v_m = signal.amplitude
        measurement.theta_ref = signal.sine_phase
        measurement.sample_times = self._times
        measurement.v_in = self.excitation_record(amp_code)
        measurement.settle = self._times.shape[1]
        return measurement
