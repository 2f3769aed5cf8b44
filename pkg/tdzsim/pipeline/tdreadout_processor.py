"""
Processor for the time-domain readout: comparator bits, counts, phasor and impedance
"""

import dataclasses
import logging

from tdzsim.models.common.exceptions import InconsistentCountsError, OpenCircuitError, OutOfRangeError
from tdzsim.models.tdreadout.demod import demodulate, to_impedance
from tdzsim.models.tdreadout.readout import ReadoutSpec, extract_counts, sample_bits
from tdzsim.pipeline._constants import *
from tdzsim.pipeline.processor import StageProcessor

logger = logging.getLogger('tdzsim')


class TdreadoutProcessor(StageProcessor):

    # set of processor requirements this processor fulfills
    PROVIDES_DEFAULT = set([TDREADOUT])
    # set of processor requirements for this processor
    REQUIRES_DEFAULT = set([SIGSYNTH, FRONTEND])

    def _set_up_model(self, config):
        self._spec = ReadoutSpec(f_clk=config['f_clk'], phases=config['phases'],
                                 cycles_per_meas=config['cycles_per_meas'], offset_code_p=config['offset_code_p'],
                                 offset_code_n=config['offset_code_n'], offset_lsb=config['offset_lsb'],
                                 noise_sigma=config['noise_sigma'], jitter_sigma=config['jitter_sigma'],
                                 merge=config['merge'], e_conv=config['e_conv'], duty_gate=config['duty_gate'],
                                 clock_gating=config['clock_gating'])
        self._f_exc = config['f_exc']

    def process(self, measurement):
        setting = measurement.setting
        spec = dataclasses.replace(self._spec, offset_code_p=setting.offset_code_p,
                                   offset_code_n=setting.offset_code_n)
        measurement.bits = sample_bits(spec, measurement.diff_current, self._f_exc, seed=measurement.rng)
        measurement.counts = extract_counts(measurement.bits, spec)
        measurement.elapsed += spec.conversion_time(self._f_exc)
        try:
            measurement.phasor = demodulate(measurement.counts, spec.i_th)
            measurement.z = to_impedance(measurement.phasor, measurement.v_m, setting.mirror_ratio,
                                         measurement.theta_ref)
        except OutOfRangeError as e:
            logger.debug(str(e))
            measurement.flags.add(SATURATION)
        except InconsistentCountsError as e:
            logger.debug(str(e))
            measurement.flags.add(INCONSISTENT_COUNTS)
        except OpenCircuitError:
            measurement.flags.add(OPEN_CIRCUIT)
        return measurement
