"""
The complete excitation path: DDS table -> co-prime I-DAC -> TI filter -> amplitude scaling
"""

import dataclasses
import logging

import numpy as np

from tdzsim.models.sigsynth.analysis import ti_filter
from tdzsim.models.sigsynth.dac import CoPrimeDac, lut_to_dac_code
from tdzsim.models.sigsynth.dds import lut_codes
from tdzsim.models.sigsynth.waveform import PeriodicSignal, Waveform

logger = logging.getLogger('tdzsim')


class SineGenerator:
    """ Produces the excitation V_in for a given amplitude code.

    The DAC runs over a record of `periods` excitation periods (one measurement window) with the
    chip's frozen mismatch; the TI filter then removes DC and attenuates the quantization and
    mismatch harmonics.  Results are cached per amplitude code.
    """

    def __init__(self, excitation_spec, dac_spec, chip_seed=0, periods=6, cutoff_ratio=2.0, max_harmonic=64):
        self.excitation_spec = excitation_spec
        self.dac_spec = dac_spec
        self.chip_seed = chip_seed
        self.periods = periods
        self.cutoff_ratio = cutoff_ratio
        self.max_harmonic = max_harmonic
        self._unit_signal = None
        self._cache = {}

    def _build_unit_signal(self):
        """ Excitation at full-scale amplitude normalized to a 1 V peak """
        spec = self.excitation_spec
        ticks = np.arange(self.periods * spec.ticks_per_period)
        codes = lut_to_dac_code(lut_codes(spec, ticks), self.dac_spec)
        dac = CoPrimeDac(self.dac_spec, self.chip_seed)
        currents = dac.convert(codes)
        mid = self.dac_spec.max_code / 2 * self.dac_spec.i_unit
        w = Waveform((currents - mid) / mid, spec.f_clk, 'V', spec.f_exc)
        filtered = ti_filter(w, self.cutoff_ratio * spec.f_exc)
        logger.debug(f"Built excitation record: {len(w)} samples, DEM pointers {dac.pointers}")
        return PeriodicSignal.from_waveform(filtered, self.max_harmonic)

    def signal(self, amp_code):
        """ V_in as a PeriodicSignal for the amplitude code (amplitude scaled after the DAC) """
        if amp_code not in self._cache:
            if self._unit_signal is None:
                self._unit_signal = self._build_unit_signal()
            spec = dataclasses.replace(self.excitation_spec, amp_code=amp_code)
            self._cache[amp_code] = self._unit_signal.scaled(spec.v_peak)
        return self._cache[amp_code]
