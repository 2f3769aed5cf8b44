"""
Published figures of comparable sensor-interface chips, recomputed with the same arithmetic as
this simulator (power and energy per sensor, ENOB from SNR, FoM).
"""

import math
from dataclasses import dataclass
from typing import Optional

from tdzsim.models.metrics.scorer import enob_from_snr, fom_db


@dataclass(frozen=True)
class PublishedChip:
    """ One column of a published comparison

    Params:
        label           - short name of the chip
        n_sensors       - sensors per frame (equivalent measurements for tomography)
        power_uw        - total power [uW]
        frame_ms        - max conversion time per frame [ms], None when not published
        snr_db          - max SNR [dB]
        enob            - published ENOB
        fom_db          - published FoM [dB], None when not published
        power_per_sensor_uw - published power per sensor [uW]
        energy_nj       - published energy per sensor [nJ], None when not published
    """
    label: str
    n_sensors: int
    power_uw: float
    frame_ms: Optional[float]
    snr_db: float
    enob: float
    fom_db: Optional[float]
    power_per_sensor_uw: float
    energy_nj: Optional[float]


PUBLISHED = (
    PublishedChip('wireless-32ch', 32, 70.0, None, 77.7, 11.4, None, 2.2, None),
    PublishedChip('rc-delay-1ch', 1, 12.79, 11.52, 71.0, 10.3, 79.3, 12.79, 147.3),
    PublishedChip('eit-td-208', 208, 1760.0, 2.81, 52.7, 7.3, 68.9, 8.46, 23.7),
    PublishedChip('rc-72ch', 72, 53.0, 112.5, 70.0, 10.1, 80.8, 0.74, 83.3),
    PublishedChip('this-chip', 253, 158.0, 12.2, 71.1, 10.3, 92.3, 0.62, 7.5),
)

COMPARISON_HEADER = ['label', 'n_sensors', 'power_uw', 'frame_ms', 'snr_db',
                     'power_per_sensor_uw', 'power_per_sensor_uw_recomputed',
                     'energy_nj', 'energy_nj_recomputed',
                     'enob', 'enob_recomputed', 'enob_delta',
                     'fom_db', 'fom_db_recomputed', 'fom_delta']


def _delta(recomputed, published):
    if published is None or math.isnan(recomputed):
        return math.nan
    return recomputed - published


def recompute(chip):
    """ Row of COMPARISON_HEADER for one published chip; nan where an input is not published """
    nan = math.nan
    per_sensor = chip.power_uw / chip.n_sensors
    energy = chip.power_uw * chip.frame_ms / chip.n_sensors if chip.frame_ms else nan
    bits = enob_from_snr(chip.snr_db)
    fom = fom_db(chip.snr_db, chip.n_sensors, chip.frame_ms, chip.power_uw / 1e3) if chip.frame_ms else nan
    return [chip.label, chip.n_sensors, chip.power_uw, chip.frame_ms if chip.frame_ms else nan, chip.snr_db,
            chip.power_per_sensor_uw, per_sensor,
            chip.energy_nj if chip.energy_nj is not None else nan, energy,
            chip.enob, bits, _delta(bits, chip.enob),
            chip.fom_db if chip.fom_db is not None else nan, fom, _delta(fom, chip.fom_db)]


def comparison_rows(chips=PUBLISHED, simulated=None):
    """ Rows for every published chip, plus a row for a simulated chip when given """
    rows = [recompute(chip) for chip in chips]
    if simulated is not None:
        rows.append(recompute(simulated))
    return rows
