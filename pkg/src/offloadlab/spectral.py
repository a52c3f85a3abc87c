"""Spectral efficiency of the device-to-edge uplink under mobility.

The uplink is modelled as a delay-Doppler style waveform whose usable
spectral efficiency degrades as the Doppler spread grows relative to the
subcarrier spacing.  The degradation factor 1 / (1 + nu^2), with nu the
Doppler shift normalised by the subcarrier spacing, stands in for a full
receiver simulation: it is exact at zero speed and falls off smoothly as
mobility increases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SE_MAX = 64.0  # spectral efficiencies beyond this are treated as malformed


@dataclass(frozen=True)
class SpectralConfig:
    """Waveform-level constants shared by every uplink in a scenario."""

    bandwidth_hz: float = 1e6
    num_users: int = 5
    frame_time_s: float = 10e-3
    subcarrier_spacing_hz: float = 100e3
    light_speed_mps: float = 3e8
    snr_linear: float = 100.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be > 0")
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if self.frame_time_s <= 0:
            raise ValueError("frame_time_s must be > 0")
        if self.subcarrier_spacing_hz <= 0:
            raise ValueError("subcarrier_spacing_hz must be > 0")
        if self.light_speed_mps <= 0:
            raise ValueError("light_speed_mps must be > 0")
        if self.snr_linear <= 0:
            raise ValueError("snr_linear must be > 0")


def doppler_shift(speed_mps: float, carrier_freq_hz: float,
                  light_speed_mps: float = 3e8) -> float:
    """Doppler shift in Hz for a device moving at speed_mps."""
    if speed_mps < 0:
        raise ValueError("speed_mps must be >= 0")
    if carrier_freq_hz <= 0:
        raise ValueError("carrier_freq_hz must be > 0")
    if light_speed_mps <= 0:
        raise ValueError("light_speed_mps must be > 0")
    return speed_mps * carrier_freq_hz / light_speed_mps


def calc_se(speed_mps: float, carrier_freq_hz: float,
            config: SpectralConfig | None = None) -> float:
    """Spectral efficiency (bit/s/Hz) of the uplink at the given mobility.

    At zero speed this is log2(1 + snr).  Moving devices see the SNR scaled
    by 1 / (1 + nu^2) where nu = doppler / subcarrier spacing, so the value
    decreases monotonically with speed and stays strictly positive.
    """
    cfg = config if config is not None else SpectralConfig()
    shift = doppler_shift(speed_mps, carrier_freq_hz, cfg.light_speed_mps)
    nu = shift / cfg.subcarrier_spacing_hz
    damping = 1.0 / (1.0 + nu * nu)
    return math.log2(1.0 + cfg.snr_linear * damping)


def _quantize(value: float) -> str:
    # 1e-6 relative precision: inputs closer than that share a cache slot
    return "%.6e" % value


class SpectralEfficiencyCache:
    """Memoised calc_se keyed on (speed, carrier frequency).

    Both coordinates take part in the key; two devices at the same speed but
    on different carriers never share an entry.  Keys are quantised to 1e-6
    relative precision so that noise below physical relevance does not grow
    the table.  A cache hit returns the stored float unchanged, bit for bit.

    Instances are callable with (speed_mps, carrier_freq_hz) and can be
    handed anywhere an se provider is expected.  Writes are not locked; keep
    a cache confined to one worker when running scenarios in parallel.
    """

    def __init__(self, config: SpectralConfig | None = None):
        self.config = config if config is not None else SpectralConfig()
        self._table: dict[tuple[str, str], float] = {}

    def __call__(self, speed_mps: float, carrier_freq_hz: float) -> float:
        key = (_quantize(speed_mps), _quantize(carrier_freq_hz))
        hit = self._table.get(key)
        if hit is not None:
            return hit
        value = calc_se(speed_mps, carrier_freq_hz, self.config)
        self._table[key] = value
        return value

    def __len__(self) -> int:
        return len(self._table)

    def clear(self) -> None:
        self._table.clear()
