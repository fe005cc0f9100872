# ==========================
# channel_comm.py
# ==========================
"""
channel_comm.py - rayleigh fading, uplink rates and the TDMA slot budget
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gm_model import Seed

# relative slack on T so exact fits survive float rounding; used by every budget check
BUDGET_RTOL = 1e-12


#MARK: CommConfig
@dataclass(frozen=True)
class CommConfig:
    bandwidth: float = 1e6            # Hz
    noise_power: float = 1e-9         # W
    tx_power: float = 0.1             # W, common to all sensors
    path_loss: float = 0.01           # linear, -20 dB
    slot_duration: float = 3.2e-3     # s
    bits_per_feature: int = 32

    def __post_init__(self):
        for name in ("bandwidth", "noise_power", "tx_power", "path_loss", "slot_duration", "bits_per_feature"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def mean_rx_snr(self) -> float:
        return self.tx_power * self.path_loss / self.noise_power

    @property
    def mean_rx_snr_db(self) -> float:
        return 10 * math.log10(self.mean_rx_snr)

    def with_snr_db(self, snr_db: float) -> "CommConfig":
        """same link with tx power set to hit the given mean received SNR"""
        tx_power = db_to_linear(snr_db) * self.noise_power / self.path_loss
        return CommConfig(self.bandwidth, self.noise_power, tx_power, self.path_loss,
                          self.slot_duration, self.bits_per_feature)


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


#MARK: ChannelRealization
@dataclass(frozen=True, eq=False)
class ChannelRealization:
    gains: np.ndarray  # |h_m|^2
    rates: np.ndarray  # bits/s


def uplink_rates(gains, config: CommConfig) -> np.ndarray:
    """r_m = B log2(1 + P |h_m|^2 / N0)"""
    gains = np.asarray(gains, dtype=float)
    return config.bandwidth * np.log2(1.0 + config.tx_power * gains / config.noise_power)


def sample_channels(num_sensors: int, config: CommConfig, seed: Seed) -> ChannelRealization:
    """i.i.d. rayleigh block fading: |h|^2 = path_loss * Exp(1)"""
    if num_sensors < 1:
        raise ValueError(f"need at least one sensor, got {num_sensors}")
    rng = np.random.default_rng(seed)
    gains = config.path_loss * rng.exponential(1.0, size=num_sensors)
    return ChannelRealization(gains, uplink_rates(gains, config))


#MARK: budget
def max_feature_count(rates, config: CommConfig, feature_dim: int) -> int:
    """
    largest D~ <= D with sum_m Q D~ / r_m <= T for the given (selected) rates
    0 means not even one feature per sensor fits
    """
    rates = np.asarray(rates, dtype=float).ravel()
    if rates.size == 0:
        raise ValueError("no sensors selected")
    if np.any(rates <= 0):
        raise ValueError("selected sensor in outage (zero rate)")
    time_per_feature = config.bits_per_feature * np.sum(1.0 / rates)
    fit = math.floor(config.slot_duration * (1 + BUDGET_RTOL) / time_per_feature)
    return int(min(feature_dim, fit))


def check_budget(selection, num_features: int, config: CommConfig, rates) -> tuple[bool, np.ndarray]:
    """(fits, per-sensor upload times t_m) for uploading num_features from each selected sensor"""
    selection = np.asarray(selection, dtype=int).ravel()
    if selection.size == 0:
        return True, np.zeros(0)
    if num_features < 1:
        raise ValueError(f"feature count must be >= 1, got {num_features}")
    selected_rates = np.asarray(rates, dtype=float)[selection]
    with np.errstate(divide="ignore"):
        times = config.bits_per_feature * num_features / selected_rates
    fits = bool(np.sum(times) <= config.slot_duration * (1 + BUDGET_RTOL))
    return fits, times
