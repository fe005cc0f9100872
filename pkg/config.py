# ==========================
# config.py
# ==========================
"""
config.py - all configuration in one place
experiment settings live in one dataclass; config files are flat key=value lines
(parsed with python-dotenv) so runs are easy to diff and re-run
"""

import dataclasses
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Union, get_args, get_origin, get_type_hints

import numpy as np
from dotenv import dotenv_values

from accuracy_model import Ordering
from channel_comm import CommConfig
from errors import ConfigError
from selection import Scheme

logger = logging.getLogger(__name__)

SWEEP_AXES = ("snr_db", "prior_relevance", "num_sensors")

# stream tags keep the random streams of a run apart (see seed_for)
MODEL_STREAM, CALIBRATION_STREAM, SCENARIO_STREAM, CHANNEL_STREAM, SCHEME_STREAM, ORACLE_STREAM = range(6)


#MARK: ExperimentConfig
@dataclass(frozen=True)
class ExperimentConfig:
    """
    central configuration for a simulation run
    defaults reproduce the synthetic setup (L=40, D=100, M=12, pi_r=0.4)
    """
    # gaussian-mixture model
    num_classes: int = 40
    feature_dim: int = 100
    centroid_radius: float = 10.0  # large enough that relevant views clear the Psi >= 0 threshold
    cov_low: float = 0.01  # floor keeps Mahalanobis weights finite
    cov_high: float = 1.0

    # sensing
    num_sensors: int = 12
    prior_relevance: float = 0.4
    query_noise_factor: float = 3.0  # query variance relative to observation variance
    key_dim: int = 30
    temperature: float = 10.0  # on the scale of the relevant-score spread

    # uplink
    bandwidth: float = 1e6  # Hz
    noise_power: float = 1e-9  # W
    path_loss: float = 0.01  # -20 dB
    slot_duration: Optional[float] = None  # s, empty -> one full upload at 0 dB mean SNR
    bits_per_feature: int = 32
    snr_db: float = 0.0  # mean received SNR when SNR is not the sweep axis

    # run
    ordering: str = "both"  # random | importance | both
    schemes: tuple[str, ...] = ("proposed-random", "proposed-importance", "when2com",
                                "best-channel", "all-attentive", "all-average")
    trials: int = 2000
    bound_trials: int = 20000
    base_seed: int = 0
    sweep_axis: str = "snr_db"
    sweep_values: tuple[float, ...] = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    calibration_samples: int = 100_000
    best_channel_k: int = 4
    exhaustive_limit: int = 12

    # oracle gap
    oracle_instances: int = 200
    oracle_sensors_random: int = 10
    oracle_sensors_importance: int = 8
    oracle_feature_dim: int = 12

    # output
    record_trials: bool = False  # per-trial csv next to the summary
    log_config: str = "run_logger_config.json"

    def __post_init__(self):
        self.validate()

    #MARK: validation
    def validate(self) -> None:
        """raise ConfigError on anything the simulation can't run with"""
        problems = []
        if self.num_classes < 2:
            problems.append("num_classes must be >= 2")
        if self.feature_dim < 1:
            problems.append("feature_dim must be >= 1")
        if not 1 <= self.key_dim <= self.feature_dim:
            problems.append("key_dim must be in 1..feature_dim")
        if self.centroid_radius <= 0:
            problems.append("centroid_radius must be positive")
        if not 0 < self.cov_low <= self.cov_high:
            problems.append("need 0 < cov_low <= cov_high")
        if self.num_sensors < 1:
            problems.append("num_sensors must be >= 1")
        if not 0 < self.prior_relevance < 1:
            problems.append("prior_relevance must be in (0, 1)")
        if self.query_noise_factor < 0:
            problems.append("query_noise_factor must be >= 0")
        if self.temperature <= 0:
            problems.append("temperature must be positive")
        for name in ("bandwidth", "noise_power", "path_loss", "bits_per_feature"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be positive")
        if self.slot_duration is not None and self.slot_duration <= 0:
            problems.append("slot_duration must be positive")
        if self.ordering not in ("random", "importance", "both"):
            problems.append(f"unknown ordering '{self.ordering}'")
        known = {scheme.value for scheme in Scheme}
        unknown = [name for name in self.schemes if name not in known]
        if unknown:
            problems.append(f"unknown schemes: {', '.join(unknown)}")
        if not self.schemes:
            problems.append("schemes list is empty")
        if self.trials < 1 or self.bound_trials < 1:
            problems.append("trials must be >= 1")
        if self.sweep_axis not in SWEEP_AXES:
            problems.append(f"sweep_axis must be one of {', '.join(SWEEP_AXES)}")
        if not self.sweep_values:
            problems.append("sweep_values is empty")
        if self.sweep_axis == "prior_relevance" and any(not 0 < v < 1 for v in self.sweep_values):
            problems.append("prior_relevance sweep values must be in (0, 1)")
        if self.sweep_axis == "num_sensors" and any(v < 1 or v != int(v) for v in self.sweep_values):
            problems.append("num_sensors sweep values must be positive integers")
        if self.calibration_samples < 1000:
            problems.append("calibration_samples must be >= 1000")
        if self.best_channel_k < 1:
            problems.append("best_channel_k must be >= 1")
        if self.oracle_instances < 1:
            problems.append("oracle_instances must be >= 1")
        if min(self.oracle_sensors_random, self.oracle_sensors_importance, self.oracle_feature_dim) < 1:
            problems.append("oracle instance sizes must be >= 1")
        if "exhaustive" in self.schemes:
            largest = max(self.sweep_values) if self.sweep_axis == "num_sensors" else self.num_sensors
            if largest > self.exhaustive_limit:
                problems.append(f"exhaustive scheme with {int(largest)} sensors exceeds exhaustive_limit")
        if problems:
            raise ConfigError("; ".join(problems))

    #MARK: derived settings
    @property
    def effective_slot_duration(self) -> float:
        if self.slot_duration is not None:
            return self.slot_duration
        return self.bits_per_feature * self.feature_dim / self.bandwidth

    def comm_config(self, snr_db: Optional[float] = None) -> CommConfig:
        base = CommConfig(self.bandwidth, self.noise_power, 1.0, self.path_loss,
                          self.effective_slot_duration, self.bits_per_feature)
        return base.with_snr_db(self.snr_db if snr_db is None else snr_db)

    def orderings(self) -> list[Ordering]:
        if self.ordering == "both":
            return [Ordering.RANDOM, Ordering.IMPORTANCE]
        return [Ordering(self.ordering)]

    def scheme_list(self) -> list[Scheme]:
        return [Scheme(name) for name in self.schemes]

    def seed_for(self, stream: int, *indices: int) -> np.random.SeedSequence:
        """independent, reproducible stream for (base_seed, stream, indices...)"""
        return np.random.SeedSequence([self.base_seed, stream, *indices])


# global default instance - easy to import anywhere
config = ExperimentConfig()


#MARK: parsing
def _coerce(name: str, raw: Optional[str], kind):
    if raw is None:
        raise ConfigError(f"'{name}' has no value")
    raw = raw.strip()
    origin = get_origin(kind)
    if origin is Union:  # Optional[...]
        if raw == "" or raw.lower() == "none":
            return None
        kind = next(arg for arg in get_args(kind) if arg is not type(None))
        origin = get_origin(kind)
    try:
        if origin is tuple:
            item_kind = get_args(kind)[0]
            return tuple(item_kind(item.strip()) for item in raw.split(",") if item.strip())
        if kind is bool:
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if kind is int:
            return int(float(raw)) if float(raw).is_integer() else int(raw)
        return kind(raw)
    except ValueError as e:
        raise ConfigError(f"bad value for '{name}': {raw!r}") from e


def config_from_mapping(values: dict) -> ExperimentConfig:
    hints = get_type_hints(ExperimentConfig)
    unknown = sorted(set(values) - set(hints))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    parsed = {name: _coerce(name, raw, hints[name]) for name, raw in values.items()}
    return ExperimentConfig(**parsed)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """read a key=value config file; '#' starts a comment, lists are comma-separated"""
    path = Path(path)
    try:
        with open(path) as f:
            f.read(1)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror or e}") from e
    values = dotenv_values(path, interpolate=False)
    loaded = config_from_mapping(dict(values))
    logger.info(f"loaded config from {path}")
    return loaded


def apply_overrides(base: ExperimentConfig, **overrides) -> ExperimentConfig:
    """command-line overrides win over file values; None means not given"""
    changes = {key: value for key, value in overrides.items() if value is not None}
    if not changes:
        return base
    logger.info(f"config overrides: {changes}")
    return dataclasses.replace(base, **changes)


#MARK: sidecar
def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format(item) for item in value)
    return str(value)


def write_sidecar(cfg: ExperimentConfig, path: Union[str, Path], derived: Optional[dict] = None) -> None:
    """
    run metadata as key=value lines - itself a loadable config file
    derived values are written as comments so they don't break re-loading
    """
    lines = [f"{field.name}={_format(getattr(cfg, field.name))}" for field in fields(cfg)]
    for key, value in (derived or {}).items():
        lines.append(f"# {key}={_format(value)}")
    Path(path).write_text("\n".join(lines) + "\n")
    logger.info(f"metadata written to {path}")
