# ==========================
# semantic_matching.py
# ==========================
"""
semantic_matching.py - query/key encoders, relevance scores and relevance posteriors

the pipeline only ever uses posterior_estimate (the server does not know the true class);
posterior_exact is the reference it is checked against
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Union

import numpy as np
from scipy.special import expit, logsumexp

from gm_model import GmModel, Seed, sample_scenario
from run_logger import timer

logger = logging.getLogger(__name__)

# exponent clamp for the calibrated sigmoid
EXPONENT_CLAMP = 500.0


#MARK: MatchingModel
@dataclass(frozen=True, eq=False)
class MatchingModel:
    """linear encoders q = W_q f0 and k = W_k f, both (D_q, D)"""
    query_encoder: np.ndarray
    key_encoder: np.ndarray

    def __post_init__(self):
        if self.query_encoder.ndim != 2 or self.query_encoder.shape != self.key_encoder.shape:
            raise ValueError(f"encoder shapes differ: {self.query_encoder.shape} vs {self.key_encoder.shape}")
        key_dim, feature_dim = self.query_encoder.shape
        if key_dim > feature_dim:
            raise ValueError(f"key_dim {key_dim} exceeds feature_dim {feature_dim}")

    @property
    def key_dim(self) -> int:
        return self.query_encoder.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.query_encoder.shape[1]


def truncation_matching(feature_dim: int, key_dim: int) -> MatchingModel:
    """both encoders keep the first key_dim feature entries"""
    if not 1 <= key_dim <= feature_dim:
        raise ValueError(f"key_dim must be in 1..{feature_dim}, got {key_dim}")
    selector = np.eye(key_dim, feature_dim)
    return MatchingModel(selector, selector.copy())


#MARK: scoring
def encode_query(matching: MatchingModel, query_feature: np.ndarray) -> np.ndarray:
    query_feature = np.asarray(query_feature, dtype=float)
    if query_feature.shape != (matching.feature_dim,):
        raise ValueError(f"query feature has shape {query_feature.shape}, expected ({matching.feature_dim},)")
    return matching.query_encoder @ query_feature


def relevance_score(query: np.ndarray, feature: np.ndarray, matching: MatchingModel) -> float:
    """phi_m = q^T (W_k f_m)"""
    feature = np.asarray(feature, dtype=float)
    query = np.asarray(query, dtype=float)
    if feature.shape != (matching.feature_dim,):
        raise ValueError(f"feature has shape {feature.shape}, expected ({matching.feature_dim},)")
    if query.shape != (matching.key_dim,):
        raise ValueError(f"query has shape {query.shape}, expected ({matching.key_dim},)")
    return float(query @ (matching.key_encoder @ feature))


def relevance_scores(query: np.ndarray, features: np.ndarray, matching: MatchingModel) -> np.ndarray:
    """scores for all sensors at once, features is (M, D)"""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    if features.shape[1] != matching.feature_dim or np.shape(query) != (matching.key_dim,):
        raise ValueError("feature/query dimensions do not match the encoders")
    return features @ (matching.key_encoder.T @ query)


#MARK: exact posterior
def posterior_exact(model: GmModel, matching: MatchingModel, query: np.ndarray,
                    true_class: int, score, prior: float):
    """
    Pr(I_m = 1 | phi) with the true class known
    score may be a scalar or an array of scores
    """
    if not 0 < prior < 1:
        raise ValueError(f"prior must be in (0, 1), got {prior}")
    projection = matching.key_encoder.T @ np.asarray(query, dtype=float)  # (D,)
    score_var = float(projection ** 2 @ model.cov_diag)
    if score_var <= 0:
        raise ValueError("query lies in the key encoder's null space (zero score variance)")

    class_scores = model.centroids @ projection
    others = np.delete(class_scores, true_class)
    gap = class_scores[true_class] - others             # alpha_{l0,l}
    midpoint = (class_scores[true_class] + others) / 2  # phi_bar_{l0,l}

    phi = np.asarray(score, dtype=float)
    exponents = -gap * (phi[..., None] - midpoint) / score_var
    log_ratio = (np.log((1 - prior) / (prior * (model.num_classes - 1)))
                 + logsumexp(exponents, axis=-1))
    result = expit(-log_ratio)
    return float(result) if result.ndim == 0 else result


#MARK: CalibrationStats
@dataclass(frozen=True)
class CalibrationStats:
    """empirical score statistics behind the sigmoid posterior estimate"""
    alpha_bar: float
    phi_bar: float
    sigma2_bar: float
    prior: float

    def __post_init__(self):
        if not self.sigma2_bar > 0:
            raise ValueError(f"sigma2_bar must be positive, got {self.sigma2_bar}")
        if not 0 < self.prior < 1:
            raise ValueError(f"prior must be in (0, 1), got {self.prior}")

    @property
    def effective(self) -> bool:
        """query effectiveness: relevant scores sit above irrelevant ones on average"""
        return self.alpha_bar > 0

    def with_prior(self, prior: float) -> "CalibrationStats":
        # score statistics do not depend on the prior
        return replace(self, prior=prior)


@timer.time_function("calibrate", "MATCHING")
def calibrate(model: GmModel, matching: MatchingModel, prior: float, n_samples: int,
              query_noise_factor: float, seed: Seed, batch_size: int = 10_000) -> CalibrationStats:
    """monte-carlo estimates of alpha_bar, phi_bar, sigma2_bar over corrupted ground-truth queries"""
    if n_samples < 1000:
        raise ValueError(f"calibration needs at least 1000 samples, got {n_samples}")

    rng = np.random.default_rng(seed)
    num_classes = model.num_classes
    std = np.sqrt(model.cov_diag)
    sums = np.zeros(3)

    remaining = n_samples
    while remaining > 0:
        n = min(batch_size, remaining)
        remaining -= n
        true_class = rng.integers(num_classes, size=n)
        queries_f0 = (model.centroids[true_class]
                      + np.sqrt(query_noise_factor) * std * rng.standard_normal((n, model.feature_dim)))
        projections = (queries_f0 @ matching.query_encoder.T) @ matching.key_encoder  # (n, D)
        class_scores = projections @ model.centroids.T                            # (n, L)
        own = class_scores[np.arange(n), true_class]
        mean_other = (class_scores.sum(axis=1) - own) / (num_classes - 1)
        sums += [
            np.sum(own - mean_other),
            np.sum((own + mean_other) / 2),
            np.sum(projections ** 2 @ model.cov_diag),
        ]

    alpha_bar, phi_bar, sigma2_bar = (sums / n_samples).tolist()
    if sigma2_bar <= 0:
        raise ValueError("all calibration queries have zero score variance")
    stats = CalibrationStats(alpha_bar, phi_bar, sigma2_bar, prior)
    if not stats.effective:
        logger.warning(f"ineffective query: alpha_bar={alpha_bar:.4g} <= 0, "
                       "posterior estimate no longer increases with the score")
    logger.info(f"calibrated on {n_samples} queries: alpha_bar={alpha_bar:.4f} "
                f"phi_bar={phi_bar:.4f} sigma2_bar={sigma2_bar:.4f}")
    return stats


#MARK: estimated posterior
def posterior_estimate(stats: CalibrationStats, score):
    """scaled sigmoid of the score; works on scalars and arrays"""
    exponent = -stats.alpha_bar * (np.asarray(score, dtype=float) - stats.phi_bar) / stats.sigma2_bar
    exponent = np.clip(exponent, -EXPONENT_CLAMP, EXPONENT_CLAMP)
    result = 1.0 / (1.0 + (1 - stats.prior) / stats.prior * np.exp(exponent))
    return float(result) if result.ndim == 0 else result


def posterior_divergence(model: GmModel, matching: MatchingModel, stats: CalibrationStats,
                         num_sensors: int, n_scenarios: int, query_noise_factor: float,
                         seed: Seed) -> tuple[float, float]:
    """
    mean and max |pi_hat - pi| over sampled scenarios
    reported only, the sigmoid's homogeneous-gap assumption is not corrected
    """
    root = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    gaps = []
    for child in root.spawn(n_scenarios):
        scenario = sample_scenario(model, num_sensors, stats.prior, query_noise_factor, child)
        query = encode_query(matching, scenario.query_feature)
        scores = relevance_scores(query, scenario.features, matching)
        try:
            exact = posterior_exact(model, matching, query, scenario.true_class, scores, stats.prior)
        except ValueError:
            continue
        gaps.append(np.abs(posterior_estimate(stats, scores) - exact))
    if not gaps:
        return float("nan"), float("nan")
    gaps = np.concatenate(gaps)
    return float(gaps.mean()), float(gaps.max())


#MARK: artifact
_STATS_FIELDS = ("alpha_bar", "phi_bar", "sigma2_bar", "prior")


def save_stats(stats: CalibrationStats, path: Union[str, Path]) -> None:
    Path(path).write_text("".join(f"{name}={getattr(stats, name)!r}\n" for name in _STATS_FIELDS))
    logger.info(f"calibration stats written to {path}")


def load_stats(path: Union[str, Path]) -> CalibrationStats:
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            key, _, value = line.partition("=")
            values[key.strip()] = float(value)
    missing = [name for name in _STATS_FIELDS if name not in values]
    if missing:
        raise ValueError(f"calibration file {path} lacks {', '.join(missing)}")
    return CalibrationStats(**{name: values[name] for name in _STATS_FIELDS})
