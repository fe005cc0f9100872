# ==========================
# gm_model.py
# ==========================
"""
gm_model.py - the gaussian-mixture data world
class centroids, diagonal covariance, discriminant-gain tables and scenario sampling

indices are 0-based everywhere: classes 0..L-1, dimensions 0..D-1, sensors 0..M-1
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

# anything np.random.default_rng accepts
Seed = Union[int, Sequence[int], np.random.SeedSequence]


#MARK: GmModel
@dataclass(frozen=True, eq=False)
class GmModel:
    """
    immutable GM statistics plus precomputed discriminant-gain tables

    pairwise_dg_prefix[p, k-1] is the DG of class pair p over the top-k importance dims,
    norm_sq_prefix[l, k-1] the squared Mahalanobis norm of centroid l over the same dims
    """
    centroids: np.ndarray           # (L, D)
    cov_diag: np.ndarray            # (D,)
    importance: np.ndarray          # (D,) average DG per dimension
    importance_order: np.ndarray    # (D,) dims sorted by descending importance
    pair_index: np.ndarray          # (P, 2) class pairs l < l'
    pairwise_dg_prefix: np.ndarray  # (P, D)
    norm_sq_prefix: np.ndarray      # (L, D)
    g_min_by_count: np.ndarray      # (D,) G_min(k) at index k-1
    delta_max_by_count: np.ndarray  # (D,) delta_max(k) at index k-1

    @property
    def num_classes(self) -> int:
        return self.centroids.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.centroids.shape[1]

    @property
    def g_min(self) -> float:
        """full-dimension minimum pairwise DG"""
        return float(self.g_min_by_count[-1])

    @property
    def delta_max(self) -> float:
        """full-dimension maximum Mahalanobis norm"""
        return float(self.delta_max_by_count[-1])

    def top_dims(self, count: int) -> np.ndarray:
        """top-`count` importance dims, sorted ascending (the order pruning keeps)"""
        if not 1 <= count <= self.feature_dim:
            raise ValueError(f"feature count {count} outside 1..{self.feature_dim}")
        return np.sort(self.importance_order[:count])


#MARK: construction
def model_from_arrays(centroids: np.ndarray, cov_diag: np.ndarray) -> GmModel:
    """derive every table from raw centroids (L, D) and covariance diagonal (D,)"""
    centroids = np.array(centroids, dtype=float, ndmin=2)
    cov_diag = np.array(cov_diag, dtype=float, ndmin=1)
    num_classes, feature_dim = centroids.shape

    if num_classes < 2:
        raise ValueError(f"need at least 2 classes, got {num_classes}")
    if cov_diag.shape != (feature_dim,):
        raise ValueError(f"cov_diag has shape {cov_diag.shape}, expected ({feature_dim},)")
    if np.any(cov_diag <= 0):
        raise ValueError("covariance entries must be positive")

    first, second = np.triu_indices(num_classes, k=1)
    pair_terms = (centroids[first] - centroids[second]) ** 2 / cov_diag  # (P, D)
    if np.any(pair_terms.sum(axis=1) <= 0):
        raise ValueError("class centroids are not distinct (zero pairwise DG)")

    importance = pair_terms.mean(axis=0)
    # stable sort on the negated gains keeps ascending index among ties
    importance_order = np.argsort(-importance, kind="stable")

    pairwise_dg_prefix = np.cumsum(pair_terms[:, importance_order], axis=1)
    norm_terms = centroids ** 2 / cov_diag
    norm_sq_prefix = np.cumsum(norm_terms[:, importance_order], axis=1)

    return GmModel(
        centroids=centroids,
        cov_diag=cov_diag,
        importance=importance,
        importance_order=importance_order,
        pair_index=np.column_stack([first, second]),
        pairwise_dg_prefix=pairwise_dg_prefix,
        norm_sq_prefix=norm_sq_prefix,
        g_min_by_count=pairwise_dg_prefix.min(axis=0),
        delta_max_by_count=np.sqrt(norm_sq_prefix.max(axis=0)),
    )


def build_model(num_classes: int, feature_dim: int, centroid_radius: float,
                cov_low: float, cov_high: float, seed: Seed) -> GmModel:
    """
    centroids uniform in the D-ball of the given radius, covariance uniform in [cov_low, cov_high]
    same arguments -> bit-identical model
    """
    if num_classes < 2:
        raise ValueError(f"need at least 2 classes for a decision boundary, got {num_classes}")
    if feature_dim < 1:
        raise ValueError(f"feature_dim must be >= 1, got {feature_dim}")
    if centroid_radius < 0:
        raise ValueError(f"centroid_radius must be >= 0, got {centroid_radius}")
    if not 0 < cov_low <= cov_high:
        raise ValueError(f"need 0 < cov_low <= cov_high, got ({cov_low}, {cov_high})")

    rng = np.random.default_rng(seed)
    # uniform in ball: isotropic direction, radius ~ R * U^(1/D)
    directions = rng.standard_normal((num_classes, feature_dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = centroid_radius * rng.uniform(size=num_classes) ** (1.0 / feature_dim)
    centroids = directions * radii[:, None]
    cov_diag = rng.uniform(cov_low, cov_high, size=feature_dim)

    model = model_from_arrays(centroids, cov_diag)
    logger.debug(f"built GM model L={num_classes} D={feature_dim}: "
                 f"G_min={model.g_min:.4f} delta_max={model.delta_max:.4f}")
    return model


#MARK: DG statistics
def _check_dims(model: GmModel, dims) -> np.ndarray:
    dims = np.asarray(dims, dtype=int).ravel()
    if dims.size == 0:
        raise ValueError("dimension set is empty")
    if dims.min() < 0 or dims.max() >= model.feature_dim:
        raise ValueError(f"dimension index outside 0..{model.feature_dim - 1}")
    if np.unique(dims).size != dims.size:
        raise ValueError("dimension set has duplicates")
    return dims


def min_pairwise_dg(model: GmModel, dims) -> float:
    """min over class pairs of sum_{d in dims} (mu_l,d - mu_l',d)^2 / C_d"""
    dims = _check_dims(model, dims)
    mu = model.centroids[:, dims]
    first, second = model.pair_index.T
    dg = ((mu[first] - mu[second]) ** 2 / model.cov_diag[dims]).sum(axis=1)
    return float(dg.min())


def max_mahalanobis_norm(model: GmModel, dims) -> float:
    """max over classes of the Mahalanobis norm of the centroid restricted to dims"""
    dims = _check_dims(model, dims)
    norm_sq = (model.centroids[:, dims] ** 2 / model.cov_diag[dims]).sum(axis=1)
    return float(np.sqrt(norm_sq.max()))


#MARK: Scenario
@dataclass(frozen=True, eq=False)
class Scenario:
    """one sensing instance"""
    true_class: int
    relevance: np.ndarray       # (M,) bool
    observed_class: np.ndarray  # (M,) int
    features: np.ndarray        # (M, D)
    query_feature: np.ndarray   # (D,)

    @property
    def num_sensors(self) -> int:
        return self.relevance.size


def sample_scenario(model: GmModel, num_sensors: int, prior_relevance: float,
                    query_noise_factor: float, seed: Seed) -> Scenario:
    """draw target class, relevance indicators, sensor features and the corrupted query"""
    if num_sensors < 1:
        raise ValueError(f"need at least one sensor, got {num_sensors}")
    if not 0 < prior_relevance < 1:
        raise ValueError(f"prior_relevance must be in (0, 1), got {prior_relevance}")
    if query_noise_factor < 0:
        raise ValueError(f"query_noise_factor must be >= 0, got {query_noise_factor}")

    rng = np.random.default_rng(seed)
    num_classes = model.num_classes
    std = np.sqrt(model.cov_diag)

    true_class = int(rng.integers(num_classes))
    relevance = rng.uniform(size=num_sensors) < prior_relevance
    # irrelevant views observe one of the other L-1 classes uniformly
    other = rng.integers(num_classes - 1, size=num_sensors)
    other = other + (other >= true_class)
    observed_class = np.where(relevance, true_class, other)

    noise = rng.standard_normal((num_sensors, model.feature_dim))
    features = model.centroids[observed_class] + noise * std
    query_feature = (model.centroids[true_class]
                     + np.sqrt(query_noise_factor) * std * rng.standard_normal(model.feature_dim))

    return Scenario(true_class, relevance, observed_class, features, query_feature)


#MARK: artifact
def save_model(model: GmModel, path: Union[str, Path]) -> None:
    """
    flat text artifact: header "L D", then L centroid rows, then the covariance row
    repr() of a float is its shortest exact decimal, so loading round-trips bit-for-bit
    """
    lines = [f"{model.num_classes} {model.feature_dim}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in model.centroids]
    lines.append(" ".join(repr(float(v)) for v in model.cov_diag))
    Path(path).write_text("\n".join(lines) + "\n")
    logger.info(f"model written to {path}")


def load_model(path: Union[str, Path]) -> GmModel:
    rows = [line.split() for line in Path(path).read_text().splitlines() if line.strip()]
    try:
        num_classes, feature_dim = (int(v) for v in rows[0])
        centroids = np.array([[float(v) for v in row] for row in rows[1:1 + num_classes]])
        cov_diag = np.array([float(v) for v in rows[1 + num_classes]])
    except (IndexError, ValueError) as e:
        raise ValueError(f"malformed model artifact {path}: {e}") from e
    if centroids.shape != (num_classes, feature_dim):
        raise ValueError(f"malformed model artifact {path}: centroid block is {centroids.shape}")
    return model_from_arrays(centroids, cov_diag)
