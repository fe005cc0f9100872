# ==========================
# fusion_inference.py
# ==========================
"""
fusion_inference.py - feature pruning, attentive fusion and the linear ML classifier
uploads inside the budget arrive bit-exact, so nothing here models channel distortion
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from accuracy_model import FusionWeights
from gm_model import GmModel


#MARK: FusedFeature
@dataclass(frozen=True, eq=False)
class FusedFeature:
    values: np.ndarray  # (D~,)
    dims: np.ndarray    # (D~,) ascending


def prune(features: np.ndarray, dims) -> np.ndarray:
    """keep the given dims in ascending order; features may be one vector or a (M, D) stack"""
    features = np.asarray(features, dtype=float)
    dims = np.asarray(dims, dtype=int).ravel()
    feature_dim = features.shape[-1]
    if dims.size and (dims.min() < 0 or dims.max() >= feature_dim):
        raise ValueError(f"dimension index outside 0..{feature_dim - 1}")
    if np.any(np.diff(dims) <= 0):
        raise ValueError("dims must be strictly ascending")
    return features[..., dims]


def fuse(pruned, weights: FusionWeights, dims) -> FusedFeature:
    """weighted sum of the pruned per-sensor vectors"""
    pruned = np.atleast_2d(np.asarray(pruned, dtype=float))
    dims = np.asarray(dims, dtype=int).ravel()
    if pruned.shape[1] != dims.size:
        raise ValueError(f"pruned vectors have {pruned.shape[1]} entries, dims has {dims.size}")
    if pruned.shape[0] != weights.weights.size:
        raise ValueError(f"{pruned.shape[0]} vectors for {weights.weights.size} weights")
    return FusedFeature(weights.weights @ pruned, dims)


def classify_linear(model: GmModel, fused: FusedFeature) -> int:
    """argmin of the squared Mahalanobis distance in the reduced space, ties -> smallest class"""
    if fused.dims.size == 0:
        raise ValueError("cannot classify an empty feature")
    diff = fused.values - model.centroids[:, fused.dims]
    distances = (diff ** 2 / model.cov_diag[fused.dims]).sum(axis=1)
    return int(np.argmin(distances))
