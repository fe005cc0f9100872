# ==========================
# accuracy_model.py
# ==========================
"""
accuracy_model.py - fusion weights, conditional accuracy bound, expected margins and
the surrogate objective that the selection schemes maximize

surrogate values are reported raw (they can be negative), nothing here clamps
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import erfc


#MARK: Ordering
class Ordering(Enum):
    """how the uploaded feature dimensions are chosen"""
    RANDOM = "random"
    IMPORTANCE = "importance"


#MARK: tail function
def tail_q(x):
    """gaussian tail Q(x) = erfc(x / sqrt 2) / 2"""
    result = 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))
    return float(result) if np.ndim(result) == 0 else result


#MARK: FusionWeights
@dataclass(frozen=True, eq=False)
class FusionWeights:
    """
    softmax attention weights over the selected sensors
    exp_scores are e_m = exp(phi_m / tau) times the common factor exp(-max phi / tau);
    weights and the surrogate are invariant to that factor
    """
    weights: np.ndarray
    temperature: float
    exp_scores: np.ndarray


def softmax_weights(scores, temperature: float) -> FusionWeights:
    scores = np.asarray(scores, dtype=float).ravel()
    if scores.size == 0:
        raise ValueError("no scores to weight")
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    exp_scores = np.exp((scores - scores.max()) / temperature)
    return FusionWeights(exp_scores / exp_scores.sum(), temperature, exp_scores)


def uniform_weights(count: int) -> FusionWeights:
    """average pooling, the tau -> infinity limit"""
    if count < 1:
        raise ValueError("no sensors to weight")
    ones = np.ones(count)
    return FusionWeights(ones / count, float("inf"), ones)


def rho_eta(weights: FusionWeights, relevance) -> tuple[float, float]:
    """rho = weight share of relevant sensors, eta = sum of squared weights"""
    relevance = np.asarray(relevance, dtype=bool).ravel()
    if relevance.shape != weights.weights.shape:
        raise ValueError(f"{relevance.size} relevance flags for {weights.weights.size} weights")
    w = weights.weights
    return float(w[relevance].sum()), float(np.sum(w ** 2))


#MARK: conditional bound
def conditional_accuracy_lb(g_min: float, delta_max: float, rho: float, eta: float,
                            num_classes: int) -> float:
    """lower bound on accuracy given relevance; may be negative"""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if g_min < 0 or delta_max < 0:
        raise ValueError("g_min and delta_max must be non-negative")
    margin = np.sqrt(g_min) / 2 - 2 * (1 - rho) * delta_max
    return 1.0 - (num_classes - 1) * tail_q(margin / np.sqrt(eta))


#MARK: margins
def expected_margin(pi_hat, g_min: float, delta_max: float):
    """Psi = sqrt(G_min)/2 - 2 delta_max (1 - pi_hat), linear in pi_hat"""
    pi_hat = np.asarray(pi_hat, dtype=float)
    if np.any((pi_hat < 0) | (pi_hat > 1)):
        raise ValueError("posterior probabilities must lie in [0, 1]")
    psi = np.sqrt(g_min) / 2 - 2 * delta_max * (1 - pi_hat)
    return float(psi) if psi.ndim == 0 else psi


@dataclass(frozen=True, eq=False)
class MarginProfile:
    psi: np.ndarray
    g_min: float
    delta_max: float
    pi_hat: np.ndarray


def margin_profile(pi_hat, g_min: float, delta_max: float) -> MarginProfile:
    pi_hat = np.atleast_1d(np.asarray(pi_hat, dtype=float))
    return MarginProfile(expected_margin(pi_hat, g_min, delta_max), g_min, delta_max, pi_hat)


#MARK: surrogate
def objective_value(exp_scores, psi, scale: float = 1.0) -> float:
    """scale * sum(e Psi) / sqrt(sum e^2), the shared core of both orderings"""
    e = np.asarray(exp_scores, dtype=float)
    return float(scale * np.dot(e, psi) / np.sqrt(np.dot(e, e)))


def surrogate(selection, exp_scores, psi, ordering: Ordering, num_features: int,
              feature_dim: int, num_classes: int) -> tuple[float, float]:
    """
    (F, A_lb_hat) for a selection
    exp_scores/psi are indexed by sensor; psi must already match the ordering
    (full-dimension margins for random, margins at num_features for importance)
    """
    selection = np.asarray(selection, dtype=int).ravel()
    if selection.size == 0:
        raise ValueError("empty selection has no surrogate")
    if not 1 <= num_features <= feature_dim:
        raise ValueError(f"feature count {num_features} outside 1..{feature_dim}")
    e = np.asarray(exp_scores, dtype=float)[selection]
    psi = np.asarray(psi, dtype=float)[selection]
    scale = np.sqrt(num_features / feature_dim) if ordering is Ordering.RANDOM else 1.0
    value = objective_value(e, psi, scale)
    return value, 1.0 - (num_classes - 1) * tail_q(value)


def relaxed_objective(psi, num_features: int, feature_dim: int) -> float:
    """sqrt((D~/D) sum Psi^2), the upper end of the random-ordering sandwich"""
    psi = np.asarray(psi, dtype=float)
    return float(np.sqrt(num_features / feature_dim * np.dot(psi, psi)))
