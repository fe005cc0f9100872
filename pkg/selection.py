# ==========================
# selection.py
# ==========================
"""
selection.py - who uploads, and how many features

priority-based schemes for random and importance ordering, the four benchmark schemes,
and an exhaustive oracle for small instances

sort ties are always broken by ascending sensor index
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from accuracy_model import (Ordering, expected_margin, objective_value, softmax_weights,
                            surrogate, uniform_weights)
from channel_comm import BUDGET_RTOL, CommConfig, check_budget, max_feature_count
from errors import InfeasibleSelectionError
from gm_model import GmModel, Seed
from semantic_matching import CalibrationStats, posterior_estimate

logger = logging.getLogger(__name__)


#MARK: Scheme
class Scheme(Enum):
    """scheme identifiers as used on the command line and in the csv output"""
    PROPOSED_RANDOM = "proposed-random"
    PROPOSED_IMPORTANCE = "proposed-importance"
    WHEN2COM = "when2com"
    BEST_CHANNEL = "best-channel"
    ALL_ATTENTIVE = "all-attentive"
    ALL_AVERAGE = "all-average"
    EXHAUSTIVE = "exhaustive"


class Fusion(Enum):
    ATTENTIVE = "attentive"
    AVERAGE = "average"


#MARK: SelectionDecision
@dataclass(frozen=True, eq=False)
class SelectionDecision:
    scheme: Scheme
    sensors: tuple[int, ...]
    num_features: int
    feature_dims: np.ndarray
    time_alloc: np.ndarray
    objective: Optional[float] = None
    fusion: Fusion = Fusion.ATTENTIVE

    @property
    def is_empty(self) -> bool:
        return len(self.sensors) == 0


def empty_decision(scheme: Scheme, fusion: Fusion = Fusion.ATTENTIVE) -> SelectionDecision:
    """nobody uploads, inference falls back to a uniform guess"""
    return SelectionDecision(scheme, (), 0, np.zeros(0, dtype=int), np.zeros(0), None, fusion)


def _make_decision(scheme: Scheme, sensors, num_features: int, feature_dims: np.ndarray,
                   comm: CommConfig, rates, objective: Optional[float] = None,
                   fusion: Fusion = Fusion.ATTENTIVE) -> SelectionDecision:
    sensors = tuple(int(m) for m in sensors)
    _, times = check_budget(sensors, num_features, comm, rates)
    return SelectionDecision(scheme, sensors, int(num_features), feature_dims, times, objective, fusion)


#MARK: FeaturePicker
class FeaturePicker:
    """
    picks the D~ uploaded dimensions under an ordering
    random: a seeded uniform subset, importance: the top-D~ importance dims
    """
    def __init__(self, ordering: Ordering, feature_dim: int,
                 importance_order: Optional[np.ndarray] = None, seed: Seed = 0):
        if ordering is Ordering.IMPORTANCE and importance_order is None:
            raise ValueError("importance ordering needs the model's importance order")
        self.ordering = ordering
        self.feature_dim = feature_dim
        self.importance_order = importance_order
        self.rng = np.random.default_rng(seed)

    @classmethod
    def for_model(cls, ordering: Ordering, model: GmModel, seed: Seed = 0) -> "FeaturePicker":
        return cls(ordering, model.feature_dim, model.importance_order, seed)

    def __call__(self, count: int) -> np.ndarray:
        if not 1 <= count <= self.feature_dim:
            raise ValueError(f"feature count {count} outside 1..{self.feature_dim}")
        if self.ordering is Ordering.IMPORTANCE:
            return np.sort(self.importance_order[:count])
        return np.sort(self.rng.choice(self.feature_dim, size=count, replace=False))


#MARK: helpers
def _rank(candidates: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """candidates sorted by descending key, ties by ascending index"""
    candidates = np.asarray(candidates, dtype=int)
    return candidates[np.lexsort((candidates, -np.asarray(keys, dtype=float)))]


def feasible_feature_count(rates: np.ndarray, comm: CommConfig, feature_dim: int) -> int:
    """max_feature_count, but 0 instead of an error when someone is in outage"""
    if rates.size == 0 or np.any(rates <= 0):
        return 0
    return max_feature_count(rates, comm, feature_dim)


def _shrink_to_budget(sensors: np.ndarray, drop_order: np.ndarray, rates: np.ndarray,
                      comm: CommConfig, feature_dim: int) -> tuple[np.ndarray, int]:
    """
    drop sensors (in drop_order, first = dropped first) until one feature per sensor fits
    returns the kept sensors ascending and their D~ (0 if nobody is left)
    """
    kept = list(sensors)
    for victim in [int(m) for m in drop_order]:
        num_features = feasible_feature_count(rates[kept], comm, feature_dim)
        if num_features >= 1:
            return np.sort(np.asarray(kept, dtype=int)), num_features
        kept.remove(victim)
    return np.zeros(0, dtype=int), 0


#MARK: priority
def priority_random(psi, rates) -> np.ndarray:
    """gamma_m = Psi_m^2 r_m, the profit density of the knapsack slave problem"""
    psi = np.asarray(psi, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if psi.shape != rates.shape:
        raise ValueError(f"{psi.size} margins for {rates.size} rates")
    return psi ** 2 * rates


def priority_order(psi, rates) -> np.ndarray:
    """all sensors by priority: non-negative margins by gamma first, then negative ones by margin"""
    psi = np.asarray(psi, dtype=float)
    rates = np.asarray(rates, dtype=float)
    index = np.arange(psi.size)
    gamma = priority_random(psi, rates)
    negative = psi < 0
    key = np.where(negative, psi, gamma)
    return index[np.lexsort((index, -key, negative))]


#MARK: random ordering
def select_random_ordering(scores, rates, calibration: CalibrationStats, g_min: float,
                           delta_max: float, comm: CommConfig, feature_dim: int,
                           temperature: float = 1.0, seed: Seed = 0) -> SelectionDecision:
    """
    sensors with Psi >= 0 ranked by gamma, best prefix by F_rnd with D~ as large as the slot allows
    feature dims are a seeded random subset
    """
    scores = np.asarray(scores, dtype=float)
    rates = np.asarray(rates, dtype=float)
    pi_hat = posterior_estimate(calibration, scores)
    psi = np.atleast_1d(expected_margin(pi_hat, g_min, delta_max))
    exp_scores = softmax_weights(scores, temperature).exp_scores

    candidates = np.flatnonzero((psi >= 0) & (rates > 0))
    ranked = _rank(candidates, priority_random(psi[candidates], rates[candidates]))

    best_value, best_prefix, best_features = -np.inf, 0, 0
    for size in range(1, ranked.size + 1):
        chosen = ranked[:size]
        num_features = max_feature_count(rates[chosen], comm, feature_dim)
        if num_features == 0:
            break  # adding sensors never frees up slot time
        value = objective_value(exp_scores[chosen], psi[chosen], np.sqrt(num_features / feature_dim))
        if value > best_value:
            best_value, best_prefix, best_features = value, size, num_features

    if best_prefix == 0:
        logger.debug("random ordering: no sensor with non-negative margin fits the slot")
        return empty_decision(Scheme.PROPOSED_RANDOM)
    sensors = np.sort(ranked[:best_prefix])
    dims = FeaturePicker(Ordering.RANDOM, feature_dim, seed=seed)(best_features)
    return _make_decision(Scheme.PROPOSED_RANDOM, sensors, best_features, dims, comm, rates, best_value)


#MARK: importance ordering
def margins_by_count(pi_hat, model: GmModel) -> np.ndarray:
    """Psi_m(k) for k = 1..D as a (D, M) table"""
    pi_hat = np.atleast_1d(np.asarray(pi_hat, dtype=float))
    return (np.sqrt(model.g_min_by_count)[:, None] / 2
            - 2 * model.delta_max_by_count[:, None] * (1 - pi_hat)[None, :])


def select_importance_ordering(scores, rates, calibration: CalibrationStats, model: GmModel,
                               comm: CommConfig, temperature: float = 1.0) -> SelectionDecision:
    """
    for every D~: rank Psi(D~) >= 0 sensors by gamma(D~), take the longest prefix that fits,
    score it with F_imp; keep the global best. feature dims are the top-D~ importance dims
    """
    scores = np.asarray(scores, dtype=float)
    rates = np.asarray(rates, dtype=float)
    pi_hat = posterior_estimate(calibration, scores)
    psi_table = margins_by_count(pi_hat, model)
    exp_scores = softmax_weights(scores, temperature).exp_scores
    budget = comm.slot_duration * (1 + BUDGET_RTOL)

    best_value, best_sensors, best_features = -np.inf, None, 0
    for num_features in range(1, model.feature_dim + 1):
        psi = psi_table[num_features - 1]
        candidates = np.flatnonzero((psi >= 0) & (rates > 0))
        if candidates.size == 0:
            continue
        ranked = _rank(candidates, priority_random(psi[candidates], rates[candidates]))
        spent = np.cumsum(comm.bits_per_feature * num_features / rates[ranked])
        size = int(np.searchsorted(spent, budget, side="right"))
        if size == 0:
            continue
        chosen = ranked[:size]
        value = objective_value(exp_scores[chosen], psi[chosen])
        if value > best_value:
            best_value, best_sensors, best_features = value, chosen, num_features

    if best_sensors is None:
        logger.debug("importance ordering: no sensor with non-negative margin fits the slot")
        return empty_decision(Scheme.PROPOSED_IMPORTANCE)
    return _make_decision(Scheme.PROPOSED_IMPORTANCE, np.sort(best_sensors), best_features,
                          model.top_dims(best_features), comm, rates, best_value)


#MARK: benchmarks
def when2com_select(scores, rates, comm: CommConfig, picker: FeaturePicker,
                    temperature: float = 1.0) -> SelectionDecision:
    """sensors whose softmax weight over all M exceeds 1/M; falls back to the max-weight sensor"""
    scores = np.asarray(scores, dtype=float)
    rates = np.asarray(rates, dtype=float)
    weights = softmax_weights(scores, temperature).weights
    sensors = np.flatnonzero(weights > 1.0 / scores.size)
    if sensors.size == 0:
        sensors = np.array([int(np.argmax(weights))])
    # lowest weight is dropped first, ties drop the larger index
    drop_order = _rank(sensors, weights[sensors])[::-1]
    sensors, num_features = _shrink_to_budget(sensors, drop_order, rates, comm, picker.feature_dim)
    if num_features == 0:
        return empty_decision(Scheme.WHEN2COM)
    return _make_decision(Scheme.WHEN2COM, sensors, num_features, picker(num_features), comm, rates)


def best_channel_select(rates, k: int, comm: CommConfig, picker: FeaturePicker) -> SelectionDecision:
    """top-k sensors by channel gain (rate is monotone in gain); drops the weakest until D~ >= 1"""
    rates = np.asarray(rates, dtype=float)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ranked = _rank(np.arange(rates.size), rates)[:k]
    sensors, num_features = _shrink_to_budget(ranked, ranked[::-1], rates, comm, picker.feature_dim)
    if num_features == 0:
        return empty_decision(Scheme.BEST_CHANNEL)
    return _make_decision(Scheme.BEST_CHANNEL, sensors, num_features, picker(num_features), comm, rates)


def all_inclusive_select(num_sensors: int, rates, fusion: Fusion, comm: CommConfig,
                         picker: FeaturePicker) -> SelectionDecision:
    """every sensor uploads; raises InfeasibleSelectionError when the slot can't take one feature each"""
    rates = np.asarray(rates, dtype=float)
    scheme = Scheme.ALL_ATTENTIVE if fusion is Fusion.ATTENTIVE else Scheme.ALL_AVERAGE
    sensors = np.arange(num_sensors)
    num_features = feasible_feature_count(rates[sensors], comm, picker.feature_dim)
    if num_features == 0:
        raise InfeasibleSelectionError(f"{scheme.value}: {num_sensors} sensors cannot share the slot")
    return _make_decision(scheme, sensors, num_features, picker(num_features), comm, rates, fusion=fusion)


#MARK: oracle
def exhaustive_select(scores, rates, calibration: CalibrationStats, model: GmModel,
                      ordering: Ordering, comm: CommConfig, temperature: float = 1.0,
                      seed: Seed = 0, limit: int = 12) -> SelectionDecision:
    """true surrogate maximizer over every non-empty subset (and every D~ under importance)"""
    scores = np.asarray(scores, dtype=float)
    rates = np.asarray(rates, dtype=float)
    num_sensors = scores.size
    if num_sensors > limit:
        raise ValueError(f"exhaustive search limited to {limit} sensors, got {num_sensors}")

    pi_hat = posterior_estimate(calibration, scores)
    exp_scores = softmax_weights(scores, temperature).exp_scores
    feature_dim = model.feature_dim
    if ordering is Ordering.RANDOM:
        psi = np.atleast_1d(expected_margin(pi_hat, model.g_min, model.delta_max))
    else:
        psi_table = margins_by_count(pi_hat, model)

    best_value, best_sensors, best_features = -np.inf, None, 0
    for size in range(1, num_sensors + 1):
        for subset in itertools.combinations(range(num_sensors), size):
            chosen = np.array(subset)
            max_features = feasible_feature_count(rates[chosen], comm, feature_dim)
            if max_features == 0:
                continue
            e = exp_scores[chosen]
            if ordering is Ordering.RANDOM:
                # F is sqrt(D~/D) times a D~-free factor: the best D~ is an endpoint
                core = objective_value(e, psi[chosen])
                num_features = max_features if core > 0 else 1
                value = np.sqrt(num_features / feature_dim) * core
            else:
                curve = psi_table[:max_features, chosen] @ e / np.sqrt(e @ e)
                num_features = int(np.argmax(curve)) + 1
                value = float(curve[num_features - 1])
            if value > best_value:
                best_value, best_sensors, best_features = value, chosen, num_features

    if best_sensors is None:
        return empty_decision(Scheme.EXHAUSTIVE)
    dims = FeaturePicker.for_model(ordering, model, seed)(best_features)
    return _make_decision(Scheme.EXHAUSTIVE, best_sensors, best_features, dims, comm, rates, float(best_value))


#MARK: objective of any decision
def evaluate_objective(decision: SelectionDecision, scores, calibration: CalibrationStats,
                       model: GmModel, ordering: Ordering, temperature: float = 1.0) -> tuple[float, float]:
    """(F, A_lb_hat) of a decision under the given ordering's surrogate; nan for an empty decision"""
    if decision.is_empty:
        return float("nan"), float("nan")
    chosen = np.asarray(decision.sensors)
    scores = np.asarray(scores, dtype=float)[chosen]
    pi_hat = np.atleast_1d(posterior_estimate(calibration, scores))
    if decision.fusion is Fusion.AVERAGE:
        exp_scores = uniform_weights(chosen.size).exp_scores
    else:
        exp_scores = softmax_weights(scores, temperature).exp_scores
    if ordering is Ordering.RANDOM:
        g_min, delta_max = model.g_min, model.delta_max
    else:
        g_min = model.g_min_by_count[decision.num_features - 1]
        delta_max = model.delta_max_by_count[decision.num_features - 1]
    psi = expected_margin(pi_hat, g_min, delta_max)
    return surrogate(np.arange(chosen.size), exp_scores, psi, ordering, decision.num_features,
                     model.feature_dim, model.num_classes)


#MARK: fixed sets
def fixed_selection(scheme: Scheme, sensors, rates, comm: CommConfig,
                    picker: FeaturePicker) -> SelectionDecision:
    """a given sensor set with the largest D~ the slot allows; empty if nothing fits"""
    sensors = np.sort(np.asarray(sensors, dtype=int))
    rates = np.asarray(rates, dtype=float)
    num_features = feasible_feature_count(rates[sensors], comm, picker.feature_dim)
    if num_features == 0:
        return empty_decision(scheme)
    return _make_decision(scheme, sensors, num_features, picker(num_features), comm, rates)
