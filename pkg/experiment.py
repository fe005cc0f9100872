# ==========================
# experiment.py
# ==========================
"""
experiment.py - the monte-carlo harness

one trial = scenario -> query -> scores -> channels -> scheme -> prune/upload -> fuse -> classify
all schemes of a trial share scenario and channels (common random numbers)
"""

from __future__ import annotations

import csv
import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from accuracy_model import (Ordering, expected_margin, rho_eta, softmax_weights, surrogate,
                            tail_q, uniform_weights)
from channel_comm import ChannelRealization, CommConfig, check_budget, sample_channels
from config import (CALIBRATION_STREAM, CHANNEL_STREAM, MODEL_STREAM, ORACLE_STREAM,
                    SCENARIO_STREAM, SCHEME_STREAM, ExperimentConfig)
from errors import InfeasibleSelectionError, InvariantError
from event_bus import EventBus
from events import PointCompletedEvent, RunFinishedEvent, RunStartedEvent, TrialCompletedEvent
from fusion_inference import classify_linear, fuse, prune
from gm_model import GmModel, Scenario, build_model, sample_scenario
from run_logger import timer
from selection import (FeaturePicker, Fusion, Scheme, SelectionDecision,
                       all_inclusive_select, best_channel_select, empty_decision,
                       evaluate_objective, exhaustive_select, fixed_selection,
                       priority_order, select_importance_ordering, select_random_ordering,
                       when2com_select)
from semantic_matching import (CalibrationStats, MatchingModel, calibrate, encode_query,
                               posterior_estimate, relevance_scores, truncation_matching)

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("sweep_axis", "sweep_value", "scheme", "trials", "accuracy", "std_err",
                 "mean_num_sensors", "mean_num_features", "mean_objective")
BOUND_COLUMNS = ("ordering", "k", "empirical_acc", "empirical_se", "theory_lb")
ORACLE_COLUMNS = ("ordering", "instances", "median_gap", "p95_gap", "max_gap")

ENUMERATION_LIMIT = 15
TAYLOR_GAP_TRIALS = 200

_SCHEME_INDEX = {scheme: index for index, scheme in enumerate(Scheme)}
_ORDERING_INDEX = {Ordering.RANDOM: 0, Ordering.IMPORTANCE: 1}


#MARK: context
@dataclass(frozen=True, eq=False)
class ExperimentContext:
    """everything built once per run: model, matching and calibration"""
    config: ExperimentConfig
    model: GmModel
    matching: MatchingModel
    calibration: CalibrationStats


@timer.time_function("prepare_context", "EXPERIMENT")
def prepare_context(cfg: ExperimentConfig, model: Optional[GmModel] = None,
                    calibration: Optional[CalibrationStats] = None) -> ExperimentContext:
    """build (or adopt) the model and calibrate it once"""
    if model is None:
        model = build_model(cfg.num_classes, cfg.feature_dim, cfg.centroid_radius,
                            cfg.cov_low, cfg.cov_high, cfg.seed_for(MODEL_STREAM))
    elif (model.num_classes, model.feature_dim) != (cfg.num_classes, cfg.feature_dim):
        raise ValueError(f"model is {model.num_classes}x{model.feature_dim}, "
                         f"config expects {cfg.num_classes}x{cfg.feature_dim}")
    matching = truncation_matching(cfg.feature_dim, cfg.key_dim)
    if calibration is None:
        calibration = calibrate(model, matching, cfg.prior_relevance, cfg.calibration_samples,
                                cfg.query_noise_factor, cfg.seed_for(CALIBRATION_STREAM))
    logger.info(f"context ready: L={model.num_classes} D={model.feature_dim} "
                f"G_min={model.g_min:.4g} delta_max={model.delta_max:.4g} "
                f"alpha_bar={calibration.alpha_bar:.4g}")
    return ExperimentContext(cfg, model, matching, calibration)


#MARK: sweep points
@dataclass(frozen=True)
class SweepPoint:
    """one value of the sweep axis; axis None means the config's base settings"""
    axis: Optional[str]
    value: float
    index: int

    def settings(self, cfg: ExperimentConfig) -> tuple[int, float, CommConfig]:
        """(num_sensors, prior_relevance, comm) at this point"""
        num_sensors, prior, snr_db = cfg.num_sensors, cfg.prior_relevance, cfg.snr_db
        if self.axis == "num_sensors":
            num_sensors = int(self.value)
        elif self.axis == "prior_relevance":
            prior = float(self.value)
        elif self.axis == "snr_db":
            snr_db = float(self.value)
        return num_sensors, prior, cfg.comm_config(snr_db)


def sweep_points(cfg: ExperimentConfig) -> list[SweepPoint]:
    return [SweepPoint(cfg.sweep_axis, float(value), index)
            for index, value in enumerate(cfg.sweep_values)]


BASE_POINT = SweepPoint(None, float("nan"), 0)


#MARK: instance
@dataclass(frozen=True, eq=False)
class Instance:
    """what every scheme of one trial gets to see"""
    point: SweepPoint
    trial_index: int
    scenario: Scenario
    scores: np.ndarray
    channels: ChannelRealization
    comm: CommConfig
    calibration: CalibrationStats


def simulate_instance(ctx: ExperimentContext, point: SweepPoint, trial_index: int) -> Instance:
    """sample scenario, broadcast the query, score every sensor, draw the channels"""
    cfg = ctx.config
    num_sensors, prior, comm = point.settings(cfg)
    scenario = sample_scenario(ctx.model, num_sensors, prior, cfg.query_noise_factor,
                               cfg.seed_for(SCENARIO_STREAM, point.index, trial_index))
    query = encode_query(ctx.matching, scenario.query_feature)
    scores = relevance_scores(query, scenario.features, ctx.matching)
    channels = sample_channels(num_sensors, comm, cfg.seed_for(CHANNEL_STREAM, point.index, trial_index))
    return Instance(point, trial_index, scenario, scores, channels, comm,
                    ctx.calibration.with_prior(prior))


#MARK: schemes
def schemes_for(ordering: Ordering, schemes: Iterable[Scheme]) -> list[Scheme]:
    """each proposed scheme only runs under its own ordering"""
    skip = Scheme.PROPOSED_IMPORTANCE if ordering is Ordering.RANDOM else Scheme.PROPOSED_RANDOM
    return [scheme for scheme in schemes if scheme is not skip]


def _scheme_seed(ctx: ExperimentContext, instance: Instance, scheme: Scheme,
                 ordering: Ordering, purpose: int = 0) -> np.random.SeedSequence:
    return ctx.config.seed_for(SCHEME_STREAM, instance.point.index, instance.trial_index,
                               _SCHEME_INDEX[scheme], _ORDERING_INDEX[ordering], purpose)


def run_scheme(ctx: ExperimentContext, instance: Instance, scheme: Scheme,
               ordering: Ordering) -> SelectionDecision:
    cfg = ctx.config
    model = ctx.model
    rates = instance.channels.rates
    seed = _scheme_seed(ctx, instance, scheme, ordering)
    picker = FeaturePicker.for_model(ordering, model, seed)

    if scheme is Scheme.PROPOSED_RANDOM:
        return select_random_ordering(instance.scores, rates, instance.calibration, model.g_min,
                                      model.delta_max, instance.comm, model.feature_dim,
                                      cfg.temperature, seed)
    if scheme is Scheme.PROPOSED_IMPORTANCE:
        return select_importance_ordering(instance.scores, rates, instance.calibration, model,
                                          instance.comm, cfg.temperature)
    if scheme is Scheme.WHEN2COM:
        return when2com_select(instance.scores, rates, instance.comm, picker, cfg.temperature)
    if scheme is Scheme.BEST_CHANNEL:
        return best_channel_select(rates, cfg.best_channel_k, instance.comm, picker)
    if scheme is Scheme.ALL_ATTENTIVE:
        return all_inclusive_select(rates.size, rates, Fusion.ATTENTIVE, instance.comm, picker)
    if scheme is Scheme.ALL_AVERAGE:
        return all_inclusive_select(rates.size, rates, Fusion.AVERAGE, instance.comm, picker)
    if scheme is Scheme.EXHAUSTIVE:
        return exhaustive_select(instance.scores, rates, instance.calibration, model, ordering,
                                 instance.comm, cfg.temperature, seed, cfg.exhaustive_limit)
    raise ValueError(f"unknown scheme {scheme}")


#MARK: trial
@dataclass(frozen=True)
class TrialOutcome:
    trial_id: int
    scheme: Scheme
    ordering: Ordering
    sweep_value: float
    num_selected: int
    num_features: int
    objective: float
    surrogate_lb: float
    true_class: int
    predicted_class: int
    correct: bool
    rho: float
    eta: float
    pi_hat: tuple[float, ...]
    fallback: bool


def infer(model: GmModel, scenario: Scenario, scores: np.ndarray, decision: SelectionDecision,
          temperature: float) -> tuple[int, float, float]:
    """prune, fuse and classify the uploads of a non-empty decision -> (class, rho, eta)"""
    chosen = np.asarray(decision.sensors, dtype=int)
    if decision.fusion is Fusion.AVERAGE:
        weights = uniform_weights(chosen.size)
    else:
        weights = softmax_weights(scores[chosen], temperature)
    pruned = prune(scenario.features[chosen], decision.feature_dims)
    predicted = classify_linear(model, fuse(pruned, weights, decision.feature_dims))
    rho, eta = rho_eta(weights, scenario.relevance[chosen])
    return predicted, rho, eta


def run_trial(ctx: ExperimentContext, instance: Instance, scheme: Scheme,
              ordering: Ordering) -> TrialOutcome:
    """
    run one scheme on one instance; infeasible selections become flagged uniform guesses
    raises InvariantError if an executed decision overruns the slot
    """
    cfg = ctx.config
    scenario = instance.scenario
    rates = instance.channels.rates
    fallback = False
    try:
        decision = run_scheme(ctx, instance, scheme, ordering)
    except InfeasibleSelectionError as e:
        logger.debug(f"trial {instance.trial_index}: {e}")
        fusion = Fusion.AVERAGE if scheme is Scheme.ALL_AVERAGE else Fusion.ATTENTIVE
        decision = empty_decision(scheme, fusion)

    if decision.is_empty:
        guess_rng = np.random.default_rng(_scheme_seed(ctx, instance, scheme, ordering, purpose=1))
        predicted = int(guess_rng.integers(ctx.model.num_classes))
        rho = eta = float("nan")
        fallback = True
        pi_hat: tuple[float, ...] = ()
    else:
        fits, times = check_budget(decision.sensors, decision.num_features, instance.comm, rates)
        if not fits:
            raise InvariantError(f"{scheme.value} overran the slot in trial {instance.trial_index}: "
                                 f"{times.sum():.6g}s > {instance.comm.slot_duration:.6g}s")
        predicted, rho, eta = infer(ctx.model, scenario, instance.scores, decision, cfg.temperature)
        chosen = np.asarray(decision.sensors, dtype=int)
        pi_hat = tuple(float(p) for p in np.atleast_1d(
            posterior_estimate(instance.calibration, instance.scores[chosen])))

    objective, surrogate_lb = evaluate_objective(decision, instance.scores, instance.calibration,
                                                 ctx.model, ordering, cfg.temperature)
    return TrialOutcome(
        trial_id=instance.trial_index,
        scheme=scheme,
        ordering=ordering,
        sweep_value=instance.point.value,
        num_selected=len(decision.sensors),
        num_features=decision.num_features,
        objective=objective,
        surrogate_lb=surrogate_lb,
        true_class=scenario.true_class,
        predicted_class=predicted,
        correct=predicted == scenario.true_class,
        rho=rho,
        eta=eta,
        pi_hat=pi_hat,
        fallback=fallback,
    )


#MARK: aggregation
@dataclass(frozen=True)
class PointSummary:
    sweep_axis: str
    sweep_value: float
    scheme: Scheme
    ordering: Ordering
    trials: int
    accuracy: float
    std_err: float
    mean_num_sensors: float
    mean_num_features: float
    mean_objective: float
    fallbacks: int

    def row(self) -> dict:
        return {
            "sweep_axis": self.sweep_axis,
            "sweep_value": self.sweep_value,
            "scheme": self.scheme.value,
            "trials": self.trials,
            "accuracy": self.accuracy,
            "std_err": self.std_err,
            "mean_num_sensors": self.mean_num_sensors,
            "mean_num_features": self.mean_num_features,
            "mean_objective": self.mean_objective,
        }


def binomial_std_err(accuracy: float, trials: int) -> float:
    return float(np.sqrt(accuracy * (1 - accuracy) / trials))


def summarize(outcomes: list[TrialOutcome], sweep_axis: str) -> PointSummary:
    """pure fold over the outcomes of one (scheme, point)"""
    if not outcomes:
        raise ValueError("nothing to summarize")
    first = outcomes[0]
    correct = np.array([o.correct for o in outcomes], dtype=float)
    objectives = np.array([o.objective for o in outcomes], dtype=float)
    accuracy = float(correct.mean())
    finite = objectives[np.isfinite(objectives)]
    return PointSummary(
        sweep_axis=sweep_axis,
        sweep_value=first.sweep_value,
        scheme=first.scheme,
        ordering=first.ordering,
        trials=len(outcomes),
        accuracy=accuracy,
        std_err=binomial_std_err(accuracy, len(outcomes)),
        mean_num_sensors=float(np.mean([o.num_selected for o in outcomes])),
        mean_num_features=float(np.mean([o.num_features for o in outcomes])),
        mean_objective=float(finite.mean()) if finite.size else float("nan"),
        fallbacks=sum(o.fallback for o in outcomes),
    )


#MARK: sweep
@timer.time_function("sweep", "EXPERIMENT")
def sweep(ctx: ExperimentContext, ordering: Ordering, bus: Optional[EventBus] = None) -> list[PointSummary]:
    """
    every configured scheme at every sweep point; rows ordered by (scheme, point)
    trials at a point share scenario and channels across schemes
    """
    cfg = ctx.config
    bus = bus or EventBus()
    schemes = schemes_for(ordering, cfg.scheme_list())
    points = sweep_points(cfg)
    bus.publish(RunStartedEvent({"kind": "sweep", "ordering": ordering.value}))
    logger.info(f"sweep over {cfg.sweep_axis}: {len(points)} points x {cfg.trials} trials, "
                f"{ordering.value} ordering, schemes {', '.join(s.value for s in schemes)}")

    summaries: dict[tuple[Scheme, int], PointSummary] = {}
    for point in points:
        outcomes: dict[Scheme, list[TrialOutcome]] = {scheme: [] for scheme in schemes}
        for trial_index in range(cfg.trials):
            instance = simulate_instance(ctx, point, trial_index)
            for scheme in schemes:
                outcome = run_trial(ctx, instance, scheme, ordering)
                outcomes[scheme].append(outcome)
                bus.publish(TrialCompletedEvent(outcome))
        for scheme in schemes:
            summary = summarize(outcomes[scheme], cfg.sweep_axis)
            summaries[(scheme, point.index)] = summary
            bus.publish(PointCompletedEvent(summary))

    rows = [summaries[(scheme, point.index)] for scheme in schemes for point in points]
    bus.publish(RunFinishedEvent({"kind": "sweep", "ordering": ordering.value, "rows": len(rows)}))
    return rows


#MARK: exact expectation
def enumerate_expected_accuracy(model: GmModel, calibration: CalibrationStats, scores,
                                selection, num_features: int, ordering: Ordering,
                                temperature: float = 1.0) -> float:
    """
    expectation of the conditional accuracy bound over all 2^|S| relevance patterns,
    each weighted by the product of pi_hat (relevant) and 1 - pi_hat (irrelevant)
    """
    selection = np.asarray(selection, dtype=int).ravel()
    if selection.size == 0:
        raise ValueError("empty selection")
    if selection.size > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration limited to {ENUMERATION_LIMIT} sensors, got {selection.size}")
    if not 1 <= num_features <= model.feature_dim:
        raise ValueError(f"feature count {num_features} outside 1..{model.feature_dim}")
    scores = np.asarray(scores, dtype=float)[selection]
    pi_hat = np.atleast_1d(posterior_estimate(calibration, scores))
    weights = softmax_weights(scores, temperature).weights
    eta = float(np.sum(weights ** 2))

    if ordering is Ordering.RANDOM:
        beta = num_features / model.feature_dim
        g_min, delta_max = beta * model.g_min, np.sqrt(beta) * model.delta_max
    else:
        g_min = model.g_min_by_count[num_features - 1]
        delta_max = model.delta_max_by_count[num_features - 1]

    count = selection.size
    patterns = (np.arange(2 ** count)[:, None] >> np.arange(count)[None, :]) & 1
    probs = np.prod(np.where(patterns == 1, pi_hat, 1 - pi_hat), axis=1)
    rho = patterns @ weights
    margins = np.sqrt(g_min) / 2 - 2 * (1 - rho) * delta_max
    bounds = 1.0 - (model.num_classes - 1) * tail_q(margins / np.sqrt(eta))
    return float(probs @ bounds)


def taylor_gap(model: GmModel, calibration: CalibrationStats, scores, selection,
               num_features: int, ordering: Ordering, temperature: float = 1.0) -> float:
    """surrogate A_lb_hat minus the exact expected bound"""
    selection = np.asarray(selection, dtype=int).ravel()
    scores = np.asarray(scores, dtype=float)
    exp_scores = softmax_weights(scores[selection], temperature).exp_scores
    pi_hat = np.atleast_1d(posterior_estimate(calibration, scores[selection]))
    if ordering is Ordering.RANDOM:
        psi = expected_margin(pi_hat, model.g_min, model.delta_max)
    else:
        psi = expected_margin(pi_hat, model.g_min_by_count[num_features - 1],
                              model.delta_max_by_count[num_features - 1])
    _, approx = surrogate(np.arange(selection.size), exp_scores, psi, ordering, num_features,
                          model.feature_dim, model.num_classes)
    exact = enumerate_expected_accuracy(model, calibration, scores, selection, num_features,
                                        ordering, temperature)
    return approx - exact


#MARK: bound validation
@dataclass(frozen=True)
class BoundRow:
    ordering: Ordering
    k: int
    empirical_acc: float
    empirical_se: float
    theory_lb: float

    def row(self) -> dict:
        return {"ordering": self.ordering.value, "k": self.k, "empirical_acc": self.empirical_acc,
                "empirical_se": self.empirical_se, "theory_lb": self.theory_lb}


@dataclass(frozen=True)
class BoundValidation:
    rows: list[BoundRow]
    mean_taylor_gap: float
    max_taylor_gap: float


@timer.time_function("validate_bound", "EXPERIMENT")
def validate_bound(ctx: ExperimentContext, ordering: Ordering, trials: Optional[int] = None,
                   bus: Optional[EventBus] = None) -> BoundValidation:
    """
    rank sensors by priority, then for k = 1..M compare the empirical accuracy of the top-k
    selection with the mean surrogate bound; infeasible k count as uniform guesses
    """
    cfg = ctx.config
    trials = trials or cfg.bound_trials
    bus = bus or EventBus()
    model = ctx.model
    num_sensors = cfg.num_sensors
    scheme = Scheme.PROPOSED_RANDOM if ordering is Ordering.RANDOM else Scheme.PROPOSED_IMPORTANCE
    bus.publish(RunStartedEvent({"kind": "validate-bound", "ordering": ordering.value}))

    correct = np.zeros(num_sensors)
    theory_sum = np.zeros(num_sensors)
    theory_count = np.zeros(num_sensors)
    gaps = []
    for trial_index in range(trials):
        instance = simulate_instance(ctx, BASE_POINT, trial_index)
        rates = instance.channels.rates
        pi_hat = posterior_estimate(instance.calibration, instance.scores)
        ranking = priority_order(expected_margin(pi_hat, model.g_min, model.delta_max), rates)
        picker = FeaturePicker.for_model(ordering, model, _scheme_seed(ctx, instance, scheme, ordering))
        guess_rng = np.random.default_rng(_scheme_seed(ctx, instance, scheme, ordering, purpose=1))

        for k in range(1, num_sensors + 1):
            decision = fixed_selection(scheme, ranking[:k], rates, instance.comm, picker)
            if decision.is_empty:
                predicted = int(guess_rng.integers(model.num_classes))
            else:
                predicted, _, _ = infer(model, instance.scenario, instance.scores, decision,
                                        cfg.temperature)
                _, bound = evaluate_objective(decision, instance.scores, instance.calibration,
                                              model, ordering, cfg.temperature)
                theory_sum[k - 1] += bound
                theory_count[k - 1] += 1
                if trial_index < TAYLOR_GAP_TRIALS and k <= ENUMERATION_LIMIT:
                    gaps.append(taylor_gap(model, instance.calibration, instance.scores,
                                           decision.sensors, decision.num_features, ordering,
                                           cfg.temperature))
            correct[k - 1] += predicted == instance.scenario.true_class

    rows = []
    for k in range(1, num_sensors + 1):
        accuracy = float(correct[k - 1] / trials)
        theory = float(theory_sum[k - 1] / theory_count[k - 1]) if theory_count[k - 1] else float("nan")
        rows.append(BoundRow(ordering, k, accuracy, binomial_std_err(accuracy, trials), theory))
    gaps = np.asarray(gaps, dtype=float)
    mean_gap = float(gaps.mean()) if gaps.size else float("nan")
    max_gap = float(np.abs(gaps).max()) if gaps.size else float("nan")
    logger.info(f"taylor gap ({ordering.value}): mean {mean_gap:.3e}, max |gap| {max_gap:.3e} "
                f"over {gaps.size} selections")
    bus.publish(RunFinishedEvent({"kind": "validate-bound", "ordering": ordering.value, "rows": len(rows)}))
    return BoundValidation(rows, mean_gap, max_gap)


#MARK: oracle gap
@dataclass(frozen=True)
class OracleGapRow:
    ordering: Ordering
    instances: int
    median_gap: float
    p95_gap: float
    max_gap: float

    def row(self) -> dict:
        return {"ordering": self.ordering.value, "instances": self.instances,
                "median_gap": self.median_gap, "p95_gap": self.p95_gap, "max_gap": self.max_gap}


def oracle_config(cfg: ExperimentConfig, ordering: Ordering) -> ExperimentConfig:
    """small instance settings the exhaustive search can afford"""
    num_sensors = cfg.oracle_sensors_random if ordering is Ordering.RANDOM else cfg.oracle_sensors_importance
    feature_dim = cfg.oracle_feature_dim
    return dataclasses.replace(cfg, feature_dim=feature_dim, key_dim=min(cfg.key_dim, feature_dim),
                               num_sensors=num_sensors, slot_duration=None,
                               exhaustive_limit=max(cfg.exhaustive_limit, num_sensors))


def relative_gap(optimal: SelectionDecision, found: SelectionDecision) -> float:
    """(F_opt - F_alg) / |F_opt|; an empty answer only costs something if the optimum is positive"""
    if optimal.is_empty or optimal.objective is None:
        return 0.0
    best = optimal.objective
    if found.is_empty or found.objective is None:
        return 0.0 if best <= 0 else 1.0
    if best == 0:
        return 0.0 if found.objective >= 0 else float("inf")
    return (best - found.objective) / abs(best)


@timer.time_function("oracle_gap", "EXPERIMENT")
def oracle_gap(cfg: ExperimentConfig, ordering: Ordering) -> OracleGapRow:
    """proposed algorithm vs exhaustive search on small instances, relative surrogate gap"""
    small = oracle_config(cfg, ordering)
    ctx = prepare_context(small, model=build_model(small.num_classes, small.feature_dim, small.centroid_radius,
                                                   small.cov_low, small.cov_high,
                                                   cfg.seed_for(ORACLE_STREAM, _ORDERING_INDEX[ordering])))
    scheme = Scheme.PROPOSED_RANDOM if ordering is Ordering.RANDOM else Scheme.PROPOSED_IMPORTANCE
    gaps = np.empty(small.oracle_instances)
    for index in range(small.oracle_instances):
        instance = simulate_instance(ctx, BASE_POINT, index)
        found = run_scheme(ctx, instance, scheme, ordering)
        optimal = run_scheme(ctx, instance, Scheme.EXHAUSTIVE, ordering)
        gaps[index] = relative_gap(optimal, found)
        if gaps[index] < -1e-9:
            raise InvariantError(f"exhaustive search beaten on instance {index}: gap {gaps[index]:.3e}")
    result = OracleGapRow(ordering, gaps.size, float(np.median(gaps)),
                          float(np.percentile(gaps, 95)), float(gaps.max()))
    logger.info(f"oracle gap ({ordering.value}, M={small.num_sensors}, D={small.feature_dim}): "
                f"median {result.median_gap:.3%}, p95 {result.p95_gap:.3%}, max {result.max_gap:.3%}")
    return result


#MARK: csv output
def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: Iterable[dict], columns: tuple[str, ...], path: Union[str, Path]) -> None:
    """header + rows, floats as repr() so reruns are byte-identical"""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row[column]) for column in columns])
    logger.info(f"wrote {path}")
