# ==========================
# selftest.py
# ==========================
"""
selftest.py - fast invariant suite behind `main.py selftest`
each check returns (passed, detail); failures are collected, not raised
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from rich.console import Console
from rich.table import Table

from accuracy_model import (Ordering, conditional_accuracy_lb, expected_margin, objective_value,
                            relaxed_objective, softmax_weights)
from config import ExperimentConfig
from errors import InvariantError
from experiment import SweepPoint, prepare_context, run_scheme, run_trial, schemes_for, simulate_instance
from gm_model import model_from_arrays
from selection import Scheme
from semantic_matching import (CalibrationStats, encode_query, posterior_estimate, posterior_exact,
                               truncation_matching)

logger = logging.getLogger(__name__)

# equality cases of the sandwich (one sensor) are only exact up to rounding
SANDWICH_RTOL = 1e-12

CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = []


def check(name: str):
    """register a check under a display name"""
    def decorator(func):
        CHECKS.append((name, func))
        return func
    return decorator


#MARK: closed-form examples
@check("softmax weights of (0, ln 2)")
def check_softmax() -> tuple[bool, str]:
    weights = softmax_weights([0.0, np.log(2.0)], 1.0).weights
    return bool(np.allclose(weights, [1 / 3, 2 / 3], atol=1e-12)), f"w = {weights.round(6).tolist()}"


@check("conditional bound at g_min=4, L=2")
def check_bound() -> tuple[bool, str]:
    value = conditional_accuracy_lb(4.0, 0.0, 1.0, 1.0, 2)
    return abs(value - 0.841345) < 1e-6, f"A_lb = {value:.6f}"


@check("posterior estimate example")
def check_posterior_example() -> tuple[bool, str]:
    value = posterior_estimate(CalibrationStats(2.0, 0.0, 1.0, 0.4), 1.0)
    return round(value, 4) == 0.8313, f"pi_hat = {value:.6f}"


@check("estimate exact on homogeneous gaps")
def check_homogeneous_posterior() -> tuple[bool, str]:
    # all wrong classes score 0 against the query, the true class scores 2
    centroids = np.array([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
    cov = np.array([0.5, 1.0, 1.0])
    model = model_from_arrays(centroids, cov)
    matching = truncation_matching(3, 3)
    query = encode_query(matching, np.array([1.0, 0.0, 0.0]))
    stats = CalibrationStats(alpha_bar=2.0, phi_bar=1.0, sigma2_bar=0.5, prior=0.4)
    grid = np.linspace(-3.0, 5.0, 100)
    exact = posterior_exact(model, matching, query, 0, grid, stats.prior)
    worst = float(np.max(np.abs(exact - posterior_estimate(stats, grid))))
    return worst < 1e-9, f"max |diff| = {worst:.2e}"


#MARK: surrogate properties
@check("sandwich bounds on F_rnd")
def check_sandwich(instances: int = 1000, seed: int = 11) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    feature_dim = 20
    violations = 0
    for _ in range(instances):
        count = int(rng.integers(1, 13))
        total = count + int(rng.integers(0, 4))
        scores = 2.0 * rng.standard_normal(count)
        pi_hat = posterior_estimate(CalibrationStats(1.5, 0.0, 1.0, 0.4), scores)
        delta_max = rng.uniform(0.1, 1.0)
        g_min = (4 * delta_max + rng.uniform(0.01, 2.0)) ** 2  # every margin positive
        psi = np.atleast_1d(expected_margin(pi_hat, g_min, delta_max))
        num_features = int(rng.integers(1, feature_dim + 1))
        exp_scores = softmax_weights(scores, 1.0).exp_scores
        value = objective_value(exp_scores, psi, np.sqrt(num_features / feature_dim))
        upper = relaxed_objective(psi, num_features, feature_dim)
        lower = upper / total
        if not lower <= value * (1 + SANDWICH_RTOL) or not value <= upper * (1 + SANDWICH_RTOL):
            violations += 1
    return violations == 0, f"{violations}/{instances} violations"


@check("dropping a negative margin raises F_rnd")
def check_negative_removal(instances: int = 1000, seed: int = 12) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(instances):
        positive = int(rng.integers(1, 7))
        psi = np.concatenate([rng.uniform(0.0, 2.0, positive), [rng.uniform(-2.0, -1e-3)]])
        exp_scores = np.exp(rng.standard_normal(positive + 1))
        scale = np.sqrt(rng.uniform(0.05, 1.0))
        before = objective_value(exp_scores, psi, scale)
        after = objective_value(exp_scores[:-1], psi[:-1], scale)
        violations += not after > before
    return violations == 0, f"{violations}/{instances} violations"


#MARK: harness
def _small_config() -> ExperimentConfig:
    return ExperimentConfig(num_classes=10, feature_dim=20, key_dim=10, num_sensors=8,
                            calibration_samples=2000, trials=1,
                            schemes=tuple(scheme.value for scheme in Scheme))


@check("every scheme respects the slot")
def check_budgets(instances: int = 30) -> tuple[bool, str]:
    ctx = prepare_context(_small_config())
    runs = 0
    try:
        for index, snr_db in enumerate((-10.0, 0.0, 10.0)):
            point = SweepPoint("snr_db", snr_db, index)
            for trial_index in range(instances):
                instance = simulate_instance(ctx, point, trial_index)
                for ordering in (Ordering.RANDOM, Ordering.IMPORTANCE):
                    for scheme in schemes_for(ordering, ctx.config.scheme_list()):
                        run_trial(ctx, instance, scheme, ordering)
                        runs += 1
    except InvariantError as e:
        return False, str(e)
    return True, f"{runs} executed decisions within budget"


@check("decisions are deterministic")
def check_determinism(instances: int = 20) -> tuple[bool, str]:
    ctx = prepare_context(_small_config())
    point = SweepPoint("snr_db", 0.0, 0)
    for trial_index in range(instances):
        for ordering in (Ordering.RANDOM, Ordering.IMPORTANCE):
            for scheme in schemes_for(ordering, ctx.config.scheme_list()):
                first, second = (run_scheme(ctx, simulate_instance(ctx, point, trial_index), scheme, ordering)
                                 for _ in range(2))
                if (first.sensors != second.sensors
                        or not np.array_equal(first.feature_dims, second.feature_dims)):
                    return False, f"{scheme.value}/{ordering.value} differs on trial {trial_index}"
    return True, f"{instances} instances reproduced"


#MARK: runner
@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def run_checks() -> list[CheckResult]:
    results = []
    for name, func in CHECKS:
        try:
            passed, detail = func()
        except Exception as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        logger.debug(f"selftest {name}: {'ok' if passed else 'FAILED'} ({detail})")
        results.append(CheckResult(name, passed, detail))
    return results


def render(results: list[CheckResult], console: Console) -> None:
    table = Table(title="selftest")
    table.add_column("check")
    table.add_column("result")
    table.add_column("detail", style="dim")
    for result in results:
        table.add_row(result.name, "[green]pass[/green]" if result.passed else "[red]FAIL[/red]", result.detail)
    console.print(table)
