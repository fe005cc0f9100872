import itertools

import numpy as np
import pytest

from accuracy_model import Ordering, expected_margin, objective_value, softmax_weights
from channel_comm import CommConfig, check_budget, max_feature_count, sample_channels
from errors import InfeasibleSelectionError
from gm_model import build_model, model_from_arrays
from selection import (FeaturePicker, Fusion, Scheme, all_inclusive_select, best_channel_select,
                       evaluate_objective, exhaustive_select, fixed_selection, margins_by_count,
                       priority_order, priority_random, select_importance_ordering,
                       select_random_ordering, when2com_select)
from semantic_matching import CalibrationStats, posterior_estimate

FEATURE_DIM = 12
STATS = CalibrationStats(alpha_bar=1.5, phi_bar=0.0, sigma2_bar=1.0, prior=0.4)


@pytest.fixture
def comm():
    return CommConfig(slot_duration=32 * FEATURE_DIM / 1e6).with_snr_db(0.0)


@pytest.fixture
def model():
    return build_model(8, FEATURE_DIM, 3.0, 0.1, 1.0, seed=21)


def random_instance(rng, num_sensors, comm):
    scores = 2.0 * rng.standard_normal(num_sensors)
    rates = sample_channels(num_sensors, comm, seed=int(rng.integers(1 << 31))).rates
    return scores, rates


class TestPriority:

    def test_profit_density(self):
        assert priority_random([1.0], [2.0])[0] == 2.0
        assert priority_random([0.0], [123.0])[0] == 0.0

    def test_ranking_matches_density_for_any_count(self):
        rng = np.random.default_rng(0)
        psi = rng.uniform(0, 2, 8)
        rates = rng.uniform(1e5, 1e6, 8)
        gamma_rank = np.argsort(-priority_random(psi, rates), kind="stable")
        for num_features in (1, 5, 12):
            density = psi ** 2 / (32 * num_features / rates)
            np.testing.assert_array_equal(np.argsort(-density, kind="stable"), gamma_rank)

    def test_order_puts_negative_margins_last(self):
        order = priority_order([0.5, -0.2, 1.0, -0.9, 0.0], [1.0, 1.0, 1.0, 1.0, 1.0])
        assert order.tolist() == [2, 0, 4, 1, 3]


class TestRandomOrdering:

    def test_single_sensor_ample_rate(self, comm):
        decision = select_random_ordering([3.0], [1e12], STATS, 4.0, 0.5, comm, FEATURE_DIM)
        assert decision.sensors == (0,)
        assert decision.num_features == FEATURE_DIM

    def test_prefers_the_faster_of_twin_sensors(self, comm):
        # only one full upload fits and the slower sensor cannot add a single feature usefully
        rate = 32 * FEATURE_DIM / comm.slot_duration
        decision = select_random_ordering([2.0, 2.0], [rate, rate / 50], STATS, 4.0, 0.5, comm, FEATURE_DIM)
        assert decision.sensors == (0,)

    def test_nothing_worth_sending(self, comm):
        decision = select_random_ordering([-30.0, -30.0], [1e9, 1e9], STATS, 0.01, 5.0, comm, FEATURE_DIM)
        assert decision.is_empty
        assert decision.scheme is Scheme.PROPOSED_RANDOM

    def test_decision_fits_and_dims_are_random_subset(self, comm):
        rng = np.random.default_rng(1)
        for _ in range(50):
            scores, rates = random_instance(rng, 10, comm)
            decision = select_random_ordering(scores, rates, STATS, 4.0, 0.5, comm, FEATURE_DIM, seed=3)
            if decision.is_empty:
                continue
            assert check_budget(decision.sensors, decision.num_features, comm, rates)[0]
            assert decision.feature_dims.size == decision.num_features
            assert np.all(np.diff(decision.feature_dims) > 0)

    def test_deterministic(self, comm):
        rng = np.random.default_rng(2)
        scores, rates = random_instance(rng, 10, comm)
        first = select_random_ordering(scores, rates, STATS, 4.0, 0.5, comm, FEATURE_DIM, seed=5)
        second = select_random_ordering(scores, rates, STATS, 4.0, 0.5, comm, FEATURE_DIM, seed=5)
        assert first.sensors == second.sensors
        np.testing.assert_array_equal(first.feature_dims, second.feature_dims)


class TestImportanceOrdering:

    def test_ample_budget_takes_everything_useful(self, model):
        huge = CommConfig(slot_duration=1e3)
        scores = np.array([14.0, 13.0, -8.0, 15.0])
        decision = select_importance_ordering(scores, np.full(4, 1e6), STATS, model, huge)
        psi = margins_by_count(posterior_estimate(STATS, scores), model)[-1]
        assert decision.num_features == FEATURE_DIM
        assert set(decision.sensors) == set(np.flatnonzero(psi >= 0))

    def test_uniform_importance_degenerates_to_random_ordering(self):
        # every class pair gains the same on every dim: G(k) and delta(k)^2 grow linearly in k
        uniform = model_from_arrays(np.outer([1.0, -0.5, 2.0, 0.25], np.ones(6)), np.ones(6))
        np.testing.assert_allclose(uniform.g_min_by_count, uniform.g_min * np.arange(1, 7) / 6)
        tight = CommConfig(slot_duration=32 * 6 / 1e6).with_snr_db(0.0)
        rng = np.random.default_rng(4)
        for _ in range(30):
            scores, rates = random_instance(rng, 6, tight)
            imp = select_importance_ordering(scores, rates, STATS, uniform, tight)
            rnd = select_random_ordering(scores, rates, STATS, uniform.g_min, uniform.delta_max, tight, 6)
            assert imp.is_empty == rnd.is_empty
            if imp.is_empty:
                continue
            # both surrogates coincide, and the importance scan only sees longest-fit prefixes
            for decision in (imp, rnd):
                by_random = evaluate_objective(decision, scores, STATS, uniform, Ordering.RANDOM)[0]
                by_importance = evaluate_objective(decision, scores, STATS, uniform, Ordering.IMPORTANCE)[0]
                assert by_random == pytest.approx(by_importance, rel=1e-9)
            assert imp.objective <= rnd.objective + 1e-12
            # same priority order at every D~, so the chosen prefixes are nested
            if imp.num_features <= rnd.num_features:
                assert set(imp.sensors) >= set(rnd.sensors)
            else:
                assert set(imp.sensors) < set(rnd.sensors)

    def test_uploads_top_importance_dims(self, model, comm):
        rng = np.random.default_rng(6)
        scores, rates = random_instance(rng, 8, comm)
        decision = select_importance_ordering(scores + 8.0, rates * 10, STATS, model, comm)
        assert not decision.is_empty
        np.testing.assert_array_equal(decision.feature_dims, model.top_dims(decision.num_features))


class TestWhen2com:

    def test_uniform_scores_fall_back_to_first_sensor(self, comm):
        picker = FeaturePicker(Ordering.RANDOM, FEATURE_DIM, seed=0)
        decision = when2com_select(np.zeros(4), np.full(4, 1e7), comm, picker)
        assert decision.sensors == (0,)

    def test_dominant_score_gives_singleton(self, comm):
        picker = FeaturePicker(Ordering.RANDOM, FEATURE_DIM, seed=0)
        decision = when2com_select([0.0, 9.0, 0.0, 0.0], np.full(4, 1e7), comm, picker)
        assert decision.sensors == (1,)

    def test_matches_threshold_oracle(self, comm):
        rng = np.random.default_rng(8)
        picker = FeaturePicker(Ordering.RANDOM, FEATURE_DIM, seed=0)
        for _ in range(50):
            scores = rng.standard_normal(7)
            exp = np.exp(scores - scores.max())
            expected = tuple(int(m) for m in np.flatnonzero(exp / exp.sum() > 1 / 7))
            decision = when2com_select(scores, np.full(7, 1e9), comm, picker)
            assert decision.sensors == expected

    def test_drops_lowest_weight_until_it_fits(self, comm):
        rate = 32 * FEATURE_DIM / comm.slot_duration
        picker = FeaturePicker(Ordering.RANDOM, FEATURE_DIM, seed=0)
        # three above-average sensors, the third is too slow to share the slot
        rates = np.array([rate, rate, rate / 20, 1.0])
        decision = when2com_select([2.0, 2.1, 1.9, -5.0], rates, comm, picker)
        assert decision.sensors == (0, 1)
        assert decision.num_features == FEATURE_DIM // 2


class TestBestChannel:

    def test_top_one_is_argmax(self, comm):
        picker = FeaturePicker(Ordering.RANDOM, FEATURE_DIM, seed=0)
        rates = np.array([1e6, 5e6, 2e6])
        assert best_channel_select(rates, 1, comm, picker).sensors == (1,)

    def test_k_equal_m_takes_all_when_affordable(self, comm):
        picker = FeaturePicker(Ordering.RANDOM, FEATURE_DIM, seed=0)
        assert best_channel_select(np.full(3, 1e9), 3, comm, picker).sensors == (0, 1, 2)

    def test_ties_in_index_order(self, comm):
        picker = FeaturePicker(Ordering.RANDOM, FEATURE_DIM, seed=0)
        assert best_channel_select(np.full(5, 1e9), 2, comm, picker).sensors == (0, 1)

    def test_shrinks_weakest_first(self, comm):
        picker = FeaturePicker(Ordering.RANDOM, FEATURE_DIM, seed=0)
        rate = 32 * FEATURE_DIM / comm.slot_duration
        decision = best_channel_select(np.array([rate, 1.0, rate / 2]), 3, comm, picker)
        assert decision.sensors == (0, 2)


class TestAllInclusive:

    def test_single_sensor_equals_best_channel(self, comm):
        picker = FeaturePicker(Ordering.IMPORTANCE, FEATURE_DIM, np.arange(FEATURE_DIM))
        all_in = all_inclusive_select(1, [2e6], Fusion.ATTENTIVE, comm, picker)
        best = best_channel_select([2e6], 1, comm, picker)
        assert all_in.sensors == best.sensors
        assert all_in.num_features == best.num_features

    def test_infeasible_raises(self, comm):
        picker = FeaturePicker(Ordering.RANDOM, FEATURE_DIM, seed=0)
        with pytest.raises(InfeasibleSelectionError):
            all_inclusive_select(3, [1e6, 1e6, 1.0], Fusion.AVERAGE, comm, picker)

    def test_hand_arithmetic(self):
        comm = CommConfig(slot_duration=1e-3, bits_per_feature=10)
        picker = FeaturePicker(Ordering.RANDOM, 100, seed=0)
        # per-feature time 10/1e5 + 10/2e5 + 10/4e5 = 1.75e-4 s -> 5 features in 1 ms
        decision = all_inclusive_select(3, [1e5, 2e5, 4e5], Fusion.AVERAGE, comm, picker)
        assert decision.num_features == 5
        assert decision.fusion is Fusion.AVERAGE
        assert decision.scheme is Scheme.ALL_AVERAGE


class TestExhaustive:

    def test_single_sensor(self, model, comm):
        decision = exhaustive_select([2.0], [1e9], STATS, model, Ordering.RANDOM, comm)
        assert decision.sensors == (0,)
        assert decision.num_features == FEATURE_DIM

    def test_limit(self, model, comm):
        with pytest.raises(ValueError):
            exhaustive_select(np.zeros(5), np.ones(5), STATS, model, Ordering.RANDOM, comm, limit=4)

    def test_matches_brute_force_random_ordering(self, model, comm):
        rng = np.random.default_rng(10)
        for _ in range(10):
            scores, rates = random_instance(rng, 6, comm)
            decision = exhaustive_select(scores, rates, STATS, model, Ordering.RANDOM, comm)
            psi = expected_margin(posterior_estimate(STATS, scores), model.g_min, model.delta_max)
            e = softmax_weights(scores, 1.0).exp_scores
            best = -np.inf
            for size in range(1, 7):
                for subset in itertools.combinations(range(6), size):
                    chosen = list(subset)
                    if np.any(rates[chosen] <= 0):
                        continue
                    top = max_feature_count(rates[chosen], comm, FEATURE_DIM)
                    for count in range(1, top + 1):
                        best = max(best, objective_value(e[chosen], psi[chosen], np.sqrt(count / FEATURE_DIM)))
            if np.isinf(best):
                assert decision.is_empty
            else:
                assert decision.objective == pytest.approx(best, rel=1e-12)

    def test_never_below_proposed(self, model, comm):
        rng = np.random.default_rng(11)
        for _ in range(30):
            scores, rates = random_instance(rng, 7, comm)
            for ordering in Ordering:
                oracle = exhaustive_select(scores, rates, STATS, model, ordering, comm)
                if ordering is Ordering.RANDOM:
                    found = select_random_ordering(scores, rates, STATS, model.g_min, model.delta_max,
                                                   comm, FEATURE_DIM)
                else:
                    found = select_importance_ordering(scores, rates, STATS, model, comm)
                if not found.is_empty:
                    assert oracle.objective >= found.objective - 1e-12

    def test_larger_slot_never_hurts(self, model, comm):
        rng = np.random.default_rng(12)
        wider = CommConfig(comm.bandwidth, comm.noise_power, comm.tx_power, comm.path_loss,
                           2 * comm.slot_duration, comm.bits_per_feature)
        for _ in range(10):
            scores, rates = random_instance(rng, 6, comm)
            narrow = exhaustive_select(scores, rates, STATS, model, Ordering.IMPORTANCE, comm)
            wide = exhaustive_select(scores, rates, STATS, model, Ordering.IMPORTANCE, wider)
            if not narrow.is_empty:
                assert wide.objective >= narrow.objective


class TestEvaluateObjective:

    def test_empty_is_nan(self, model, comm):
        picker = FeaturePicker(Ordering.RANDOM, FEATURE_DIM, seed=0)
        decision = fixed_selection(Scheme.BEST_CHANNEL, [0], [1.0], comm, picker)
        assert decision.is_empty
        assert all(np.isnan(evaluate_objective(decision, [0.0], STATS, model, Ordering.RANDOM)))

    def test_matches_proposed_objective(self, model, comm):
        rng = np.random.default_rng(13)
        scores, rates = random_instance(rng, 8, comm)
        decision = select_importance_ordering(scores + 8.0, rates * 10, STATS, model, comm)
        assert not decision.is_empty
        value, bound = evaluate_objective(decision, scores + 8.0, STATS, model, Ordering.IMPORTANCE)
        assert value == pytest.approx(decision.objective, rel=1e-12)
        assert bound <= 1.0
