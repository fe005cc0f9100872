import itertools

import numpy as np
import pytest

from gm_model import (build_model, load_model, max_mahalanobis_norm, min_pairwise_dg,
                      model_from_arrays, sample_scenario, save_model)


@pytest.fixture
def small_model():
    return build_model(6, 10, 3.0, 0.1, 1.0, seed=3)


class TestBuildModel:

    def test_synthetic_shape(self):
        model = build_model(40, 100, 3.0, 0.01, 1.0, seed=0)
        assert model.centroids.shape == (40, 100)
        assert model.cov_diag.shape == (100,)
        assert np.all((model.cov_diag >= 0.01) & (model.cov_diag <= 1.0))
        assert np.all(np.linalg.norm(model.centroids, axis=1) <= 3.0 + 1e-12)

    def test_same_seed_is_bit_identical(self):
        first = build_model(10, 20, 3.0, 0.01, 1.0, seed=7)
        second = build_model(10, 20, 3.0, 0.01, 1.0, seed=7)
        assert np.array_equal(first.centroids, second.centroids)
        assert np.array_equal(first.cov_diag, second.cov_diag)

    def test_zero_radius_rejected(self):
        with pytest.raises(ValueError, match="not distinct"):
            build_model(2, 1, 0.0, 1.0, 1.0, seed=0)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            build_model(1, 5, 3.0, 0.1, 1.0, seed=0)

    def test_bad_covariance_range_rejected(self):
        with pytest.raises(ValueError):
            build_model(3, 5, 3.0, 0.0, 1.0, seed=0)


class TestDiscriminantGain:

    def test_two_point_example(self):
        model = model_from_arrays([[0.0], [2.0]], [1.0])
        assert min_pairwise_dg(model, [0]) == 4.0

    def test_full_dims_match_table(self, small_model):
        full = np.arange(small_model.feature_dim)
        assert min_pairwise_dg(small_model, full) == pytest.approx(small_model.g_min, rel=1e-12)

    def test_random_half_matches_double_loop(self, small_model):
        rng = np.random.default_rng(1)
        dims = rng.choice(small_model.feature_dim, size=5, replace=False)
        brute = min(
            sum((small_model.centroids[a, d] - small_model.centroids[b, d]) ** 2 / small_model.cov_diag[d]
                for d in dims)
            for a, b in itertools.combinations(range(small_model.num_classes), 2)
        )
        assert min_pairwise_dg(small_model, dims) == pytest.approx(brute, rel=1e-12)

    def test_monotone_in_dims(self, small_model):
        dims = list(range(small_model.feature_dim))
        values = [min_pairwise_dg(small_model, dims[:k]) for k in range(1, len(dims) + 1)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_empty_dims_rejected(self, small_model):
        with pytest.raises(ValueError):
            min_pairwise_dg(small_model, [])


class TestMahalanobisNorm:

    def test_three_four_five(self):
        model = model_from_arrays([[3.0, 4.0], [0.0, 0.0]], [1.0, 1.0])
        assert max_mahalanobis_norm(model, [0, 1]) == pytest.approx(5.0)

    def test_centroid_at_origin_contributes_zero(self):
        model = model_from_arrays([[0.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
        assert max_mahalanobis_norm(model, [0]) == 0.0

    def test_matches_brute_force(self, small_model):
        dims = [0, 3, 4, 9]
        brute = max(np.sqrt(sum(small_model.centroids[l, d] ** 2 / small_model.cov_diag[d] for d in dims))
                    for l in range(small_model.num_classes))
        assert max_mahalanobis_norm(small_model, dims) == pytest.approx(brute, rel=1e-12)


class TestRandomSubsets:

    @pytest.mark.slow
    @pytest.mark.parametrize("share", [0.25, 0.5])
    def test_large_dimension_scaling(self, share):
        model = build_model(5, 20_000, 3.0, 1.0, 1.0, seed=11)
        rng = np.random.default_rng(12)
        count = int(share * model.feature_dim)
        gains, norms = [], []
        for _ in range(50):
            dims = rng.choice(model.feature_dim, size=count, replace=False)
            gains.append(min_pairwise_dg(model, dims) / model.g_min)
            norms.append(max_mahalanobis_norm(model, dims) / model.delta_max)
        assert np.mean(gains) == pytest.approx(share, rel=0.05)
        assert np.mean(norms) == pytest.approx(np.sqrt(share), rel=0.05)


class TestImportanceTables:

    def test_importance_order_is_descending(self, small_model):
        ordered = small_model.importance[small_model.importance_order]
        assert np.all(np.diff(ordered) <= 0)

    def test_prefix_tables_match_direct_evaluation(self, small_model):
        for count in (1, 4, small_model.feature_dim):
            dims = small_model.top_dims(count)
            assert small_model.g_min_by_count[count - 1] == pytest.approx(min_pairwise_dg(small_model, dims))
            assert small_model.delta_max_by_count[count - 1] == pytest.approx(
                max_mahalanobis_norm(small_model, dims))

    def test_ties_keep_ascending_index(self):
        model = model_from_arrays([[1.0, 1.0, 0.0], [0.0, 0.0, 0.0]], [1.0, 1.0, 1.0])
        assert model.importance_order.tolist() == [0, 1, 2]

    def test_top_dims_sorted(self, small_model):
        dims = small_model.top_dims(4)
        assert np.all(np.diff(dims) > 0)


class TestScenario:

    def test_shapes(self, small_model):
        scenario = sample_scenario(small_model, 12, 0.4, 3.0, seed=0)
        assert scenario.features.shape == (12, small_model.feature_dim)
        assert scenario.query_feature.shape == (small_model.feature_dim,)
        assert scenario.num_sensors == 12

    def test_irrelevant_views_see_other_classes(self, small_model):
        scenario = sample_scenario(small_model, 200, 0.3, 3.0, seed=4)
        relevant = scenario.relevance
        assert np.all(scenario.observed_class[relevant] == scenario.true_class)
        assert np.all(scenario.observed_class[~relevant] != scenario.true_class)

    def test_near_certain_relevance(self, small_model):
        relevant = sum(sample_scenario(small_model, 10, 1 - 1e-12, 0.0, seed=s).relevance.sum()
                       for s in range(1000))
        assert relevant / 10_000 >= 0.999

    def test_deterministic(self, small_model):
        first = sample_scenario(small_model, 5, 0.4, 3.0, seed=9)
        second = sample_scenario(small_model, 5, 0.4, 3.0, seed=9)
        assert np.array_equal(first.features, second.features)
        assert first.true_class == second.true_class

    @pytest.mark.parametrize("args", [(0, 0.4, 3.0), (5, 0.0, 3.0), (5, 1.0, 3.0), (5, 0.4, -1.0)])
    def test_bad_arguments(self, small_model, args):
        with pytest.raises(ValueError):
            sample_scenario(small_model, *args, seed=0)


class TestArtifact:

    def test_save_load_bit_exact(self, small_model, tmp_path):
        path = tmp_path / "model.txt"
        save_model(small_model, path)
        loaded = load_model(path)
        assert np.array_equal(loaded.centroids, small_model.centroids)
        assert np.array_equal(loaded.cov_diag, small_model.cov_diag)
        assert np.array_equal(loaded.importance_order, small_model.importance_order)

    def test_malformed_artifact(self, tmp_path):
        path = tmp_path / "model.txt"
        path.write_text("2 3\n1 2 3\n")
        with pytest.raises(ValueError, match="malformed"):
            load_model(path)
