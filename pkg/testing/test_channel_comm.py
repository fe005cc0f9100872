import numpy as np
import pytest

from channel_comm import (CommConfig, check_budget, db_to_linear, max_feature_count, sample_channels,
                          uplink_rates)


@pytest.fixture
def comm():
    return CommConfig(bandwidth=1e6, noise_power=1e-9, tx_power=0.1, path_loss=0.01,
                      slot_duration=3.2e-3, bits_per_feature=32)


class TestCommConfig:

    def test_mean_snr(self, comm):
        assert comm.mean_rx_snr == pytest.approx(1e6)
        assert comm.mean_rx_snr_db == pytest.approx(60.0)

    def test_with_snr_db(self, comm):
        assert comm.with_snr_db(-10.0).mean_rx_snr_db == pytest.approx(-10.0)
        assert comm.with_snr_db(-10.0).slot_duration == comm.slot_duration

    def test_rejects_non_positive_fields(self):
        with pytest.raises(ValueError):
            CommConfig(bandwidth=0.0)

    def test_db_to_linear(self):
        assert db_to_linear(-20.0) == pytest.approx(0.01)


class TestChannels:

    def test_mean_gain_is_path_loss(self, comm):
        gains = sample_channels(100_000, comm, seed=0).gains
        assert gains.mean() == pytest.approx(0.01, rel=0.02)

    def test_fixed_seed_reproduces(self, comm):
        first = sample_channels(8, comm, seed=11)
        second = sample_channels(8, comm, seed=11)
        assert np.array_equal(first.gains, second.gains)
        assert np.array_equal(first.rates, second.rates)

    def test_unit_snr_gives_bandwidth(self, comm):
        gain = comm.noise_power / comm.tx_power
        assert uplink_rates([gain], comm)[0] == pytest.approx(comm.bandwidth)

    def test_zero_gain_is_outage(self, comm):
        assert uplink_rates([0.0], comm)[0] == 0.0


class TestFeatureCount:

    def test_exact_single_fit(self, comm):
        rate = comm.bits_per_feature * 100 / comm.slot_duration
        assert max_feature_count([rate], comm, 100) == 100

    def test_two_sensors_share_the_slot(self, comm):
        rate = comm.bits_per_feature * 100 / comm.slot_duration
        assert max_feature_count([rate, rate], comm, 100) == 50

    def test_odd_dimension_rounds_down(self, comm):
        rate = comm.bits_per_feature * 101 / comm.slot_duration
        assert max_feature_count([rate, rate], comm, 101) == 50

    def test_capped_at_feature_dim(self, comm):
        assert max_feature_count([1e12], comm, 20) == 20

    def test_vanishing_rate(self, comm):
        assert max_feature_count([1e-3], comm, 100) == 0

    def test_rejects_outage_and_empty(self, comm):
        with pytest.raises(ValueError):
            max_feature_count([1e6, 0.0], comm, 10)
        with pytest.raises(ValueError):
            max_feature_count([], comm, 10)


class TestBudget:

    def test_empty_selection_fits(self, comm):
        fits, times = check_budget([], 0, comm, [1e6])
        assert fits
        assert times.sum() == 0

    def test_max_count_always_fits_and_one_more_does_not(self, comm):
        rng = np.random.default_rng(3)
        feature_dim = 100
        for _ in range(1000):
            rates = sample_channels(12, comm.with_snr_db(rng.uniform(-20, 20)), seed=rng.integers(1 << 31)).rates
            chosen = rng.choice(12, size=int(rng.integers(1, 13)), replace=False)
            if np.any(rates[chosen] <= 0):
                continue
            count = max_feature_count(rates[chosen], comm, feature_dim)
            if count == 0:
                continue
            assert check_budget(chosen, count, comm, rates)[0]
            if count < feature_dim:
                assert not check_budget(chosen, count + 1, comm, rates)[0]

    def test_times_per_sensor(self, comm):
        fits, times = check_budget([1], 10, comm, [1e6, 2e6])
        assert fits
        np.testing.assert_allclose(times, [32 * 10 / 2e6])

    def test_outage_sensor_never_fits(self, comm):
        fits, _ = check_budget([0], 1, comm, [0.0])
        assert not fits
