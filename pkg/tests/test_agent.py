"""SARSA agent: states, actions, candidate bins, reward, and Q updates."""

import numpy as np
import pytest

from trisradar.agent import (QTable, compute_reward, compute_state, qtable_rows,
                             sarsa_update, select_action, top_bins)
from trisradar.detector import DetectionResult, theoretical_pd


def _result(lambdas, eta):
    return DetectionResult(lambda_map=np.asarray(lambdas, dtype=float), eta=eta)


class TestQTable:
    def test_starts_at_zero(self):
        q = QTable(t_bar_max=10)
        assert q.q.shape == (11, 11)
        assert not q.q.any()

    @pytest.mark.parametrize("kwargs", [
        {"alpha_lr": 1.5}, {"alpha_lr": -0.1},
        {"gamma_discount": 1.0}, {"gamma_discount": -0.2},
        {"epsilon": 1.0001}, {"t_bar_max": 0},
    ])
    def test_rejects_out_of_range_hyperparameters(self, kwargs):
        with pytest.raises(ValueError):
            QTable(**{"t_bar_max": 10, **kwargs})

    def test_rows_flatten_in_order(self):
        q = QTable(t_bar_max=1)
        q.q[1, 0] = 2.5
        assert qtable_rows(q) == [(0, 0, 0.0), (0, 1, 0.0), (1, 0, 2.5), (1, 1, 0.0)]


class TestComputeState:
    def test_no_exceedance(self):
        assert compute_state(_result([0.1, 0.5, 2.0], eta=2.5), 10) == 0

    def test_counts_exceedances(self):
        lam = np.zeros(50)
        lam[[4, 17, 33]] = 9.0
        assert compute_state(_result(lam, eta=4.6), 10) == 3

    def test_clamps_noise_storm(self):
        lam = np.full(37, 10.0)
        assert compute_state(_result(lam, eta=1.0), 10) == 10

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(0)
        lam = rng.exponential(size=200)
        etas = [0.5, 1.0, 2.0, 4.0]
        states = [compute_state(_result(lam, eta=e), 10) for e in etas]
        assert all(b <= a for a, b in zip(states, states[1:]))

    def test_strict_inequality_at_threshold(self):
        assert compute_state(_result([2.0], eta=2.0), 5) == 0


class TestSelectAction:
    def test_pure_greedy_takes_argmax(self):
        q = QTable(t_bar_max=4, epsilon=0.0)
        q.q[2] = [0.0, 5.0, 2.0, 1.0, 4.9]
        assert select_action(q, 2, np.random.default_rng(0)) == 1

    def test_greedy_tie_breaks_to_smallest_index(self):
        q = QTable(t_bar_max=4, epsilon=0.0)
        for _ in range(5):
            assert select_action(q, 0, np.random.default_rng(1)) == 0
        q.q[3] = [1.0, 3.0, 3.0, 0.0, 0.0]
        assert select_action(q, 3, np.random.default_rng(2)) == 1

    def test_full_exploration_is_uniform(self):
        q = QTable(t_bar_max=9, epsilon=1.0)
        rng = np.random.default_rng(3)
        draws = np.array([select_action(q, 0, rng) for _ in range(100_000)])
        counts = np.bincount(draws, minlength=10)
        expected = 10_000.0
        sigma = np.sqrt(expected * (1 - 0.1))
        assert np.all(np.abs(counts - expected) < 3 * sigma)

    def test_epsilon_zero_is_pure_function_of_table(self):
        q = QTable(t_bar_max=3, epsilon=0.0)
        q.q[1] = [0.1, 0.9, 0.3, 0.0]
        picks = {select_action(q, 1, np.random.default_rng(s)) for s in range(20)}
        assert picks == {1}

    def test_rejects_state_out_of_range(self):
        q = QTable(t_bar_max=3)
        with pytest.raises(ValueError):
            select_action(q, 4, np.random.default_rng(0))


class TestTopBins:
    def test_zero_request_empty(self):
        assert top_bins(np.array([3.0, 1.0]), 0).size == 0

    def test_tie_resolved_by_index(self):
        np.testing.assert_array_equal(top_bins(np.array([1.0, 9.0, 4.0, 9.0]), 2), [1, 3])

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            lam = rng.exponential(size=60)
            got = top_bins(lam, 5)
            oracle = sorted(sorted(range(60), key=lambda i: (-lam[i], i))[:5])
            np.testing.assert_array_equal(got, oracle)

    def test_rejects_oversized_request(self):
        with pytest.raises(ValueError):
            top_bins(np.ones(4), 5)


class TestComputeReward:
    def test_empty_set_zero(self):
        assert compute_reward(_result([5.0, 1.0], eta=2.0), np.empty(0, dtype=int)) == 0.0

    def test_strong_detections_approach_set_size(self):
        lam = np.array([500.0, 450.0, 0.1, 600.0])
        r = compute_reward(_result(lam, eta=4.6), np.array([0, 1, 3]))
        assert 3.0 - 0.01 < r < 3.0

    def test_boundary_bin_counts_negative(self):
        eta = 4.605
        r = compute_reward(_result([eta], eta=eta), np.array([0]))
        assert r == pytest.approx(-theoretical_pd(eta - 1.0, eta), rel=1e-12)

    def test_mixed_signs(self):
        eta = 2.0
        lam = np.array([8.0, 0.5])
        r = compute_reward(_result(lam, eta=eta), np.array([0, 1]))
        expected = theoretical_pd(7.0, eta) - theoretical_pd(0.0, eta)
        assert r == pytest.approx(expected, rel=1e-12)

    def test_bounded_by_set_size(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            lam = rng.exponential(size=30) * rng.uniform(0.5, 50)
            theta = rng.choice(30, size=7, replace=False)
            r = compute_reward(_result(lam, eta=3.0), theta)
            assert abs(r) <= 7.0

    def test_sub_unit_statistic_clamps_noncentrality(self):
        # Lambda < 1 gives rho_hat = 0, so the term is exactly -P_FA-at-eta
        eta = 3.0
        r = compute_reward(_result([0.4], eta=eta), np.array([0]))
        assert r == pytest.approx(-theoretical_pd(0.0, eta), rel=1e-12)


class TestSarsaUpdate:
    def test_basic_arithmetic(self):
        q = QTable(t_bar_max=10, alpha_lr=0.5, gamma_discount=0.8)
        sarsa_update(q, 2, 3, 1.0, 4, 5)
        assert q.q[2, 3] == 0.5

    def test_fixed_point_drift(self):
        alpha, gamma, c = 0.25, 0.8, 3.0
        q = QTable(t_bar_max=4, alpha_lr=alpha, gamma_discount=gamma)
        q.q[:] = c
        sarsa_update(q, 1, 1, 0.0, 2, 2)
        assert q.q[1, 1] == pytest.approx(c + alpha * (gamma - 1.0) * c, rel=1e-15)

    def test_myopic_overwrite(self):
        q = QTable(t_bar_max=4, alpha_lr=1.0, gamma_discount=0.0)
        q.q[3, 2] = -7.0
        q.q[0, 0] = 9.0
        sarsa_update(q, 3, 2, 1.25, 0, 0)
        assert q.q[3, 2] == 1.25

    def test_touches_exactly_one_cell(self):
        q = QTable(t_bar_max=6, alpha_lr=0.3)
        rng = np.random.default_rng(6)
        q.q[:] = rng.standard_normal(q.q.shape)
        before = q.q.copy()
        sarsa_update(q, 2, 5, -0.4, 3, 1)
        changed = np.argwhere(q.q != before)
        assert changed.tolist() == [[2, 5]]

    def test_alpha_zero_freezes_table(self):
        q = QTable(t_bar_max=4, alpha_lr=0.0)
        rng = np.random.default_rng(7)
        q.q[:] = rng.standard_normal(q.q.shape)
        before = q.q.copy()
        for _ in range(50):
            sarsa_update(q, int(rng.integers(5)), int(rng.integers(5)),
                         float(rng.standard_normal()), int(rng.integers(5)),
                         int(rng.integers(5)))
        np.testing.assert_array_equal(q.q, before)

    def test_rejects_out_of_range_indices(self):
        q = QTable(t_bar_max=4)
        with pytest.raises(ValueError):
            sarsa_update(q, 5, 0, 0.0, 0, 0)
        with pytest.raises(ValueError):
            sarsa_update(q, 0, 0, 0.0, 0, 5)
