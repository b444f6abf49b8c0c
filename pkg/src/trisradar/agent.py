"""Tabular SARSA agent: state extraction, epsilon-greedy action selection,
candidate-bin identification, reward, and the Q-table update."""

from dataclasses import dataclass, field

import numpy as np

from .detector import DetectionResult, theoretical_pd


@dataclass
class QTable:
    """State-action values over (T_bar+1) states x (T_bar+1) actions.

    State s counts threshold exceedances clamped to T_bar; action a is the
    number of candidate bins to steer toward. alpha_lr = 0 freezes the
    table (useful for ablations), so the accepted range is [0, 1].
    """

    t_bar_max: int
    alpha_lr: float = 0.1
    gamma_discount: float = 0.8
    epsilon: float = 0.5
    q: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.t_bar_max < 1:
            raise ValueError("maximum target count must be at least 1")
        if not (0.0 <= self.alpha_lr <= 1.0):
            raise ValueError("learning rate must be in [0, 1]")
        if not (0.0 <= self.gamma_discount < 1.0):
            raise ValueError("discount factor must be in [0, 1)")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError("exploration rate must be in [0, 1]")
        self.q = np.zeros((self.t_bar_max + 1, self.t_bar_max + 1))

    @property
    def n_actions(self) -> int:
        return self.t_bar_max + 1


def compute_state(result: DetectionResult, t_bar_max: int) -> int:
    """Count of bins whose statistic exceeds the threshold, clamped to T_bar."""
    return min(result.n_detections, t_bar_max)


def select_action(q: QTable, s: int, rng: np.random.Generator) -> int:
    """Epsilon-greedy action: uniform with probability epsilon, else the
    argmax of the state's row (ties to the smallest action index)."""
    if not (0 <= s <= q.t_bar_max):
        raise ValueError(f"state {s} out of range")
    if rng.random() < q.epsilon:
        return int(rng.integers(q.n_actions))
    return int(np.argmax(q.q[s]))


def top_bins(lambda_map: np.ndarray, t_bar: int) -> np.ndarray:
    """Indices of the t_bar largest statistics, ties to the smaller bin.

    Returned sorted ascending; t_bar = 0 yields an empty set.
    """
    lambda_map = np.asarray(lambda_map)
    if not (0 <= t_bar <= lambda_map.size):
        raise ValueError(f"cannot select {t_bar} bins from {lambda_map.size}")
    if t_bar == 0:
        return np.empty(0, dtype=int)
    order = np.argsort(-lambda_map, kind="stable")[:t_bar]
    return np.sort(order)


def compute_reward(result: DetectionResult, theta: np.ndarray) -> float:
    """Detection-quality reward over the steered bins.

    Each steered bin contributes its estimated detection probability:
    positively when it crossed the threshold, negatively otherwise. The
    noncentrality is estimated by moments as max(Lambda - 1, 0), since the
    statistic has mean 1 + rho under a target.
    """
    reward = 0.0
    for m in np.asarray(theta, dtype=int):
        lam = float(result.lambda_map[m])
        pd_hat = theoretical_pd(max(lam - 1.0, 0.0), result.eta)
        reward += pd_hat if lam > result.eta else -pd_hat
    return reward


def sarsa_update(q: QTable, s: int, a: int, r: float, s_next: int, a_next: int) -> None:
    """On-policy temporal-difference update of a single Q-table cell:
    Q(s,a) += alpha * (r + gamma * Q(s',a') - Q(s,a)). In place."""
    for name, idx in (("s", s), ("a", a), ("s_next", s_next), ("a_next", a_next)):
        if not (0 <= idx <= q.t_bar_max):
            raise ValueError(f"{name}={idx} out of range for T_bar={q.t_bar_max}")
    td = r + q.gamma_discount * q.q[s_next, a_next] - q.q[s, a]
    q.q[s, a] += q.alpha_lr * td


def qtable_rows(q: QTable) -> list[tuple[int, int, float]]:
    """Flatten the table to (s, a, q) rows for CSV export."""
    return [(s, a, float(q.q[s, a]))
            for s in range(q.n_actions) for a in range(q.n_actions)]
