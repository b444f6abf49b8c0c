"""End-to-end episode loop, Monte-Carlo replication, and element-count sweeps.

One episode runs the perception-action cycle for K pulses: transmit under
the current TRIS phases, detect over all bins, derive state and reward,
pick the next action epsilon-greedily, update the Q-table, then either
re-optimize the phases toward the chosen candidate bins or re-randomize
them when nothing crossed the threshold.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .agent import QTable, compute_reward, compute_state, sarsa_update, select_action, top_bins
from .beamformer import BeamProblem, SolverParams, optimize_phases
from .detector import covariance_inverse, detect, threshold
from .geometry import DEFAULT_FREQUENCY_HZ, SpatialGrid, UpaSpec, make_tris, steering_matrix
from .scene import Scenario, Target, random_phases, synthesize_snapshot

# Provenance of the phases transmitted on each pulse.
PHASE_RANDOM = "random"       # re-randomized (initialization or empty state)
PHASE_OPTIMIZED = "optimized"  # max-min solver output for the chosen bins
PHASE_HELD = "held"           # kept from the previous pulse (action chose 0 bins)

Z_95 = 1.959963984540054


@dataclass(frozen=True)
class RlParams:
    alpha_lr: float = 0.1
    gamma_discount: float = 0.8
    epsilon: float = 0.5
    t_bar_max: int = 10


@dataclass(frozen=True)
class EpisodeConfig:
    """Everything needed to run one episode deterministically (plus a seed)."""

    grid: SpatialGrid
    tris_spec: UpaSpec
    rx_spec: UpaSpec
    targets: tuple[Target, ...]
    gamma: np.ndarray
    p_t: float = 1.0
    p_fa: float = 1e-4
    rl: RlParams = field(default_factory=RlParams)
    pulses: int = 200
    solver: SolverParams = field(default_factory=SolverParams)
    frequency_hz: float = DEFAULT_FREQUENCY_HZ
    d_l_wavelengths: float = 20.0
    phase_policy: str = "adaptive"  # "adaptive" | "random"
    seed: int | None = None

    def __post_init__(self):
        if self.pulses < 1:
            raise ValueError("episode needs at least one pulse")
        if self.phase_policy not in ("adaptive", "random"):
            raise ValueError(f"unknown phase policy '{self.phase_policy}'")
        if len(self.targets) > self.rl.t_bar_max:
            raise ValueError("more targets than the agent's maximum target count")
        bins = [t.bin for t in self.targets]
        if len(set(bins)) != len(bins):
            raise ValueError("target bins must be pairwise distinct")
        for b in bins:
            if not (0 <= b < self.grid.n_bins):
                raise ValueError(f"target bin {b} outside the grid")
        if self.gamma.shape[0] != self.rx_spec.n_elements:
            raise ValueError("noise covariance size does not match the receiver")

    def scenario(self) -> Scenario:
        return Scenario(grid=self.grid, targets=self.targets,
                        gamma=self.gamma, p_t=self.p_t)


@dataclass
class RunResult:
    """Per-pulse trace of one episode plus the final Q-table.

    states[k] is the post-detection state of pulse k, actions[k] the bin
    count in force while pulse k was transmitted, rewards[k] the reward
    collected from pulse k. min_gain[k] is the solver's achieved min
    beampattern gain when it produced the phases for pulse k+1 (NaN when
    the phases were random or held), and phase_source[k] records that
    provenance. hits[t, k] flags a threshold crossing at target t's bin.
    """

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    hits: np.ndarray
    min_gain: np.ndarray
    phase_source: np.ndarray
    final_q: np.ndarray


def run_episode(cfg: EpisodeConfig, seed) -> RunResult:
    """Run one episode; deterministic given (cfg, seed).

    The seed spawns independent substreams for noise, target phases,
    policy draws, and optimizer restarts, so e.g. changing the restart
    count leaves the noise sequence untouched.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    noise_rng, tphase_rng, policy_rng, opt_rng = (
        np.random.default_rng(child) for child in ss.spawn(4))

    tris = make_tris(cfg.tris_spec, cfg.frequency_hz, cfg.d_l_wavelengths)
    scenario = cfg.scenario()
    grid = cfg.grid
    nu_x, nu_y = grid.freq_pairs()
    a_t_all = steering_matrix(tris.spec, nu_x, nu_y)      # (M, N), reused every pulse
    a_r_all = steering_matrix(cfg.rx_spec, nu_x, nu_y)    # (M, N_R)
    sqrt_pt = np.sqrt(cfg.p_t)
    gamma_inv = covariance_inverse(cfg.gamma)
    eta = threshold(cfg.p_fa)
    t_bar = cfg.rl.t_bar_max
    qtable = QTable(t_bar_max=t_bar, alpha_lr=cfg.rl.alpha_lr,
                    gamma_discount=cfg.rl.gamma_discount, epsilon=cfg.rl.epsilon)
    target_bins = np.array([t.bin for t in cfg.targets], dtype=int)

    k_pulses = cfg.pulses
    states = np.zeros(k_pulses, dtype=int)
    actions = np.zeros(k_pulses, dtype=int)
    rewards = np.zeros(k_pulses)
    hits = np.zeros((len(cfg.targets), k_pulses), dtype=bool)
    min_gain = np.full(k_pulses, np.nan)
    phase_source = np.empty(k_pulses, dtype="<U9")

    s, a = 1, 1
    theta = np.empty(0, dtype=int)  # no statistic map exists before the first pulse
    phase = random_phases(tris.n_elements, opt_rng)

    for k in range(k_pulses):
        g = phase.phasors * tris.w
        channels = sqrt_pt * (a_t_all @ g)[:, None] * a_r_all
        snap = synthesize_snapshot(scenario, channels, k, noise_rng, tphase_rng)
        try:
            result = detect(snap, channels, cfg.gamma, eta, gamma_inv=gamma_inv)
            s_next = compute_state(result, t_bar)
            r = compute_reward(result, theta)
            a_next = select_action(qtable, s_next, policy_rng)
            theta_next = top_bins(result.lambda_map, a_next)
            sarsa_update(qtable, s, a, r, s_next, a_next)

            if cfg.phase_policy == "random" or s_next == 0:
                phase = random_phases(tris.n_elements, opt_rng)
                phase_source[k] = PHASE_RANDOM
            elif theta_next.size == 0:
                phase_source[k] = PHASE_HELD
            else:
                problem = BeamProblem(w=tris.w, steering=a_t_all[theta_next],
                                      bins=tuple(int(b) for b in theta_next))
                phase, gain = optimize_phases(problem, init=phase,
                                              params=cfg.solver, rng=opt_rng)
                min_gain[k] = gain
                phase_source[k] = PHASE_OPTIMIZED
        except Exception as exc:
            raise RuntimeError(f"episode failed at pulse {k}: {exc}") from exc

        states[k] = s_next
        actions[k] = a
        rewards[k] = r
        if target_bins.size:
            hits[:, k] = result.decision_map[target_bins]
        s, a, theta = s_next, a_next, theta_next

    return RunResult(states=states, actions=actions, rewards=rewards, hits=hits,
                     min_gain=min_gain, phase_source=phase_source,
                     final_q=qtable.q.copy())


def wilson_interval(successes: np.ndarray, trials: int, z: float = Z_95):
    """Wilson score interval; well-behaved at rates of exactly 0 or 1."""
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return np.clip(center - half, 0.0, 1.0), np.clip(center + half, 0.0, 1.0)


@dataclass
class MonteCarloResult:
    """Aggregates over independent runs of one configuration."""

    runs: int
    pd: np.ndarray        # (n_targets, K) per-pulse detection rate per target
    ci_low: np.ndarray
    ci_high: np.ndarray
    mean_reward: np.ndarray
    sample_run: RunResult  # first run's full trace, kept for inspection dumps

    def steady_state_pd(self, window_fraction: float = 0.25) -> np.ndarray:
        """Mean detection rate over the trailing window of pulses."""
        k = self.pd.shape[1]
        w = max(1, int(math.floor(k * window_fraction)))
        return self.pd[:, k - w:].mean(axis=1)


def _episode_worker(args) -> RunResult:
    cfg, child_seed = args
    return run_episode(cfg, child_seed)


def monte_carlo(cfg: EpisodeConfig, runs: int, n_jobs: int | None = None,
                seed: int | None = None) -> MonteCarloResult:
    """Replicate an episode over independent seeded runs and aggregate.

    Each run gets its own substream spawned from the master seed; the
    aggregation is a sum, so run order cannot affect the result.
    """
    if runs < 1:
        raise ValueError("need at least one run")
    master = cfg.seed if seed is None else seed
    children = np.random.SeedSequence(master).spawn(runs)
    jobs = [(cfg, child) for child in children]

    if n_jobs is None:
        n_jobs = min(os.cpu_count() or 1, runs)
    if n_jobs > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_episode_worker, jobs, chunksize=1))
    else:
        results = [_episode_worker(job) for job in jobs]

    hit_counts = np.zeros_like(results[0].hits, dtype=float)
    reward_sum = np.zeros_like(results[0].rewards)
    for res in results:
        hit_counts += res.hits
        reward_sum += res.rewards
    pd = hit_counts / runs
    ci_low, ci_high = wilson_interval(hit_counts, runs)
    return MonteCarloResult(runs=runs, pd=pd, ci_low=ci_low, ci_high=ci_high,
                            mean_reward=reward_sum / runs, sample_run=results[0])


def calibrate_pfa(p_fa: float, trials: int, n_rx: int, seed: int = 0,
                  batch: int = 200_000) -> dict:
    """Empirical false-alarm rate of the matched-filter test under noise only.

    Draws `trials` independent bin observations with identity covariance,
    applies the test against a fixed arbitrary signature (the null law does
    not depend on it), and reports the observed rate with a 95% CI.
    """
    eta = threshold(p_fa)
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(n_rx) + 1j * rng.standard_normal(n_rx)
    h_norm2 = np.vdot(h, h).real
    hits = 0
    remaining = trials
    while remaining > 0:
        count = min(batch, remaining)
        z = rng.standard_normal((count, n_rx)) + 1j * rng.standard_normal((count, n_rx))
        z *= np.sqrt(0.5)
        lam = np.abs(z @ h.conj()) ** 2 / h_norm2
        hits += int((lam > eta).sum())
        remaining -= count
    low, high = wilson_interval(np.asarray(float(hits)), trials)
    return {"p_fa_target": p_fa, "eta": eta, "trials": trials,
            "fa_observed": hits, "fa_rate": hits / trials,
            "ci_low": float(low), "ci_high": float(high)}


def parse_element_count(item) -> UpaSpec:
    """Sweep entry -> UPA spec: a perfect square N or an explicit (n_x, n_y)."""
    if isinstance(item, UpaSpec):
        return item
    if isinstance(item, (tuple, list)) and len(item) == 2:
        return UpaSpec(int(item[0]), int(item[1]))
    n = int(item)
    side = math.isqrt(n)
    if side * side != n:
        raise ValueError(f"element count {n} is not a perfect square; "
                         f"pass explicit (n_x, n_y) instead")
    return UpaSpec(side, side)


@dataclass
class SweepEntry:
    n_elements: int
    tris_spec: UpaSpec
    steady_pd: np.ndarray  # (n_targets,)
    ci_low: np.ndarray
    ci_high: np.ndarray


@dataclass
class SweepResult:
    entries: list[SweepEntry]


def sweep_elements(cfg: EpisodeConfig, n_list, runs: int,
                   n_jobs: int | None = None, seed: int | None = None) -> SweepResult:
    """Steady-state detection probability per target versus TRIS size.

    Steady state is the mean over the last quarter of pulses; duplicate
    sweep entries are dropped. The confidence interval is a normal
    interval over per-run steady-state rates.
    """
    specs: list[UpaSpec] = []
    seen = set()
    for item in n_list:
        spec = parse_element_count(item)
        key = (spec.n_x, spec.n_y)
        if key not in seen:
            seen.add(key)
            specs.append(spec)

    entries = []
    for spec in specs:
        sub = replace(cfg, tris_spec=spec)
        mc = monte_carlo(sub, runs, n_jobs=n_jobs, seed=seed)
        k = mc.pd.shape[1]
        w = max(1, int(math.floor(k * 0.25)))
        window = mc.pd[:, k - w:]
        steady = window.mean(axis=1)
        # CI from the window's aggregate trial count, run-level granularity
        low, high = wilson_interval(steady * runs, runs)
        entries.append(SweepEntry(n_elements=spec.n_elements, tris_spec=spec,
                                  steady_pd=steady, ci_low=low, ci_high=high))
    return SweepResult(entries=entries)
