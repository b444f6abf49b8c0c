"""TRIS beampattern evaluation and max-min phase optimization.

The max-min problem (maximize the worst beampattern gain over a set of
candidate bins, subject to unit-modulus phase shifts) is solved by
projected gradient ascent on a soft-min surrogate

    f_beta(phi) = -(1/beta) * log sum_j exp(-beta * B_j(phi)),

with the sharpness beta annealed upward as iterations converge. A single
candidate bin dispatches to the exact closed-form phase alignment.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import SpatialGrid, TrisArray, UpaSpec, steering_matrix, steering_vector
from .scene import PhaseConfig, random_phases

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class BeamProblem:
    """Max-min beamforming instance: transmission vector plus candidate bins."""

    w: np.ndarray         # (N,) TRIS transmission vector
    steering: np.ndarray  # (J, N) transmit steering rows, one per candidate bin
    bins: tuple[int, ...]

    def __post_init__(self):
        if self.steering.ndim != 2 or self.steering.shape[0] == 0:
            raise ValueError("candidate bin set must be nonempty")
        if self.steering.shape[1] != self.w.size:
            raise ValueError("steering rows do not match the TRIS size")
        if len(set(self.bins)) != len(self.bins):
            raise ValueError("candidate bins must be distinct")

    @property
    def n_bins(self) -> int:
        return self.steering.shape[0]


def make_beam_problem(tris: TrisArray, grid: SpatialGrid, bins) -> BeamProblem:
    """Assemble a BeamProblem for the given flat grid bin indices."""
    bins = tuple(int(b) for b in bins)
    nu_x, nu_y = grid.freq_pairs()
    rows = steering_matrix(tris.spec, nu_x[list(bins)], nu_y[list(bins)])
    return BeamProblem(w=tris.w, steering=rows, bins=bins)


@dataclass(frozen=True)
class SolverParams:
    """Soft-min ascent knobs; defaults are sized for desk-scale problems."""

    beta0: float = 50.0
    beta_cap: float = 1e4
    anneal_every: int = 50
    max_iters: int = 500
    tol: float = 1e-8
    restarts: int = 4
    shrink: float = 0.5
    sufficient_increase: float = 1e-4

    def __post_init__(self):
        for name in ("beta0", "beta_cap", "anneal_every", "max_iters", "tol",
                     "restarts", "shrink", "sufficient_increase"):
            if getattr(self, name) < 0:
                raise ValueError(f"solver parameter {name} must be nonnegative")
        if not (0 < self.shrink < 1):
            raise ValueError("backtracking shrink must be in (0, 1)")


def beampattern(g: np.ndarray, nu_x: float, nu_y: float, spec: UpaSpec) -> float:
    """Transmit gain B = |a_T^T g|^2 toward one direction."""
    a_t = steering_vector(spec, nu_x, nu_y)
    return float(abs(a_t @ g) ** 2)


def beampattern_map(g: np.ndarray, grid: SpatialGrid, spec: UpaSpec) -> np.ndarray:
    """B over every grid bin, flat (M,) array in bin order."""
    nu_x, nu_y = grid.freq_pairs()
    return np.abs(steering_matrix(spec, nu_x, nu_y) @ g) ** 2


def align_single_bin(w: np.ndarray, nu_x: float, nu_y: float, spec: UpaSpec) -> PhaseConfig:
    """Exact optimum for one bin: cancel arg(w) and arg(a_T) elementwise.

    Achieves B = (sum |w_n|)^2, the coherent maximum.
    """
    a_t = steering_vector(spec, nu_x, nu_y)
    return PhaseConfig(-(np.angle(w) + np.angle(a_t)))


def _gains(rows: np.ndarray, phases: np.ndarray) -> np.ndarray:
    return np.abs(rows @ np.exp(1j * phases)) ** 2


def softmin_gain(problem: BeamProblem, phases: np.ndarray, beta: float) -> float:
    """Smoothed minimum of the per-bin gains at sharpness beta."""
    scaled = problem.steering * problem.w[None, :]
    return _softmin(_gains(scaled, phases), beta)


def softmin_gain_grad(problem: BeamProblem, phases: np.ndarray, beta: float) -> np.ndarray:
    """Analytic gradient of softmin_gain with respect to the phases."""
    scaled = problem.steering * problem.w[None, :]
    terms = scaled * np.exp(1j * phases)[None, :]
    c = terms.sum(axis=1)
    weights = _softmin_weights(np.abs(c) ** 2, beta)
    return -2.0 * np.imag((weights * c.conj()) @ terms)


def _softmin(gains: np.ndarray, beta: float) -> float:
    low = gains.min()
    return float(low - np.log(np.exp(-beta * (gains - low)).sum()) / beta)


def _softmin_weights(gains: np.ndarray, beta: float) -> np.ndarray:
    e = np.exp(-beta * (gains - gains.min()))
    return e / e.sum()


_BACKTRACK_TRIES = 12


def _ascend(scaled_rows: np.ndarray, phi0: np.ndarray, params: SolverParams):
    """Soft-min gradient ascent from one start.

    Returns (phases, true min gain, history) with one history row
    (beta, f_before, f_after) per accepted step; within a beta stage the
    smoothed objective is nondecreasing by the backtracking rule. Beta is
    annealed when a stage converges or after anneal_every accepted steps,
    whichever comes first. Backtracking candidates are evaluated as one
    batch; the largest step passing the sufficient-increase test wins.
    """
    phi = np.mod(np.asarray(phi0, dtype=float), TWO_PI)
    rows_t = scaled_rows.T.copy()  # (N, J) layout for the batched try matmul
    beta_factor = params.beta0
    step = 0.5
    shrinks = params.shrink ** np.arange(_BACKTRACK_TRIES)
    history = []
    stage_iters = 0
    it = 0
    while it < params.max_iters:
        it += 1
        u = np.exp(1j * phi)
        c = scaled_rows @ u
        gains = c.real**2 + c.imag**2
        scale = float(gains.mean())
        if not np.isfinite(scale) or scale <= 0.0:
            scale = 1.0
        beta = min(beta_factor, params.beta_cap) / scale
        low = gains.min()
        expw = np.exp(-beta * (gains - low))
        z = expw.sum()
        f_cur = float(low - np.log(z) / beta)
        grad = -2.0 * np.imag((((expw / z) * c.conj()) @ scaled_rows) * u)
        gnorm_sq = float(grad @ grad)

        stage_done = False
        if gnorm_sq <= 1e-24 * max(1.0, scale * scale):
            stage_done = True
        else:
            idx = -1
            for first, last in ((0, 3), (3, _BACKTRACK_TRIES)):
                steps = step * shrinks[first:last]
                cand = np.exp(1j * (phi[None, :] + steps[:, None] * grad[None, :])) @ rows_t
                cand_gains = cand.real**2 + cand.imag**2
                cand_low = cand_gains.min(axis=1)
                f_try = cand_low - np.log(
                    np.exp(-beta * (cand_gains - cand_low[:, None])).sum(axis=1)) / beta
                ok = f_try >= f_cur + params.sufficient_increase * steps * gnorm_sq
                if ok.any():
                    idx = int(np.argmax(ok))
                    break
            if idx >= 0:
                s = float(steps[idx])
                phi = np.mod(phi + s * grad, TWO_PI)
                step = min(s * 2.0, 1e3)
                history.append((beta, f_cur, float(f_try[idx])))
                if f_try[idx] - f_cur < params.tol * max(abs(f_cur), 1e-30):
                    stage_done = True
            else:
                stage_done = True

        stage_iters += 1
        if stage_done or stage_iters >= params.anneal_every:
            if stage_done and beta_factor >= params.beta_cap:
                break
            beta_factor = min(2.0 * beta_factor, params.beta_cap)
            stage_iters = 0

    return phi, float(_gains(scaled_rows, phi).min()), history


def optimize_phases(problem: BeamProblem,
                    init: PhaseConfig | None = None,
                    params: SolverParams | None = None,
                    rng: np.random.Generator | None = None) -> tuple[PhaseConfig, float]:
    """Max-min phase optimization over the problem's candidate bins.

    Runs soft-min ascent from the warm start (when given) plus random
    restarts, and returns the best configuration by true min-gain; ties go
    to the earlier start. Supplying an init guarantees the reported min
    gain is at least the init's. A single bin uses the closed form.
    """
    if params is None:
        params = SolverParams()
    if rng is None:
        rng = np.random.default_rng(0)
    n = problem.w.size

    if problem.n_bins == 1:
        cfg = PhaseConfig(-(np.angle(problem.w) + np.angle(problem.steering[0])))
        gain = float(_gains(problem.steering * problem.w[None, :], cfg.phases)[0])
        return cfg, gain

    scaled_rows = problem.steering * problem.w[None, :]
    candidates: list[tuple[np.ndarray, float]] = []
    starts: list[np.ndarray] = []
    if init is not None:
        if init.n_elements != n:
            raise ValueError("init phase configuration does not match the TRIS")
        candidates.append((init.phases.copy(), float(_gains(scaled_rows, init.phases).min())))
        starts.append(init.phases)
    starts.extend(random_phases(n, rng).phases for _ in range(params.restarts))
    if not starts:
        starts.append(random_phases(n, rng).phases)

    for phi0 in starts:
        phi, gain, _ = _ascend(scaled_rows, phi0, params)
        candidates.append((phi, gain))

    best_phi, best_gain = candidates[0]
    for phi, gain in candidates[1:]:
        if gain > best_gain:
            best_phi, best_gain = phi, gain
    return PhaseConfig(best_phi), best_gain
