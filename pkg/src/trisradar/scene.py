"""Radar scene synthesis: phase configurations, targets, noise, and per-bin
post-matched-filter receive snapshots."""

from dataclasses import dataclass, field

import numpy as np

from .geometry import SpatialGrid, TrisArray, UpaSpec, steering_matrix, steering_vector

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhaseConfig:
    """Per-element TRIS phase shifts, wrapped into [0, 2*pi)."""

    phases: np.ndarray

    def __post_init__(self):
        wrapped = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)
        object.__setattr__(self, "phases", wrapped)

    @property
    def n_elements(self) -> int:
        return self.phases.size

    @property
    def phasors(self) -> np.ndarray:
        return np.exp(1j * self.phases)


def random_phases(n: int, rng: np.random.Generator) -> PhaseConfig:
    """Uniform random phase configuration on [0, 2*pi)."""
    return PhaseConfig(rng.uniform(0.0, TWO_PI, size=n))


@dataclass(frozen=True)
class Target:
    """Stationary point target: grid bin plus per-element input SNR in dB.

    The scatterer magnitude is fixed across pulses (nonfluctuating model);
    only its absolute phase is redrawn pulse to pulse.
    """

    bin: int
    snr_db: float

    def __post_init__(self):
        if not np.isfinite(self.snr_db):
            raise ValueError("target SNR must be finite")


@dataclass(frozen=True)
class Scenario:
    """Scene description: grid, targets, noise covariance, transmit power."""

    grid: SpatialGrid
    targets: tuple[Target, ...]
    gamma: np.ndarray  # (N_R, N_R) Hermitian positive definite
    p_t: float = 1.0
    noise_chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        bins = [t.bin for t in self.targets]
        if len(set(bins)) != len(bins):
            raise ValueError("target bins must be pairwise distinct")
        for b in bins:
            if not (0 <= b < self.grid.n_bins):
                raise ValueError(f"target bin {b} outside the grid")
        if self.p_t <= 0:
            raise ValueError("transmit power must be positive")
        gamma = np.asarray(self.gamma, dtype=complex)
        if not np.allclose(gamma, gamma.conj().T, rtol=1e-10, atol=1e-12):
            raise ValueError("noise covariance must be Hermitian")
        try:
            chol = np.linalg.cholesky(gamma)
        except np.linalg.LinAlgError as exc:
            raise ValueError("noise covariance is not positive definite") from exc
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "noise_chol", chol)

    @property
    def n_rx(self) -> int:
        return self.gamma.shape[0]

    @property
    def noise_power(self) -> float:
        """Mean per-element noise power (mean diagonal of the covariance)."""
        return float(np.mean(np.diag(self.gamma).real))


@dataclass(frozen=True)
class Snapshot:
    """Post-matched-filter receive vectors for every bin of one pulse."""

    r: np.ndarray  # (M, N_R)
    pulse_index: int


def effective_transmission(phase: PhaseConfig, tris: TrisArray) -> np.ndarray:
    """Effective transmission vector g = Phi w (elementwise phase shift of w)."""
    if phase.n_elements != tris.n_elements:
        raise ValueError("phase configuration and TRIS sizes do not match")
    return phase.phasors * tris.w


def channel(nu_x: float, nu_y: float, g: np.ndarray, rx: UpaSpec,
            tris: TrisArray, p_t: float = 1.0) -> np.ndarray:
    """Two-way bin signature h = sqrt(P_T) * (a_T^T g) * a_R.

    Rank-1 by construction: a complex scalar gain times the receive
    steering vector.
    """
    if g.shape != (tris.n_elements,):
        raise ValueError("g length does not match the TRIS")
    a_t = steering_vector(tris.spec, nu_x, nu_y)
    a_r = steering_vector(rx, nu_x, nu_y)
    return np.sqrt(p_t) * (a_t @ g) * a_r


def channel_map(grid: SpatialGrid, g: np.ndarray, rx: UpaSpec,
                tris: TrisArray, p_t: float = 1.0) -> np.ndarray:
    """(M, N_R) stack of per-bin signatures h_m under the active phases."""
    nu_x, nu_y = grid.freq_pairs()
    gains = steering_matrix(tris.spec, nu_x, nu_y) @ g
    a_r = steering_matrix(rx, nu_x, nu_y)
    return np.sqrt(p_t) * gains[:, None] * a_r


def swerling0_amplitude(target: Target, noise_power: float,
                        rng: np.random.Generator) -> complex:
    """Fixed-magnitude scatterer amplitude with a fresh uniform phase.

    |alpha| = sqrt(snr_linear * noise_power); the SNR convention is
    per-element input SNR, defined before any beamforming gain.
    """
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    mag = np.sqrt(10.0 ** (target.snr_db / 10.0) * noise_power)
    return complex(mag * np.exp(1j * rng.uniform(0.0, TWO_PI)))


def draw_noise(gamma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One circular complex Gaussian vector with covariance gamma."""
    gamma = np.asarray(gamma, dtype=complex)
    try:
        chol = np.linalg.cholesky(gamma)
    except np.linalg.LinAlgError as exc:
        raise ValueError("noise covariance is not positive definite") from exc
    return _noise_batch(chol, 1, rng)[0]


def _noise_batch(chol: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, N_R) i.i.d. noise vectors from a precomputed Cholesky factor."""
    n = chol.shape[0]
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    z *= np.sqrt(0.5)
    return z @ chol.T


def synthesize_snapshot(scn: Scenario, channels: np.ndarray, k: int,
                        rng: np.random.Generator,
                        phase_rng: np.random.Generator | None = None) -> Snapshot:
    """Simulate one pulse: noise in every bin, plus alpha*h at target bins.

    `channels` is the per-bin signature map for the phases in force (from
    channel_map). Noise is drawn independently per bin; target amplitudes
    come from `phase_rng` when supplied so the noise stream stays untouched
    by scenario edits.
    """
    m = scn.grid.n_bins
    if channels.shape != (m, scn.n_rx):
        raise ValueError("channel map does not match the scenario dimensions")
    if phase_rng is None:
        phase_rng = rng
    r = _noise_batch(scn.noise_chol, m, rng)
    for target in scn.targets:
        alpha = swerling0_amplitude(target, scn.noise_power, phase_rng)
        r[target.bin] += alpha * channels[target.bin]
    return Snapshot(r=r, pulse_index=int(k))
