"""Array geometry: scan grid, planar-array steering vectors, and the TRIS
near-field transmission vector.

Conventions used throughout the package:

* Directions are spatial frequencies (nu_x, nu_y), normalized so that a
  half-wavelength-spaced array accumulates a phase of 2*pi*nu per element.
* Planar arrays are indexed y-major: element n = q * n_x + p for column
  p (x axis) and row q (y axis).
* Grid bins are indexed m = i * l_y + j with i over nu_x and j over nu_y.
"""

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_FREQUENCY_HZ = 28e9
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SpatialGrid:
    """Rectangular lattice of spatial-frequency bins scanned by the radar.

    lo/step record the construction parameters when the grid came from
    make_grid, so configs echo back exactly.
    """

    nu_x: np.ndarray  # (l_x,) strictly increasing, in [-0.5, 0.5)
    nu_y: np.ndarray  # (l_y,) strictly increasing, in [-0.5, 0.5)
    lo: float | None = None
    step: float | None = None

    @property
    def l_x(self) -> int:
        return self.nu_x.size

    @property
    def l_y(self) -> int:
        return self.nu_y.size

    @property
    def n_bins(self) -> int:
        return self.l_x * self.l_y

    def bin_index(self, i: int, j: int) -> int:
        """Flat bin index for axis indices (i, j)."""
        if not (0 <= i < self.l_x and 0 <= j < self.l_y):
            raise ValueError(f"bin ({i}, {j}) outside {self.l_x}x{self.l_y} grid")
        return i * self.l_y + j

    def bin_coords(self, m: int) -> tuple[int, int]:
        """Axis indices (i, j) for flat bin index m."""
        if not (0 <= m < self.n_bins):
            raise ValueError(f"bin {m} outside grid with {self.n_bins} bins")
        return divmod(m, self.l_y)

    def bin_freqs(self, m: int) -> tuple[float, float]:
        i, j = self.bin_coords(m)
        return float(self.nu_x[i]), float(self.nu_y[j])

    def freq_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-bin (nu_x, nu_y) as two flat arrays of length n_bins."""
        gx = np.repeat(self.nu_x, self.l_y)
        gy = np.tile(self.nu_y, self.l_x)
        return gx, gy


def make_grid(l_x: int, l_y: int, lo: float, step: float) -> SpatialGrid:
    """Build the scan grid with values lo, lo+step, ... on each axis.

    Every grid value must lie in [-0.5, 0.5); violations raise ValueError.
    """
    if l_x < 1 or l_y < 1:
        raise ValueError("grid needs at least one bin per axis")
    if step <= 0:
        raise ValueError("grid step must be positive")
    nu_x = lo + step * np.arange(l_x)
    nu_y = lo + step * np.arange(l_y)
    for axis, vals in (("nu_x", nu_x), ("nu_y", nu_y)):
        bad = vals[(vals < -0.5) | (vals >= 0.5)]
        if bad.size:
            raise ValueError(f"grid {axis} value {bad[0]:g} outside [-0.5, 0.5)")
    return SpatialGrid(nu_x=nu_x, nu_y=nu_y, lo=float(lo), step=float(step))


@dataclass(frozen=True)
class UpaSpec:
    """Uniform planar array: element counts per axis and spacing in wavelengths."""

    n_x: int
    n_y: int
    spacing: float = 0.5

    def __post_init__(self):
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("UPA needs at least one element per axis")
        if self.spacing <= 0:
            raise ValueError("UPA spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_x * self.n_y


def steering_vector(spec: UpaSpec, nu_x: float, nu_y: float) -> np.ndarray:
    """Unit-modulus array response toward (nu_x, nu_y), element (0, 0) = 1.

    Element (p, q) carries phase 2*pi*(2*spacing)*(p*nu_x + q*nu_y); at the
    default lambda/2 spacing this reduces to 2*pi*(p*nu_x + q*nu_y).
    """
    if abs(nu_x) > 0.5 or abs(nu_y) > 0.5:
        raise ValueError("spatial frequencies must satisfy |nu| <= 0.5")
    scale = TWO_PI * 2.0 * spec.spacing
    p = np.arange(spec.n_x)
    q = np.arange(spec.n_y)
    phase = scale * (q[:, None] * nu_y + p[None, :] * nu_x)
    return np.exp(1j * phase).ravel()


def steering_matrix(spec: UpaSpec, nu_x: np.ndarray, nu_y: np.ndarray) -> np.ndarray:
    """Stack of steering vectors, one row per (nu_x[t], nu_y[t]) pair."""
    nu_x = np.asarray(nu_x, dtype=float)
    nu_y = np.asarray(nu_y, dtype=float)
    if nu_x.shape != nu_y.shape:
        raise ValueError("nu_x and nu_y must have matching shapes")
    if np.any(np.abs(nu_x) > 0.5) or np.any(np.abs(nu_y) > 0.5):
        raise ValueError("spatial frequencies must satisfy |nu| <= 0.5")
    scale = TWO_PI * 2.0 * spec.spacing
    p = np.arange(spec.n_x)
    q = np.arange(spec.n_y)
    # (T, n_y, n_x) phase tensor flattened y-major to match element indexing
    phase = scale * (nu_y[:, None, None] * q[None, :, None]
                     + nu_x[:, None, None] * p[None, None, :])
    return np.exp(1j * phase).reshape(nu_x.size, spec.n_elements)


def upa_positions(spec: UpaSpec, pitch: float) -> np.ndarray:
    """(N, 2) element coordinates in meters, lattice centered on the origin."""
    p = (np.arange(spec.n_x) - (spec.n_x - 1) / 2.0) * pitch
    q = (np.arange(spec.n_y) - (spec.n_y - 1) / 2.0) * pitch
    xx = np.tile(p, spec.n_y)
    yy = np.repeat(q, spec.n_x)
    return np.column_stack((xx, yy))


@dataclass(frozen=True)
class TrisArray:
    """Transmissive RIS geometry plus its near-field transmission vector.

    The feed antenna sits on the perpendicular axis through the surface
    center at distance d_l; elements form a lambda/2-pitch lattice and each
    has physical size d_x by d_y.
    """

    spec: UpaSpec
    wavelength: float
    d_x: float
    d_y: float
    d_l: float
    positions: np.ndarray  # (N, 2) meters
    w: np.ndarray          # (N,) complex transmission vector

    @property
    def n_elements(self) -> int:
        return self.spec.n_elements


def _nearfield_w(positions, d_l, d_x, d_y, wavelength):
    d = np.sqrt(d_l**2 + positions[:, 0] ** 2 + positions[:, 1] ** 2)
    cos_alpha = d_l / d
    amplitude = d_x * d_y * cos_alpha / d**2
    return amplitude * (1.0 / (TWO_PI * d) - 1j / wavelength) * np.exp(1j * TWO_PI * d / wavelength)


def nearfield_w(tris: TrisArray) -> np.ndarray:
    """Near-field antenna-to-element transmission vector.

    Per element: w = (d_x*d_y*cos(alpha)/d^2) * (1/(2*pi*d) - j/lambda) * exp(j*2*pi*d/lambda)
    with d the feed-to-element distance and cos(alpha) = d_l/d.
    """
    if tris.d_l <= 0:
        raise ValueError("antenna-to-surface distance must be positive")
    return _nearfield_w(tris.positions, tris.d_l, tris.d_x, tris.d_y, tris.wavelength)


def make_tris(spec: UpaSpec,
              frequency_hz: float = DEFAULT_FREQUENCY_HZ,
              d_l_wavelengths: float = 20.0) -> TrisArray:
    """Construct the TRIS at the given carrier frequency.

    Element size d_x = d_y = lambda/2 equals the lattice pitch (contiguous
    surface); the feed distance is given in wavelengths.
    """
    if frequency_hz <= 0:
        raise ValueError("carrier frequency must be positive")
    if d_l_wavelengths <= 0:
        raise ValueError("antenna-to-surface distance must be positive")
    lam = SPEED_OF_LIGHT / frequency_hz
    pitch = spec.spacing * lam
    d_side = lam / 2.0
    positions = upa_positions(spec, pitch)
    d_l = d_l_wavelengths * lam
    w = _nearfield_w(positions, d_l, d_side, d_side, lam)
    return TrisArray(spec=spec, wavelength=lam, d_x=d_side, d_y=d_side,
                     d_l=d_l, positions=positions, w=w)
