"""Cartesian grid, spectral transforms and frequency-space operators.

The box is ``[-L, L)^2`` sampled with ``n`` points per axis; array index
``(i, j)`` holds the value at ``x1 = -L + j*h``, ``x2 = -L + i*h``.  The
continuous transform ``F f(xi) = int exp(-i x.xi) f(x) dx`` is realized by
:func:`to_spectral` with the inverse carrying the ``(2 pi)^-2`` factor, so that
round trips are the identity and multipliers can be written verbatim.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy import ndimage


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on ``[-L, L)^2``."""

    n: int
    L: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not _is_pow2(int(self.n)) or self.n < 16:
            raise ValueError(f"n must be a power of two >= 16, got {self.n!r}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L!r}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def k_max(self) -> float:
        """Largest per-axis wavenumber magnitude, ``pi n / (2L)``."""
        return math.pi * self.n / (2.0 * self.L)

    @property
    def dk(self) -> float:
        return math.pi / self.L

    @cached_property
    def x1d(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def k1d(self) -> np.ndarray:
        # standard FFT layout: 0, 1, ..., n/2-1, -n/2, ..., -1 (times pi/L)
        return 2.0 * np.pi * sfft.fftfreq(self.n, d=self.h)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        x1, x2 = np.meshgrid(self.x1d, self.x1d, indexing="xy")
        return x1, x2

    @cached_property
    def radius(self) -> np.ndarray:
        x1, x2 = self.coords
        return np.hypot(x1, x2)

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        k1, k2 = np.meshgrid(self.k1d, self.k1d, indexing="xy")
        return k1, k2

    @cached_property
    def k2(self) -> np.ndarray:
        k1, k2 = self.wavenumbers
        return k1 * k1 + k2 * k2

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(i L xi) = (-1)^(m1 + m2) aligns the DFT with x starting at -L
        m = np.rint(self.k1d / self.dk).astype(np.int64)
        s = np.where(m % 2 == 0, 1.0, -1.0)
        return np.outer(s, s)

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    def integrate(self, values: np.ndarray) -> float | complex:
        """Rectangle-rule quadrature (spectrally accurate for periodic data)."""
        return np.sum(values) * self.cell_area

    def top_octave_mask(self) -> np.ndarray:
        """Frequencies with ``max(|k1|, |k2|) > k_max / 2``."""
        k1, k2 = self.wavenumbers
        return np.maximum(np.abs(k1), np.abs(k2)) > 0.5 * self.k_max

    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule mask."""
        k1, k2 = self.wavenumbers
        cut = 2.0 / 3.0 * self.k_max
        return (np.abs(k1) < cut) & (np.abs(k2) < cut)


def make_grid(n: int, L: float) -> Grid2D:
    return Grid2D(int(n), float(L))


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex samples of a function on a :class:`Grid2D`."""

    grid: Grid2D
    samples: np.ndarray
    failed: bool = False

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"samples shape {s.shape} does not match grid n={self.grid.n}")
        if not self.failed and not np.all(np.isfinite(s)):
            raise ValueError("non-finite samples in a field not flagged as failed")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid: Grid2D, func) -> "WaveField":
        x1, x2 = grid.coords
        return cls(grid, func(x1, x2))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples)))

    def with_samples(self, samples: np.ndarray) -> "WaveField":
        return WaveField(self.grid, samples)

    def __add__(self, other: "WaveField") -> "WaveField":
        _check_same_grid(self, other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "WaveField") -> "WaveField":
        _check_same_grid(self, other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, c) -> "WaveField":
        return self.with_samples(self.samples * c)

    __rmul__ = __mul__


def _check_same_grid(a: WaveField, b: WaveField) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid2D
    coeffs: np.ndarray


def to_spectral(f: WaveField) -> SpectralField:
    g = f.grid
    return SpectralField(g, g.cell_area * g._phase * sfft.fft2(f.samples))


def from_spectral(fh: SpectralField) -> WaveField:
    g = fh.grid
    return WaveField(g, sfft.ifft2(fh.coeffs * g._phase) / g.cell_area)


def spectral_norm(fh: SpectralField) -> float:
    """``L^2`` norm evaluated on the frequency side (Parseval)."""
    dk = fh.grid.dk
    return math.sqrt(np.sum(np.abs(fh.coeffs) ** 2) * dk * dk) / (2.0 * math.pi)


def apply_multiplier(f: WaveField, symbol: np.ndarray) -> WaveField:
    """Multiply the spectrum of ``f`` by ``symbol`` (grid FFT layout)."""
    return f.with_samples(sfft.ifft2(symbol * sfft.fft2(f.samples)))


def spectral_derivative(f: WaveField, axis: int) -> WaveField:
    """``d/dx_axis`` for ``axis`` in {1, 2}."""
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    k = f.grid.wavenumbers[axis - 1]
    return apply_multiplier(f, 1j * k)


def gradient(f: WaveField) -> tuple[WaveField, WaveField]:
    fh = sfft.fft2(f.samples)
    k1, k2 = f.grid.wavenumbers
    return (f.with_samples(sfft.ifft2(1j * k1 * fh)), f.with_samples(sfft.ifft2(1j * k2 * fh)))


def fractional_symbol(grid: Grid2D, s: float, kind: str = "homogeneous") -> np.ndarray:
    if s < 0:
        raise ValueError("negative order not supported")
    if kind == "homogeneous":
        if s == 0:
            return np.ones_like(grid.k2)
        return grid.k2 ** (0.5 * s)
    if kind == "inhomogeneous":
        return (1.0 + grid.k2) ** (0.5 * s)
    raise ValueError(f"unknown kind {kind!r}")


def fractional_derivative(f: WaveField, s: float, kind: str = "homogeneous") -> WaveField:
    """``D^s`` (homogeneous) or ``Lambda^s`` (inhomogeneous)."""
    symbol = fractional_symbol(f.grid, s, kind)
    if s == 0:
        return f.with_samples(f.samples.copy())
    return apply_multiplier(f, symbol)


def angular_derivative(f: WaveField) -> WaveField:
    """``x1 d2 f - x2 d1 f``."""
    d1, d2 = gradient(f)
    x1, x2 = f.grid.coords
    return f.with_samples(x1 * d2.samples - x2 * d1.samples)


def sobolev_norm(f: WaveField, s: float = 1.0) -> float:
    """``||Lambda^s f||_{L^2}`` computed on the frequency side."""
    g = f.grid
    fh = sfft.fft2(f.samples)
    w = (1.0 + g.k2) ** s
    return math.sqrt(float(np.sum(w * np.abs(fh) ** 2)) * g.cell_area) / g.n


def l2_norm(f: WaveField) -> float:
    return math.sqrt(float(np.sum(np.abs(f.samples) ** 2)) * f.grid.cell_area)


# --- Littlewood-Paley ----------------------------------------------------

def smooth_cutoff(s: np.ndarray) -> np.ndarray:
    """Raised-cosine cutoff: 1 on ``[0, 1]``, 0 on ``[2, inf)``."""
    s = np.asarray(s, dtype=float)
    mid = 0.5 * (1.0 + np.cos(np.pi * np.clip(s - 1.0, 0.0, 1.0)))
    return np.where(s <= 1.0, 1.0, np.where(s >= 2.0, 0.0, mid))


@dataclass(frozen=True)
class DyadicBand:
    """Bump ``beta_N``; ``N = 1`` is the low-frequency block."""

    N: int

    def __post_init__(self):
        if not _is_pow2(int(self.N)):
            raise ValueError(f"dyadic level must be a power of two, got {self.N}")

    def __call__(self, kabs: np.ndarray) -> np.ndarray:
        if self.N == 1:
            return smooth_cutoff(kabs)
        return smooth_cutoff(kabs / self.N) - smooth_cutoff(2.0 * kabs / self.N)

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, 2.0) if self.N == 1 else (self.N / 2.0, 2.0 * self.N)


def dyadic_levels(grid: Grid2D) -> list[int]:
    """Levels whose bumps together cover every grid frequency."""
    kmax = float(grid.kabs.max())
    levels = [1]
    while levels[-1] < kmax:
        levels.append(2 * levels[-1])
    return levels


@dataclass(frozen=True, eq=False)
class BandProjection:
    field: WaveField
    N: int
    beyond_nyquist: bool = False


def littlewood_paley(f: WaveField, N: int) -> WaveField:
    """Smooth frequency projection ``P_N f``.

    Bands that do not meet any grid frequency return a zero field and emit a
    ``RuntimeWarning``; use :func:`littlewood_paley_band` to get the flag.
    """
    return littlewood_paley_band(f, N).field


def littlewood_paley_band(f: WaveField, N: int) -> BandProjection:
    band = DyadicBand(int(N))
    lo, _ = band.support
    if lo >= float(f.grid.kabs.max()):
        warnings.warn(f"band N={N} lies beyond the grid Nyquist range", RuntimeWarning, stacklevel=2)
        return BandProjection(f.with_samples(np.zeros_like(f.samples)), int(N), True)
    return BandProjection(apply_multiplier(f, band(f.grid.kabs)), int(N))


def littlewood_paley_decomposition(f: WaveField) -> dict[int, WaveField]:
    fh = sfft.fft2(f.samples)
    out = {}
    for N in dyadic_levels(f.grid):
        out[N] = f.with_samples(sfft.ifft2(DyadicBand(N)(f.grid.kabs) * fh))
    return out


def tail_fraction(f: WaveField) -> float:
    """Fraction of spectral ``L^2`` mass in the top octave."""
    p = np.abs(sfft.fft2(f.samples)) ** 2
    tot = float(p.sum())
    if tot == 0.0:
        return 0.0
    return float(p[f.grid.top_octave_mask()].sum()) / tot


def radial_mollify(f: WaveField, width: float) -> WaveField:
    """Convolution with the normalized Gaussian ``psi(x) ~ exp(-|x|^2 / (2 width^2))``."""
    return apply_multiplier(f, np.exp(-0.5 * width * width * f.grid.k2))


# --- polar resampling ----------------------------------------------------

@dataclass(frozen=True)
class PolarGrid:
    """Gauss-Legendre radii on ``[0, rho_max]`` times uniform angles.

    With ``stretch = k > 1`` the radial nodes are ``rho_max * tau^k`` for
    Gauss-Legendre ``tau`` in ``[0, 1]``, which clusters them at the origin and
    integrates weights like ``rho^(1/k - 2)`` accurately.
    """

    n_rho: int
    rho_max: float
    n_theta: int = 128
    stretch: float = 1.0

    def __post_init__(self):
        if self.n_theta < 64 or self.n_theta % 2:
            raise ValueError("n_theta must be even and >= 64")
        if self.n_rho < 2:
            raise ValueError("n_rho must be >= 2")
        if not self.rho_max > 0:
            raise ValueError("rho_max must be positive")
        if not self.stretch >= 1:
            raise ValueError("stretch must be >= 1")

    @cached_property
    def _gl(self) -> tuple[np.ndarray, np.ndarray]:
        z, w = np.polynomial.legendre.leggauss(self.n_rho)
        tau, wt = 0.5 * (z + 1.0), 0.5 * w
        k = self.stretch
        return self.rho_max * tau ** k, self.rho_max * k * tau ** (k - 1.0) * wt

    @property
    def rho(self) -> np.ndarray:
        return self._gl[0]

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights for the measure ``rho d rho``."""
        rho, w = self._gl
        return w * rho

    @cached_property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    def disk_area(self) -> float:
        return float(self.weights.sum()) * 2.0 * np.pi


def to_polar(f: WaveField, pg: PolarGrid) -> np.ndarray:
    """Cubic-spline (bicubic) resampling onto the polar nodes, shape ``(n_rho, n_theta)``."""
    g = f.grid
    if pg.rho_max > g.L:
        raise ValueError(f"rho_max={pg.rho_max} exceeds the box half-width L={g.L}")
    r, th = np.meshgrid(pg.rho, pg.theta, indexing="ij")
    col = (r * np.cos(th) + g.L) / g.h
    row = (r * np.sin(th) + g.L) / g.h
    coords = np.array([row.ravel(), col.ravel()])
    re = ndimage.map_coordinates(f.samples.real, coords, order=3, mode="grid-wrap")
    im = ndimage.map_coordinates(f.samples.imag, coords, order=3, mode="grid-wrap")
    return (re + 1j * im).reshape(r.shape)


def to_polar_exact(f: WaveField, pg: PolarGrid) -> np.ndarray:
    """Trigonometric interpolation by direct Fourier summation (slow oracle, n <= 64)."""
    g = f.grid
    if g.n > 64:
        raise ValueError("direct summation oracle is limited to n <= 64")
    if pg.rho_max > g.L:
        raise ValueError(f"rho_max={pg.rho_max} exceeds the box half-width L={g.L}")
    c = sfft.fft2(f.samples) / (g.n * g.n)
    k = g.k1d.copy()
    # symmetric treatment of the Nyquist mode keeps real data real
    nyq = g.n // 2
    r, th = np.meshgrid(pg.rho, pg.theta, indexing="ij")
    y1 = (r * np.cos(th) + g.L).ravel()
    y2 = (r * np.sin(th) + g.L).ravel()
    e1 = np.exp(1j * np.outer(y1, k))
    e2 = np.exp(1j * np.outer(y2, k))
    e1[:, nyq] = np.cos(k[nyq] * y1)
    e2[:, nyq] = np.cos(k[nyq] * y2)
    # f(y) = sum_{a,b} c[a,b] e2[:,a] e1[:,b]
    vals = np.einsum("pa,ab,pb->p", e2, c, e1)
    return vals.reshape(r.shape)
