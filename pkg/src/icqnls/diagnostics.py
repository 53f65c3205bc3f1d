"""Functionals evaluated on solutions: conserved quantities, virial terms,
angular Sobolev and polar mixed norms, Besov-type sums, Galilean operator."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np
import scipy.fft as sfft

from .fields import CoefficientField
from .grid import (DyadicBand, PolarGrid, WaveField, angular_derivative,
                   dyadic_levels, gradient, sobolev_norm, tail_fraction, to_polar)


def _density(u: WaveField) -> np.ndarray:
    s = u.samples
    return s.real ** 2 + s.imag ** 2


def mass(u: WaveField) -> float:
    return float(u.grid.integrate(_density(u)))


def grad_norm_sq(u: WaveField) -> float:
    g = u.grid
    p = np.abs(sfft.fft2(u.samples)) ** 2
    return float(np.sum(g.k2 * p)) * g.cell_area / (g.n * g.n)


def _potential_terms(u: WaveField, K1: CoefficientField, K2: CoefficientField) -> tuple[float, float]:
    """``(int K1 |u|^4, int K2 |u|^6)``."""
    g = u.grid
    a = _density(u)
    q4 = 0.0 if K1.is_zero else float(g.integrate(K1.sample(g) * a * a))
    q6 = 0.0 if K2.is_zero else float(g.integrate(K2.sample(g) * a * a * a))
    return q4, q6


def potential_V(u: WaveField, K1: CoefficientField, K2: CoefficientField) -> float:
    q4, q6 = _potential_terms(u, K1, K2)
    return q4 / 4.0 + q6 / 6.0


def energy(u: WaveField, K1: CoefficientField, K2: CoefficientField) -> float:
    return 0.5 * grad_norm_sq(u) + potential_V(u, K1, K2)


def dilation_A(u: WaveField) -> float:
    """``Im int conj(u) (x . grad u) dx``."""
    d1, d2 = gradient(u)
    x1, x2 = u.grid.coords
    integrand = np.conj(u.samples) * (x1 * d1.samples + x2 * d2.samples)
    return float(u.grid.integrate(integrand.imag))


def variance(u: WaveField) -> float:
    """``|| |x| u ||_{L^2}^2`` over the box."""
    return float(u.grid.integrate(u.grid.radius ** 2 * _density(u)))


def boundary_mass_fraction(u: WaveField, frac: float = 0.8) -> float:
    """Share of mass outside the disk ``|x| <= frac * L``."""
    a = _density(u)
    tot = float(a.sum())
    if tot == 0.0:
        return 0.0
    return float(a[u.grid.radius > frac * u.grid.L].sum()) / tot


def h_theta_norm(u: WaveField, order: int = 1) -> float:
    """``||u||_{H^order} + ||d_theta u||_{H^1}``."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return sobolev_norm(u, order) + sobolev_norm(angular_derivative(u), 1)


def _lp(values: np.ndarray, weights, p: float, axis=None) -> np.ndarray:
    if math.isinf(p):
        return np.max(values, axis=axis)
    return np.sum(weights * values ** p, axis=axis) ** (1.0 / p)


def polar_mixed_norm(samples: np.ndarray, pg: PolarGrid, p_rho: float, q_theta: float) -> float:
    """Mixed norm of polar samples ``(n_rho, n_theta)``: inner over angle, outer with ``rho d rho``."""
    a = np.abs(samples)
    inner = _lp(a, pg.dtheta, q_theta, axis=1)
    return float(_lp(inner, pg.weights, p_rho))


def mixed_norm(u: WaveField, pg: PolarGrid, p_rho: float, q_theta: float) -> float:
    if not (p_rho >= 1 and q_theta >= 1):
        raise ValueError("exponents must be >= 1")
    return polar_mixed_norm(to_polar(u, pg), pg, p_rho, q_theta)


def besov_angular_norm(u: WaveField, pg: PolarGrid, r: float, s: float,
                       return_terms: bool = False):
    """``(sum_N N^{2s} ||P_N u||^2_{L^r_rho L^2_theta})^{1/2}`` over the grid's dyadic levels."""
    if r < 2:
        raise ValueError("r must be >= 2")
    uh = sfft.fft2(u.samples)
    terms = {}
    for N in dyadic_levels(u.grid):
        pn = u.with_samples(sfft.ifft2(DyadicBand(N)(u.grid.kabs) * uh))
        terms[N] = float(N) ** (2.0 * s) * mixed_norm(pn, pg, r, 2.0) ** 2
    val = math.sqrt(sum(terms.values()))
    return (val, terms) if return_terms else val


def galilean_J(u: WaveField, t: float) -> tuple[WaveField, WaveField]:
    """Components ``x_j u + 2 i t d_j u``."""
    d1, d2 = gradient(u)
    x1, x2 = u.grid.coords
    return (u.with_samples(x1 * u.samples + 2j * t * d1.samples),
            u.with_samples(x2 * u.samples + 2j * t * d2.samples))


def galilean_J_norm_sq(u: WaveField, t: float) -> float:
    return sum(mass(c) for c in galilean_J(u, t))


def scattering_correlation_H(u: WaveField, u_plus: WaveField) -> float:
    """``-Im int u conj(u_plus) dx``."""
    if u.grid != u_plus.grid:
        raise ValueError("fields live on different grids")
    # Im(u conj v) = u_i v_r - u_r v_i, exactly antisymmetric in floating point
    a, b = u.samples, u_plus.samples
    return -float(u.grid.integrate(a.imag * b.real - a.real * b.imag))


def virial_rhs(u: WaveField, K1: CoefficientField, K2: CoefficientField) -> float:
    """``4E - 1/2 int (x.grad K1)|u|^4 + 1/3 int (2 K2 - x.grad K2)|u|^6``."""
    g = u.grid
    a = _density(u)
    r = g.radius
    out = 4.0 * energy(u, K1, K2)
    if not K1.is_zero:
        out -= 0.5 * float(g.integrate(K1.radial_dot(r) * a * a))
    if not K2.is_zero:
        out += float(g.integrate((2.0 * K2.radial(r) - K2.radial_dot(r)) * a * a * a)) / 3.0
    return out


@dataclass(frozen=True)
class StrichartzPair:
    q: float
    r: float

    @property
    def s(self) -> float:
        return 2.0 * (_inv(self.q) + _inv(self.r) - 0.5)

    def is_admissible(self, tol: float = 1e-12) -> bool:
        q, r = self.q, self.r
        if not (q >= 2 and r >= 2):
            return False
        if q == 2 and math.isinf(r):
            return False
        return abs(_inv(q) + _inv(r) - 0.5) <= tol

    def in_extended_set(self) -> bool:
        """Membership in ``{(inf, 2)} U {1/2 - 1/r < 1/q < 3/2 (1/2 - 1/r), 2 <= q < inf, 2 < r < inf}``."""
        q, r = self.q, self.r
        if math.isinf(q) and r == 2:
            return True
        if not (2 <= q < math.inf and 2 < r < math.inf):
            return False
        a = 0.5 - 1.0 / r
        return a < 1.0 / q < 1.5 * a


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    dilation_A: float
    variance: float
    potential_V: float
    grad_norm: float
    h_theta_11: float
    tail_fraction: float
    boundary_mass_fraction: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def values(self) -> list[float]:
        return [getattr(self, c) for c in self.columns()]

    def as_dict(self) -> dict:
        return asdict(self)


def diagnostics_record(u: WaveField, t: float, K1: CoefficientField, K2: CoefficientField) -> DiagnosticsRecord:
    g2 = grad_norm_sq(u)
    V = potential_V(u, K1, K2)
    return DiagnosticsRecord(
        t=float(t),
        mass=mass(u),
        energy=0.5 * g2 + V,
        dilation_A=dilation_A(u),
        variance=variance(u),
        potential_V=V,
        grad_norm=math.sqrt(g2),
        h_theta_11=h_theta_norm(u, 1),
        tail_fraction=tail_fraction(u),
        boundary_mass_fraction=boundary_mass_fraction(u),
    )
