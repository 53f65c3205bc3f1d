"""Empirical constants for weighted, angular and Strichartz-type inequalities.

A bound ``A <~ B`` is probed by the ratio ``A / B`` over a seeded family of
test functions, recomputed on a refined grid with the same samples.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.fft as sfft

from .diagnostics import StrichartzPair, h_theta_norm, polar_mixed_norm
from .evolve import far_field_propagate, free_propagate
from .grid import (Grid2D, PolarGrid, WaveField, angular_derivative, fractional_derivative,
                   gradient, l2_norm, littlewood_paley, make_grid, radial_mollify, sobolev_norm,
                   to_polar)

FAMILY_KINDS = ("bumps", "bandlimited", "harmonics")


@dataclass(frozen=True)
class TestFunctionFamily:
    """Seeded random test functions with physical (grid-independent) parameters.

    ``bumps``: sums of one to three chirped Gaussians at random centers.
    ``bandlimited``: Gabor atoms whose spectrum sits in an annulus away from 0.
    ``harmonics``: ``((x1 + i x2)/w)^m exp(-|x|^2 / (2 w^2))``.
    ``band_limit`` is the fraction of the grid's ``k_max`` that each sample's
    spectrum must stay below (checked on generation).
    """

    __test__ = False  # not a pytest class

    kind: str = "bumps"
    seed: int = 0
    count: int = 50
    band_limit: float = 1.0 / 3.0
    width: tuple[float, float] = (1.5, 1.8)
    center_radius: float = 3.5
    chirp_max: float = 0.05
    max_mode: int = 3

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if not 0 < self.band_limit <= 1:
            raise ValueError("band_limit must lie in (0, 1]")
        if self.count < 1:
            raise ValueError("count must be >= 1")

    def parameters(self) -> list[dict]:
        rng = np.random.default_rng(self.seed)
        out = []
        lo, hi = self.width
        for _ in range(self.count):
            if self.kind == "bumps":
                m = int(rng.integers(1, 4))
                atoms = []
                for _ in range(m):
                    rad = self.center_radius * math.sqrt(rng.uniform())
                    ang = rng.uniform(0, 2 * math.pi)
                    atoms.append(dict(c=(rad * math.cos(ang), rad * math.sin(ang)),
                                      w=rng.uniform(lo, hi), chirp=rng.uniform(-self.chirp_max, self.chirp_max),
                                      a=complex(rng.normal(), rng.normal()), p=(0.0, 0.0)))
                out.append({"atoms": atoms})
            elif self.kind == "bandlimited":
                rad = self.center_radius * math.sqrt(rng.uniform())
                ang = rng.uniform(0, 2 * math.pi)
                w = rng.uniform(lo, hi)
                # carrier placed later relative to the band; store a unit fraction
                out.append({"atoms": [dict(c=(rad * math.cos(ang), rad * math.sin(ang)), w=w, chirp=0.0,
                                           a=complex(rng.normal(), rng.normal()), p=None,
                                           p_frac=rng.uniform(), p_ang=rng.uniform(0, 2 * math.pi))]})
            else:
                out.append({"mode": int(rng.integers(0, self.max_mode + 1)), "w": rng.uniform(lo, hi),
                            "a": complex(rng.normal(), rng.normal())})
        return out

    def samples(self, grid: Grid2D, k_band: float | None = None) -> list[WaveField]:
        """Fields on ``grid``; ``k_band`` pins the band so refinement reuses the same functions."""
        if k_band is None:
            k_band = self.band_limit * grid.k_max
        x1, x2 = grid.coords
        fields = []
        for prm in self.parameters():
            if self.kind == "harmonics":
                w, m = prm["w"], prm["mode"]
                f = prm["a"] * ((x1 + 1j * x2) / w) ** m * np.exp(-(x1 ** 2 + x2 ** 2) / (2 * w * w))
            else:
                f = np.zeros(grid.radius.shape, dtype=complex)
                for at in prm["atoms"]:
                    p = at["p"]
                    if p is None:
                        sk = 1.0 / at["w"]
                        lo_p, hi_p = 7.0 * sk, k_band - 7.0 * sk
                        if hi_p < lo_p:
                            raise ValueError("band too narrow for the requested widths")
                        mag = lo_p + at["p_frac"] * (hi_p - lo_p)
                        p = (mag * math.cos(at["p_ang"]), mag * math.sin(at["p_ang"]))
                    y1, y2 = x1 - at["c"][0], x2 - at["c"][1]
                    r2 = y1 * y1 + y2 * y2
                    f += at["a"] * np.exp(-r2 / (2 * at["w"] ** 2) - 1j * at["chirp"] * r2
                                          + 1j * (p[0] * x1 + p[1] * x2))
            fields.append(WaveField(grid, f))
        return fields


def band_excess(f: WaveField, k_band: float) -> float:
    """Relative spectral ``L^2`` mass beyond ``|xi| > k_band``."""
    p = np.abs(sfft.fft2(f.samples)) ** 2
    tot = float(p.sum())
    return float(p[f.grid.kabs > k_band].sum()) / tot if tot > 0 else 0.0


@dataclass
class InequalityReport:
    inequality: str
    ratios: list[float]
    sup_ratio: float
    refinement: tuple[float, float] | None = None
    params: dict = field(default_factory=dict)
    skipped: int = 0

    @property
    def refinement_change(self) -> float:
        if self.refinement is None:
            return math.nan
        c, f = self.refinement
        return abs(f - c) / f

    def as_dict(self) -> dict:
        d = asdict(self)
        d["refinement_change"] = self.refinement_change
        return d


def _ratios(fields: list[WaveField], lhs: Callable, rhs: Callable) -> tuple[list[float], int]:
    out, skipped = [], 0
    for f in fields:
        if not np.any(f.samples):
            skipped += 1
            continue
        b = rhs(f)
        if not b > 0:
            skipped += 1
            continue
        out.append(float(lhs(f) / b))
    return out, skipped


def _run(name: str, family: TestFunctionFamily, lhs, rhs, n: int, L: float, refine: bool, params: dict,
         fields: list[WaveField] | None = None) -> InequalityReport:
    coarse = make_grid(n, L)
    k_band = family.band_limit * coarse.k_max
    fs = family.samples(coarse, k_band) if fields is None else fields
    ratios, skipped = _ratios(fs, lhs, rhs)
    sup = max(ratios) if ratios else math.nan
    ref = None
    if refine and fields is None:
        fine = make_grid(2 * n, L)
        r2, _ = _ratios(family.samples(fine, k_band), lhs, rhs)
        ref = (sup, max(r2))
    return InequalityReport(name, ratios, sup, ref, dict(params, n=n, L=L, family=family.kind,
                                                         seed=family.seed, count=family.count), skipped)


# --- weighted decay -------------------------------------------------------------

def weighted_sup_norm(f: WaveField, b: float) -> float:
    return float(np.max(f.grid.radius ** b * np.abs(f.samples)))


def check_angular_decay(family: TestFunctionFamily, b: float = 0.5, n: int = 128, L: float = 16.0,
                        refine: bool = True, fields: list[WaveField] | None = None) -> InequalityReport:
    """``|| |x|^b f ||_inf / ||f||_{H_theta^{1,1}}``."""
    if not 0 < b <= 0.5:
        raise ValueError("b must lie in (0, 1/2]")
    return _run("angular_decay", family, lambda f: weighted_sup_norm(f, b), h_theta_norm,
                n, L, refine, {"b": b}, fields)


def _polar_for(grid: Grid2D, n_rho: int | None = None, n_theta: int = 128, stretch: float = 1.0) -> PolarGrid:
    return PolarGrid(n_rho or grid.n // 2, 0.98 * grid.L, n_theta, stretch)


def corollary_norm(f: WaveField, p: float, pg: PolarGrid | None = None) -> float:
    """``|| |x|^(1/2 - 1/p) f ||_{L^p_rho L^inf_theta}``."""
    pg = pg or _polar_for(f.grid)
    vals = pg.rho[:, None] ** (0.5 - 1.0 / p) * np.abs(to_polar(f, pg))
    return polar_mixed_norm(vals, pg, p, math.inf)


def check_corollary_decay(family: TestFunctionFamily, p: float = 4.0, n: int = 128, L: float = 16.0,
                          refine: bool = True, fields: list[WaveField] | None = None) -> InequalityReport:
    if not 2 < p < math.inf:
        raise ValueError("p must lie in (2, inf)")
    return _run("corollary_decay", family, lambda f: corollary_norm(f, p), h_theta_norm,
                n, L, refine, {"p": p}, fields)


def hardy_weighted_norm(f: WaveField, s: float, p: float, n_rho: int = 256) -> float:
    """``|| |x|^-s f ||_{L^p}`` by polar quadrature with nodes clustered at the origin."""
    k = 1.0 / (2.0 - s * p)  # tau substitution makes rho^(1 - s p) d rho smooth
    pg = PolarGrid(n_rho, 0.98 * f.grid.L, 128, max(1.0, k))
    vals = pg.rho[:, None] ** (-s) * np.abs(to_polar(f, pg))
    return polar_mixed_norm(vals, pg, p, p)


def lp_norm(f: WaveField, p: float) -> float:
    return float(np.sum(np.abs(f.samples) ** p) * f.grid.cell_area) ** (1.0 / p)


def check_hardy_sobolev(family: TestFunctionFamily, s: float = 0.25, p: float = 4.0, n: int = 128,
                        L: float = 16.0, refine: bool = True,
                        fields: list[WaveField] | None = None) -> InequalityReport:
    """``|| |x|^-s f ||_{L^p} / || D^s f ||_{L^p}`` for ``0 < s < 2/p``, ``2 < p < inf``."""
    if not 2 < p < math.inf:
        raise ValueError("p must lie in (2, inf)")
    if not 0 < s < 2.0 / p:
        raise ValueError("s must lie in (0, 2/p)")
    return _run("hardy_sobolev", family, lambda f: hardy_weighted_norm(f, s, p),
                lambda f: lp_norm(fractional_derivative(f, s), p), n, L, refine, {"s": s, "p": p}, fields)


def is_radial(f: WaveField, tol: float = 1e-8) -> bool:
    return l2_norm(angular_derivative(f)) <= tol * max(l2_norm(f), np.finfo(float).tiny) * f.grid.L


def radial_interpolation_ratio(f: WaveField, b: float) -> float:
    d1, d2 = gradient(f)
    grad = math.sqrt(l2_norm(d1) ** 2 + l2_norm(d2) ** 2)
    return weighted_sup_norm(f, b) / (l2_norm(f) ** b * grad ** (1.0 - b))


def check_radial_interpolation(fields: list[WaveField], b: float = 0.5, tol: float = 1e-8) -> InequalityReport:
    """``|| |x|^b f ||_inf / (||f||^b ||grad f||^(1-b))`` on radial inputs."""
    if not 0 < b <= 0.5:
        raise ValueError("b must lie in (0, 1/2]")
    for f in fields:
        if not is_radial(f, tol):
            raise ValueError("non-radial input: angular derivative above tolerance")
    ratios, skipped = _ratios(fields, lambda f: radial_interpolation_ratio(f, b) * 1.0, lambda f: 1.0)
    ratios = [r for r in ratios if math.isfinite(r)]
    g = fields[0].grid
    return InequalityReport("radial_interpolation", ratios, max(ratios) if ratios else math.nan,
                            None, {"b": b, "n": g.n, "L": g.L}, skipped)


# --- Strichartz sampling ---------------------------------------------------------

def _simpson(y: np.ndarray, dx: float) -> float:
    if len(y) % 2 == 0:
        raise ValueError("Simpson rule needs an odd number of nodes")
    return float(dx / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum()))


def _switch_time(grid: Grid2D) -> float:
    return grid.L / grid.k_max


def free_lr_norm(phi: WaveField, t: float, r: float, pad: int = 1) -> float:
    """``|| exp(it Delta) phi ||_{L^r}``, on the box for small ``|t|`` and in far field otherwise."""
    if abs(t) < _switch_time(phi.grid):
        u = free_propagate(phi, t)
    else:
        u = far_field_propagate(phi, t, pad)
    a = np.abs(u.samples)
    if math.isinf(r):
        return float(a.max())
    return float(np.sum(a ** r) * u.grid.cell_area) ** (1.0 / r)


@dataclass
class StrichartzSample:
    ratio: float
    window: float
    doubled_ratio: float
    change: float


def sample_strichartz(phi: WaveField, pair: StrichartzPair, T_window: float = 20.0, dt_q: float = 0.05,
                      check_doubling: bool = True) -> StrichartzSample:
    """Finite-window ``|| exp(it Delta) phi ||_{L^q_t L^r_x} / ||phi||_{L^2}`` over ``[-T, T]``."""
    if not pair.is_admissible():
        raise ValueError(f"pair (q={pair.q}, r={pair.r}) is not admissible")
    m = l2_norm(phi)
    if math.isinf(pair.q):
        if pair.r == 2:
            return StrichartzSample(1.0, T_window, 1.0, 0.0)
        # sup over the window on the quadrature nodes
        ts = np.arange(-T_window, T_window + 0.5 * dt_q, dt_q)
        v = max(free_lr_norm(phi, t, pair.r) for t in ts) / m
        return StrichartzSample(v, T_window, v, 0.0)

    cache: dict[float, float] = {}

    def norm_q(t):
        key = round(t / dt_q)
        if key not in cache:
            cache[key] = free_lr_norm(phi, key * dt_q, pair.r) ** pair.q
        return cache[key]

    def window_ratio(T):
        k = int(round(T / dt_q))
        ts = dt_q * np.arange(-k, k + 1)
        y = np.array([norm_q(t) for t in ts])
        return _simpson(y, dt_q) ** (1.0 / pair.q) / m

    a = window_ratio(T_window)
    if not check_doubling:
        return StrichartzSample(a, T_window, math.nan, math.nan)
    b = window_ratio(2 * T_window)
    return StrichartzSample(a, T_window, b, abs(b - a) / b)


def gaussian_l4_strichartz_oracle(T: float) -> float:
    """Closed form for ``phi = exp(-|x|^2/2)`` and ``(q, r) = (4, 4)``."""
    return (0.5 * math.pi * math.atan(2.0 * T)) ** 0.25 / math.sqrt(math.pi)


def annulus_profile(grid: Grid2D, lam: int, mode: int = 1) -> WaveField:
    """``P_lam`` applied to ``((y1 + i y2))^mode exp(-|y|^2/2)`` with ``y = lam x``.

    All profiles are exact dilates of the ``lam = 1`` profile.
    """
    x1, x2 = grid.coords
    y1, y2 = lam * x1, lam * x2
    g = WaveField(grid, (y1 + 1j * y2) ** mode * np.exp(-(y1 * y1 + y2 * y2) / 2.0))
    return littlewood_paley(g, lam)


def angular_mixed_free_norm(phi: WaveField, t: float, r: float, n_rho: int = 192, n_theta: int = 64,
                            pad: int = 1) -> float:
    """``|| exp(it Delta) phi ||_{L^r_rho L^2_theta}``."""
    g = phi.grid
    if abs(t) < _switch_time(g):
        u = free_propagate(phi, t)
        pg = PolarGrid(n_rho, 0.98 * g.L, n_theta)
        return polar_mixed_norm(to_polar(u, pg), pg, r, 2.0)
    # far field: |u(x)| = |G(x / 2t)| / (4 pi |t|), G on the spectral grid of half-width k_max
    u = far_field_propagate(phi, t, pad)
    big = u.grid
    scale = 2.0 * abs(t)
    G = WaveField(Grid2D(big.n, big.L / scale), u.samples)
    pg = PolarGrid(n_rho, 0.98 * G.grid.L, n_theta)
    return polar_mixed_norm(to_polar(G, pg), pg, r, 2.0) * scale ** (2.0 / r)


def _log_simpson(fn: Callable[[float], float], a: float, b: float, per_octave: int) -> float:
    """``int_a^b fn(t) dt`` by Simpson in ``s = log t`` (``0 < a < b``)."""
    m = max(2, int(math.ceil(per_octave * math.log2(b / a))))
    m += m % 2
    s = np.linspace(math.log(a), math.log(b), m + 1)
    t = np.exp(s)
    y = np.array([fn(float(v)) for v in t]) * t
    return _simpson(y, (s[-1] - s[0]) / m)


def sample_extended_strichartz(lams=(2, 4, 8, 16), r: float = 8.0, n: int = 256, L: float = 12.0,
                               core: float = 2.0, dt_q: float = 0.05, window: float = 16.0,
                               per_octave: int = 16, tol: float = 0.01, max_window: float = 4096.0,
                               mode: int = 1) -> InequalityReport:
    """Normalized ``lam^(2/r) ||exp(it Delta) phi_lam||_{L^2_t L^r_rho L^2_theta} / ||phi_lam||``.

    Times are measured in units of ``lam^-2``.  The core ``|t| <= core`` uses
    composite Simpson with step ``dt_q``; beyond it the integrand is a smooth
    power-law tail and Simpson runs in ``log t``.  The window doubles from
    ``window`` until the ratio moves by less than ``tol``.
    """
    if not r > 6:
        raise ValueError("r must exceed 6")
    if not 0 < core < window:
        raise ValueError("need 0 < core < window")
    grid = make_grid(n, L)
    ratios, windows, changes = [], [], []
    for lam in lams:
        if 2 * lam > grid.k_max:
            raise ValueError(f"annulus for lam={lam} exceeds k_max={grid.k_max:.3g}")
        phi = annulus_profile(grid, lam, mode)
        m = l2_norm(phi)
        c = 1.0 / lam ** 2

        def sq(t):
            return angular_mixed_free_norm(phi, t, r) ** 2

        kk = int(round(core / dt_q))
        y = np.array([sq(k * dt_q * c) for k in range(-kk, kk + 1)])
        total = _simpson(y, dt_q * c)
        lo = core
        hi = window
        while True:
            total += _log_simpson(sq, lo * c, hi * c, per_octave) + _log_simpson(lambda t: sq(-t), lo * c, hi * c, per_octave)
            val = lam ** (2.0 / r) * math.sqrt(total) / m
            if lo > core:
                change = abs(val - prev) / val
                if change < tol or hi >= max_window:
                    break
            prev = val
            lo, hi = hi, 2 * hi
        ratios.append(val)
        windows.append(hi)
        changes.append(change)
    slope = float(np.polyfit(np.log(lams), np.log(ratios), 1)[0]) if len(lams) > 1 else 0.0
    return InequalityReport("extended_strichartz", ratios, max(ratios), None,
                            {"r": r, "lams": list(lams), "n": n, "L": L, "slope": slope,
                             "spread": max(ratios) / min(ratios), "windows": windows,
                             "window_changes": changes})


# --- commutation -----------------------------------------------------------------

@dataclass
class CommutationReport:
    s: float
    homogeneous: list[float]
    inhomogeneous: list[float]
    mollifier: list[float]

    @property
    def worst(self) -> float:
        return max(self.homogeneous + self.inhomogeneous + self.mollifier)


def commutator_norms(f: WaveField, s: float, mollifier_width: float = 0.5) -> tuple[float, float, float]:
    """Relative commutators of ``d_theta`` with ``D^s``, ``Lambda^s`` and a radial mollifier."""
    den = sobolev_norm(f, s + 1.0)
    th = angular_derivative(f)
    out = []
    for kind in ("homogeneous", "inhomogeneous"):
        a = angular_derivative(fractional_derivative(f, s, kind))
        b = fractional_derivative(th, s, kind)
        out.append(l2_norm(a - b) / den)
    a = angular_derivative(radial_mollify(f, mollifier_width))
    b = radial_mollify(th, mollifier_width)
    out.append(l2_norm(a - b) / l2_norm(th) if l2_norm(th) > 0 else l2_norm(a - b))
    return out[0], out[1], out[2]


def check_commutation(family: TestFunctionFamily, s: float, n: int = 512, L: float = 20.0) -> CommutationReport:
    if s < 0:
        raise ValueError("s must be >= 0")
    grid = make_grid(n, L)
    h, i, m = [], [], []
    for f in family.samples(grid):
        a, b, c = commutator_norms(f, s)
        h.append(a)
        i.append(b)
        m.append(c)
    return CommutationReport(s, h, i, m)


# --- free dispersive decay --------------------------------------------------------

@dataclass
class ExponentFit:
    slope: float
    intercept: float
    window: tuple[float, float]
    residual: float  # rms of the log-log fit


def fit_exponent(t, y) -> ExponentFit:
    """Least-squares slope of ``log y`` against ``log t``."""
    lt, ly = np.log(np.asarray(t, float)), np.log(np.asarray(y, float))
    A = np.vstack([lt, np.ones_like(lt)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return ExponentFit(float(coef[0]), float(coef[1]), (float(np.min(t)), float(np.max(t))), res)


def free_decay_series(phi: WaveField, times, theta: float, pad: int = 2) -> np.ndarray:
    """``|| |x|^theta exp(it Delta) phi ||_inf`` at each time (far field once ``|t|`` is large)."""
    out = []
    for t in times:
        if abs(t) < _switch_time(phi.grid):
            u = free_propagate(phi, t)
        else:
            u = far_field_propagate(phi, t, pad)
        out.append(weighted_sup_norm(u, theta))
    return np.array(out)


def free_decay_exponents(phi: WaveField, thetas=(0.0, 0.25, 0.5), t0: float = 2.0, t1: float = 10.0,
                         count: int = 17) -> dict[float, ExponentFit]:
    times = np.geomspace(t0, t1, count)
    return {th: fit_exponent(times, free_decay_series(phi, times, th)) for th in thetas}
