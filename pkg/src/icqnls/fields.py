"""Capped power-law interaction coefficients and structural checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid2D, WaveField


@dataclass(frozen=True)
class CoefficientField:
    """``K(x) = sign * kappa * min(|x|, cap_radius)^b``."""

    b: float
    kappa: float = 1.0
    sign: int = 1
    cap_radius: float = math.inf

    def __post_init__(self):
        if not self.b >= 0:
            raise ValueError(f"growth exponent b must be >= 0, got {self.b}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if not self.cap_radius > 0:
            raise ValueError("cap_radius must be positive")

    @property
    def amplitude(self) -> float:
        return self.sign * self.kappa

    def radial(self, r) -> np.ndarray:
        r = np.minimum(np.asarray(r, dtype=float), self.cap_radius)
        return self.amplitude * r ** self.b

    def radial_dot(self, r) -> np.ndarray:
        """``x . grad K`` as a function of ``|x|``."""
        r = np.asarray(r, dtype=float)
        inside = r < self.cap_radius
        return np.where(inside, self.amplitude * self.b * r ** self.b, 0.0)

    def __call__(self, x1, x2) -> np.ndarray:
        return self.radial(np.hypot(x1, x2))

    def sample(self, grid: Grid2D) -> np.ndarray:
        return self.radial(grid.radius)

    @property
    def is_zero(self) -> bool:
        return False

    def to_dict(self) -> dict:
        return {"b": self.b, "kappa": self.kappa, "sign": self.sign,
                "cap_radius": None if math.isinf(self.cap_radius) else self.cap_radius}


class ZeroField(CoefficientField):
    """``K = 0``; used for the free flow."""

    def __init__(self):
        object.__setattr__(self, "b", 0.0)
        object.__setattr__(self, "kappa", 1.0)
        object.__setattr__(self, "sign", 1)
        object.__setattr__(self, "cap_radius", math.inf)

    @property
    def amplitude(self) -> float:
        return 0.0

    @property
    def is_zero(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"zero": True}

    def __repr__(self):
        return "ZeroField()"


ZERO = ZeroField()


def power_law_field(b: float, kappa: float = 1.0, sign: int = 1, cap_radius: float = math.inf) -> CoefficientField:
    return CoefficientField(float(b), float(kappa), int(sign), float(cap_radius))


def default_cap(grid: Grid2D) -> float:
    return 0.9 * grid.L


def radial_gradient_dot(K: CoefficientField, grid: Grid2D) -> WaveField:
    return WaveField(grid, K.radial_dot(grid.radius))


@dataclass
class RigidityReport:
    alpha: float
    passed: dict[str, bool]
    witness: dict[str, tuple[float, float]]  # name -> (radius of min margin, min margin)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def _radii(grid: Grid2D | None, n_radii: int) -> np.ndarray:
    if grid is None:
        lo, hi = 1e-3, 1e3
    else:
        lo, hi = grid.h / 2.0, grid.L * math.sqrt(2.0)
    return np.geomspace(lo, hi, n_radii)


def rigidity_check(K1: CoefficientField, K2: CoefficientField, alpha: float,
                   grid: Grid2D | None = None, n_radii: int = 400) -> RigidityReport:
    """Sample ``-x.grad K1 <= alpha K1`` and ``2 K2 - x.grad K2 <= alpha K2``."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    r = _radii(grid, n_radii)
    if grid is not None:
        caps = [c for c in (K1.cap_radius, K2.cap_radius) if r[0] < c < r[-1]]
        r = np.sort(np.concatenate([r, caps, np.nextafter(caps, np.inf)])) if caps else r
    m1 = alpha * K1.radial(r) + K1.radial_dot(r)
    m2 = alpha * K2.radial(r) - (2.0 * K2.radial(r) - K2.radial_dot(r))
    passed, witness = {}, {}
    for name, m in (("K1", m1), ("K2", m2)):
        i = int(np.argmin(m))
        # relative slack absorbs rounding in exact-equality cases such as b2 = 2 - alpha
        scale = max(1.0, float(np.max(np.abs(m))))
        passed[name] = bool(m[i] >= -1e-12 * scale)
        witness[name] = (float(r[i]), float(m[i]))
    return RigidityReport(float(alpha), passed, witness)


@dataclass
class GrowthReport:
    constants: tuple[float, float, float]
    cartesian_hessian: float
    cap_kink: bool
    cap_radius: float
    notes: list[str] = field(default_factory=list)

    @property
    def finite(self) -> bool:
        return all(math.isfinite(c) for c in self.constants)


def growth_condition_check(K: CoefficientField, grid: Grid2D | None = None, n_radii: int = 400) -> GrowthReport:
    """Empirical constants ``sup |x|^(j-b) |d^j K / dr^j|`` for ``j = 0, 1, 2``.

    Derivatives are the closed forms of the capped power law; beyond the cap
    they vanish.  ``cartesian_hessian`` is the sup of the spectral radius of the
    Cartesian Hessian scaled by ``|x|^(2-b)``.
    """
    r = _radii(grid, n_radii)
    b, a = K.b, abs(K.amplitude)
    inside = r < K.cap_radius
    d0 = np.abs(K.radial(r))
    d1 = np.where(inside, a * b * r ** (b - 1.0), 0.0)
    d2 = np.where(inside, a * abs(b * (b - 1.0)) * r ** (b - 2.0), 0.0)
    hess = np.where(inside, a * max(abs(b * (b - 1.0)), b) * r ** (b - 2.0), 0.0)
    w = [r ** (j - b) for j in range(3)]
    consts = tuple(float(np.max(d * wj)) for d, wj in zip((d0, d1, d2), w))
    notes = []
    kink = bool(b > 0 and r[0] < K.cap_radius < r[-1])
    if kink:
        notes.append(f"first derivative jumps from {a * b * K.cap_radius ** (b - 1):.6g} to 0 at r={K.cap_radius:.6g}")
    return GrowthReport(consts, float(np.max(hess * w[2])), kink, K.cap_radius, notes)
