"""Free propagator, Strang splitting and Duhamel consistency."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft as sfft

from .fields import ZERO, CoefficientField
from .grid import Grid2D, WaveField, to_spectral


def free_symbol(grid: Grid2D, t: float) -> np.ndarray:
    return np.exp(-1j * t * grid.k2)


def free_propagate(u: WaveField, t: float) -> WaveField:
    """``exp(i t Delta) u``: exact multiplication by ``exp(-i t |xi|^2)``."""
    if t == 0:
        return u.with_samples(u.samples.copy())
    return u.with_samples(sfft.ifft2(free_symbol(u.grid, t) * sfft.fft2(u.samples)))


def far_field_propagate(phi: WaveField, t: float, pad: int = 2) -> WaveField:
    """Free evolution for large ``|t|`` on a dilated grid.

    Uses the exact factorization
    ``exp(i t Delta) phi (x) = (4 pi i t)^-1 exp(i|x|^2/4t) F[exp(i|y|^2/4t) phi](x / 2t)``
    so the result lives on a grid of half-width ``pi n |t| / L`` and nothing
    wraps around the box.  Requires the chirp ``exp(i|y|^2/4t)`` to be resolved
    on ``phi``'s support, i.e. ``|t|`` of order ``L / k_max`` or larger.
    """
    if t == 0:
        raise ValueError("far-field representation needs t != 0")
    if pad < 1 or (pad & (pad - 1)):
        raise ValueError("pad must be a power of two")
    g = phi.grid
    n2 = g.n * pad
    padded = np.zeros((n2, n2), dtype=np.complex128)
    off = (n2 - g.n) // 2
    chirp = np.exp(1j * g.radius ** 2 / (4.0 * t))
    padded[off:off + g.n, off:off + g.n] = chirp * phi.samples
    big = Grid2D(n2, g.L * pad)
    G = sfft.fftshift(to_spectral(WaveField(big, padded)).coeffs)
    out = Grid2D(n2, math.pi * g.n * abs(t) / g.L)
    # spectral node m * dk maps to x = 2 t m dk; for t < 0 the axis is reversed
    if t < 0:
        G = np.roll(G[::-1, ::-1], 1, axis=(0, 1))
    r2 = out.radius ** 2
    return WaveField(out, np.exp(1j * r2 / (4.0 * t)) * G / (4j * math.pi * t))


def nonlinear_phase_step(u: WaveField, dt: float, K1: CoefficientField, K2: CoefficientField) -> WaveField:
    """Exact flow of ``i u_t = K1 |u|^2 u + K2 |u|^4 u`` over ``dt`` (real K)."""
    return u.with_samples(_NonlinearPhase(u.grid, K1, K2)(u.samples, dt))


class _NonlinearPhase:
    def __init__(self, grid: Grid2D, K1: CoefficientField, K2: CoefficientField):
        self.k1 = None if K1.is_zero else K1.sample(grid)
        self.k2 = None if K2.is_zero else K2.sample(grid)

    @property
    def trivial(self) -> bool:
        return self.k1 is None and self.k2 is None

    def potential(self, u: np.ndarray) -> np.ndarray:
        a = u.real * u.real + u.imag * u.imag
        p = np.zeros_like(a)
        if self.k1 is not None:
            p += self.k1 * a
        if self.k2 is not None:
            p += self.k2 * (a * a)
        return p

    def __call__(self, u: np.ndarray, dt: float) -> np.ndarray:
        if self.trivial:
            return u.copy()
        ph = dt * self.potential(u)
        return u * (np.cos(ph) - 1j * np.sin(ph))

    def nonlinearity(self, u: np.ndarray) -> np.ndarray:
        if self.trivial:
            return np.zeros_like(u)
        return self.potential(u) * u


@dataclass
class EvolveConfig:
    """Time stepping settings.

    ``blowup_gradient_threshold`` is a multiple of ``||grad phi||_{L^2}``.
    """

    dt: float
    T: float
    K1: CoefficientField = ZERO
    K2: CoefficientField = ZERO
    blowup_gradient_threshold: float = 50.0
    tail_energy_threshold: float = 0.01
    record_stride: int = 10
    check_stride: int = 1
    dealias: bool = False
    keep_fields: bool = True
    track_duhamel: bool = False

    def validate(self) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive, got {self.T}")
        if not self.blowup_gradient_threshold > 0:
            raise ValueError("blowup_gradient_threshold must be positive")
        if not 0 < self.tail_energy_threshold < 1:
            raise ValueError("tail_energy_threshold must lie in (0, 1)")
        if int(self.record_stride) < 1 or int(self.check_stride) < 1:
            raise ValueError("strides must be >= 1")
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            raise ValueError(f"T={self.T} is not an integer multiple of dt={self.dt}")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


def strang_step(u: WaveField, dt: float, cfg: EvolveConfig) -> WaveField:
    """Half free step, full nonlinear phase step, half free step."""
    half = free_symbol(u.grid, 0.5 * dt)
    v = sfft.ifft2(half * sfft.fft2(u.samples))
    v = _NonlinearPhase(u.grid, cfg.K1, cfg.K2)(v, dt)
    what = half * sfft.fft2(v)
    if cfg.dealias:
        what *= u.grid.dealias_mask()
    return u.with_samples(sfft.ifft2(what))


@dataclass(frozen=True)
class Termination:
    kind: str  # completed | blowup_detected | aliasing_detected
    t: float

    def __str__(self):
        return self.kind if self.kind == "completed" else f"{self.kind}({self.t:.6g})"


@dataclass
class Trajectory:
    grid: Grid2D
    times: list[float]
    snapshots: list[WaveField | None]
    termination: Termination
    initial: WaveField
    final: WaveField
    grad_norms: list[float] = field(default_factory=list)
    tail_fractions: list[float] = field(default_factory=list)
    duhamel_integral: np.ndarray | None = None  # sum of exp(i t|k|^2) FFT[N(u)] dt (trapezoid)

    @property
    def completed(self) -> bool:
        return self.termination.kind == "completed"


class _DuhamelAccumulator:
    """Trapezoid rule for ``int exp(-i t' Delta) N(u(t')) dt'`` in FFT layout."""

    def __init__(self, grid: Grid2D, nl: _NonlinearPhase):
        self.grid, self.nl = grid, nl
        self.total = np.zeros((grid.n, grid.n), dtype=np.complex128)
        self.prev: tuple[float, np.ndarray] | None = None

    def add(self, t: float, u: np.ndarray) -> None:
        g = np.exp(1j * t * self.grid.k2) * sfft.fft2(self.nl.nonlinearity(u))
        if self.prev is not None:
            t0, g0 = self.prev
            self.total += 0.5 * (t - t0) * (g0 + g)
        self.prev = (t, g)


def _grad_and_tail(grid: Grid2D, uh: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    p = uh.real ** 2 + uh.imag ** 2
    tot = float(p.sum())
    grad = math.sqrt(float(np.sum(grid.k2 * p)) * grid.cell_area) / grid.n
    tail = float(p[mask].sum()) / tot if tot > 0 else 0.0
    return grad, tail


def evolve(phi: WaveField, cfg: EvolveConfig,
           callback: Callable[[float, WaveField], None] | None = None) -> Trajectory:
    """Iterate Strang steps from ``phi`` up to ``cfg.T`` or early termination.

    Consecutive half free steps are fused, so a step costs two FFTs.
    ``callback(t, u)`` fires at every recorded time (including ``t = 0`` and
    the terminal state).
    """
    cfg.validate()
    if not phi.is_finite():
        raise ValueError("initial data is not finite")
    g = phi.grid
    dt = cfg.dt
    nsteps = cfg.n_steps
    half = free_symbol(g, 0.5 * dt)
    nl = _NonlinearPhase(g, cfg.K1, cfg.K2)
    mask = g.top_octave_mask()
    dmask = g.dealias_mask() if cfg.dealias else None

    uh = sfft.fft2(phi.samples)
    grad0, tail0 = _grad_and_tail(g, uh, mask)
    grad_limit = cfg.blowup_gradient_threshold * max(grad0, np.finfo(float).tiny)
    acc = _DuhamelAccumulator(g, nl) if cfg.track_duhamel else None

    times, snaps, grads, tails = [], [], [], []

    def record(t: float, u: np.ndarray, gr: float, tl: float) -> WaveField:
        w = WaveField(g, u)
        times.append(t)
        snaps.append(w if cfg.keep_fields else None)
        grads.append(gr)
        tails.append(tl)
        if acc is not None:
            acc.add(t, u)
        if callback is not None:
            callback(t, w)
        return w

    last = record(0.0, phi.samples.copy(), grad0, tail0)
    termination = Termination("completed", cfg.T)
    v = half * uh
    for step in range(1, nsteps + 1):
        w = nl(sfft.ifft2(v), dt)
        uh = half * sfft.fft2(w)
        if dmask is not None:
            uh *= dmask
        t = step * dt
        final_step = step == nsteps
        want_record = final_step or step % cfg.record_stride == 0
        if want_record or step % cfg.check_stride == 0:
            gr, tl = _grad_and_tail(g, uh, mask)
            kind = None
            if not math.isfinite(gr) or gr > grad_limit:
                kind = "blowup_detected"
            elif tl > cfg.tail_energy_threshold:
                kind = "aliasing_detected"
            if kind is not None:
                u = sfft.ifft2(uh)
                termination = Termination(kind, t)
                last = WaveField(g, u, failed=True)
                times.append(t)
                snaps.append(last if cfg.keep_fields else None)
                grads.append(gr)
                tails.append(tl)
                break
            if want_record:
                last = record(t, sfft.ifft2(uh), gr, tl)
        v = half * uh
    return Trajectory(g, times, snaps, termination, phi, last, grads, tails,
                      acc.total if acc is not None else None)


def duhamel_rhs(phi: WaveField, T: float, integral_hat: np.ndarray) -> WaveField:
    """``exp(iT Delta) phi - i int_0^T exp(i(T - t')Delta) N dt'`` from an accumulated integral."""
    g = phi.grid
    return phi.with_samples(sfft.ifft2(free_symbol(g, T) * (sfft.fft2(phi.samples) - 1j * integral_hat)))


def duhamel_residual(traj: Trajectory, cfg: EvolveConfig) -> float:
    """Relative ``L^2`` mismatch between ``u(T)`` and the Duhamel formula."""
    if not traj.completed:
        raise ValueError(f"trajectory terminated early: {traj.termination}")
    g = traj.grid
    if traj.duhamel_integral is not None:
        integral = traj.duhamel_integral
    else:
        if any(s is None for s in traj.snapshots):
            raise ValueError("snapshots were not kept; rerun with keep_fields or track_duhamel")
        acc = _DuhamelAccumulator(g, _NonlinearPhase(g, cfg.K1, cfg.K2))
        for t, s in zip(traj.times, traj.snapshots):
            acc.add(t, s.samples)
        integral = acc.total
    T = traj.times[-1]
    rhs = duhamel_rhs(traj.initial, T, integral)
    uT = traj.final.samples
    return float(np.linalg.norm(uT - rhs.samples) / np.linalg.norm(uT))
