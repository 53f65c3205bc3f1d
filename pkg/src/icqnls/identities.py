"""Exact identities of the scheme and the flow, packaged as reusable checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import dilation_A, diagnostics_record, virial_rhs
from .evolve import EvolveConfig, evolve
from .fields import power_law_field
from .grid import WaveField, make_grid, spectral_norm, l2_norm, to_spectral
from .inequalities import TestFunctionFamily, commutator_norms


@dataclass
class IdentityCheck:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)


def virial_mismatch(times, A, rhs) -> np.ndarray:
    """Relative error of the centered ``dA/dt`` against the virial right side at interior times."""
    t = np.asarray(times, dtype=float)
    A = np.asarray(A, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    dA = (A[2:] - A[:-2]) / (t[2:] - t[:-2])
    scale = np.maximum(np.abs(rhs[1:-1]), 1e-3 * float(np.max(np.abs(rhs))))
    return np.abs(dA - rhs[1:-1]) / scale


def dilation_mismatch(times, variance, A) -> float:
    """``|var(T) - var(0) - 4 int A| / |var(T) - var(0)|`` with the integral by Simpson (trapezoid if even)."""
    t = np.asarray(times, dtype=float)
    A = np.asarray(A, dtype=float)
    dv = float(variance[-1] - variance[0])
    h = np.diff(t)
    if len(t) % 2 == 1 and np.allclose(h, h[0]):
        integral = h[0] / 3.0 * (A[0] + A[-1] + 4 * A[1:-1:2].sum() + 2 * A[2:-1:2].sum())
    else:
        integral = float(np.sum(0.5 * h * (A[1:] + A[:-1])))
    return abs(dv - 4.0 * integral) / max(abs(dv), np.finfo(float).tiny)


def smooth_defocusing_run(n: int = 256, L: float = 12.0, dt: float = 1e-3, T: float = 1.0,
                          amplitude: float = 1.0, stride: int = 10):
    """Gaussian data under ``K1 = |x|^0.25``, ``K2 = |x|``; returns (times, records, virial rhs)."""
    g = make_grid(n, L)
    K1 = power_law_field(0.25, 1.0, 1, 0.9 * L)
    K2 = power_law_field(1.0, 1.0, 1, 0.9 * L)
    x1, x2 = g.coords
    phi = WaveField(g, amplitude * np.exp(-(x1 ** 2 + x2 ** 2) / 2))
    recs, rhs = [], []

    def cb(t, u):
        recs.append(diagnostics_record(u, t, K1, K2))
        rhs.append(virial_rhs(u, K1, K2))

    cfg = EvolveConfig(dt=dt, T=T, K1=K1, K2=K2, record_stride=stride, keep_fields=False)
    traj = evolve(phi, cfg, cb)
    return traj, recs, rhs


def identity_suite(n: int = 128, seed: int = 0) -> list[IdentityCheck]:
    """Parseval, angular commutation and virial/dilation on a short run."""
    out = []
    g = make_grid(n, 16.0)
    fam = TestFunctionFamily("bumps", seed=seed, count=8)
    worst = 0.0
    for f in fam.samples(g):
        worst = max(worst, abs(spectral_norm(to_spectral(f)) - l2_norm(f)) / l2_norm(f))
    out.append(IdentityCheck("parseval", worst, 1e-12))
    band = TestFunctionFamily("bandlimited", seed=seed, count=4, width=(1.2, 1.6), center_radius=3.0)
    gb = make_grid(512, 20.0)
    for s in (1.0 / 3.0, 0.5, 1.0):
        w = max(max(commutator_norms(f, s)) for f in band.samples(gb))
        out.append(IdentityCheck(f"commutation_s={s:.3g}", w, 1e-8))
    traj, recs, rhs = smooth_defocusing_run(n=max(n, 128), L=12.0, dt=1e-3, T=0.2)
    t = [r.t for r in recs]
    out.append(IdentityCheck("virial", float(virial_mismatch(t, [r.dilation_A for r in recs], rhs).max()), 1e-2))
    out.append(IdentityCheck("dilation", dilation_mismatch(t, [r.variance for r in recs],
                                                           [r.dilation_A for r in recs]), 1e-3))
    return out
