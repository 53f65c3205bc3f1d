import math

import numpy as np
import pytest

import oracles
from icqnls.diagnostics import (DiagnosticsRecord, StrichartzPair, besov_angular_norm,
                                boundary_mass_fraction, diagnostics_record, dilation_A, energy,
                                galilean_J, galilean_J_norm_sq, grad_norm_sq, h_theta_norm, mass,
                                mixed_norm, potential_V, scattering_correlation_H, variance, virial_rhs)
from icqnls.evolve import free_propagate
from icqnls.fields import ZERO, power_law_field
from icqnls.grid import PolarGrid, WaveField, littlewood_paley, make_grid, sobolev_norm

ONE = power_law_field(0.0)
MINUS_ONE = power_law_field(0.0, 1.0, -1)


@pytest.fixture(scope="module")
def zero256(grid256):
    return WaveField(grid256, np.zeros((256, 256), complex))


def test_mass_values(gaussian256, zero256):
    assert mass(gaussian256) == pytest.approx(math.pi, abs=1e-8)
    assert mass(gaussian256 * 2) == pytest.approx(4 * math.pi, abs=1e-8)
    assert mass(zero256) == 0.0


def test_energy_unit_coefficients(gaussian256):
    assert energy(gaussian256, ONE, ONE) == pytest.approx(49 * math.pi / 72, rel=1e-9)
    assert energy(gaussian256, ONE, ONE) == pytest.approx(oracles.gaussian_energy(1.0, 1.0, 1.0), rel=1e-9)


def test_energy_focusing(gaussian256):
    assert energy(gaussian256 * 2, MINUS_ONE, MINUS_ONE) == pytest.approx(-32 * math.pi / 9, rel=1e-9)


def test_energy_free_is_half_gradient(gaussian256):
    assert energy(gaussian256, ZERO, ZERO) == pytest.approx(0.5 * grad_norm_sq(gaussian256), rel=1e-14)


def test_dilation_real_field(gaussian256):
    assert abs(dilation_A(gaussian256)) < 1e-10


@pytest.mark.parametrize("c", [0.25, -0.1])
def test_dilation_chirped(grid256, c):
    x1, x2 = grid256.coords
    r2 = x1 ** 2 + x2 ** 2
    u = WaveField(grid256, np.exp(-r2 / 2 - 1j * c * r2))
    assert dilation_A(u) == pytest.approx(oracles.chirped_gaussian_dilation(c), rel=1e-8)


def test_dilation_angular_phase(grid256):
    x1, x2 = grid256.coords
    u = WaveField(grid256, (x1 + 1j * x2) * np.exp(-(x1 ** 2 + x2 ** 2) / 2))
    assert abs(dilation_A(u)) < 1e-10


def test_variance_values(gaussian256, zero256):
    assert variance(gaussian256) == pytest.approx(math.pi, rel=1e-9)
    assert variance(zero256) == 0.0


def test_variance_free_evolution(grid256):
    g = make_grid(256, 16.0)
    x1, x2 = g.coords
    u = free_propagate(WaveField(g, np.exp(-(x1 ** 2 + x2 ** 2) / 2) + 0j), 1.0)
    assert variance(u) == pytest.approx(5 * math.pi, rel=5e-3)


def test_potential_values(gaussian256, zero256):
    assert potential_V(gaussian256, ONE, ONE) == pytest.approx(math.pi / 8 + math.pi / 18, rel=1e-9)
    assert potential_V(zero256, ONE, ONE) == 0.0


def test_potential_homogeneity(gaussian256):
    K1, K2 = power_law_field(0.25), power_law_field(1.0)
    q1, s1 = potential_V(gaussian256, K1, ZERO), potential_V(gaussian256, ZERO, K2)
    assert potential_V(gaussian256 * 2, K1, ZERO) == pytest.approx(16 * q1, rel=1e-12)
    assert potential_V(gaussian256 * 2, ZERO, K2) == pytest.approx(64 * s1, rel=1e-12)


def test_potential_weighted_quadrature():
    # the cusp of |x|^b at the origin limits the grid rule to a low algebraic order
    K1, K2 = power_law_field(1.0), power_law_field(0.5)
    exact = oracles.gaussian_power_integral(4, weight_b=1.0) / 4 + oracles.gaussian_power_integral(6, weight_b=0.5) / 6
    errs = []
    for n in (256, 512):
        g = make_grid(n, 12.0)
        x1, x2 = g.coords
        errs.append(abs(potential_V(WaveField(g, np.exp(-(x1 ** 2 + x2 ** 2) / 2) + 0j), K1, K2) - exact) / exact)
    assert errs[0] < 2e-3
    assert errs[1] < errs[0] / 4


def test_h_theta_radial_equals_h1(gaussian256):
    assert h_theta_norm(gaussian256) == pytest.approx(sobolev_norm(gaussian256, 1), rel=1e-8)
    assert h_theta_norm(gaussian256) == pytest.approx(oracles.gaussian_h1_norm(), rel=1e-8)


def test_h_theta_angular_mode(grid256):
    x1, x2 = grid256.coords
    r = np.hypot(x1, x2)
    f = WaveField(grid256, (x1 + 1j * x2) / np.maximum(r, 1e-300) * r * np.exp(-r ** 2 / 2))
    assert h_theta_norm(f) == pytest.approx(2 * sobolev_norm(f, 1), rel=1e-8)


def test_h_theta_zero_and_order(zero256, gaussian256):
    assert h_theta_norm(zero256) == 0.0
    with pytest.raises(ValueError):
        h_theta_norm(gaussian256, 3)


def test_boundary_fraction(gaussian256, zero256):
    assert boundary_mass_fraction(gaussian256) < 1e-30
    assert boundary_mass_fraction(zero256) == 0.0


def test_mixed_norm_l2(gaussian256):
    pg = PolarGrid(192, 11.0)
    assert mixed_norm(gaussian256, pg, 2, 2) == pytest.approx(math.sqrt(math.pi), rel=1e-4)


def test_mixed_norm_radial_reduction(gaussian256):
    pg = PolarGrid(192, 11.0)
    radial4 = oracles.radial_integral(lambda r: np.exp(-2 * r ** 2) / (2 * np.pi)) ** 0.25
    for q in (2.0, 3.0, 4.0):
        assert mixed_norm(gaussian256, pg, 4, q) == pytest.approx((2 * math.pi) ** (1 / q) * radial4, rel=1e-6)


def test_mixed_norm_sup_angle(grid256):
    x1, x2 = grid256.coords
    f = WaveField(grid256, (x1 + 1j * x2) * np.exp(-(x1 ** 2 + x2 ** 2) / 2))
    pg = PolarGrid(192, 11.0)
    exact = oracles.radial_integral(lambda r: r ** 2 * np.exp(-r ** 2) / (2 * np.pi)) ** 0.5
    assert mixed_norm(f, pg, 2, math.inf) == pytest.approx(exact, rel=1e-5)


def test_besov_single_band(grid256):
    f = littlewood_paley(WaveField(grid256, np.exp(-np.add(*[c ** 2 for c in grid256.coords]) / 8) + 0j), 2)
    pg = PolarGrid(160, 11.0)
    val, terms = besov_angular_norm(f, pg, 2.0, 0.5, return_terms=True)
    assert val > 0
    assert set(k for k, v in terms.items() if v > 1e-6 * val ** 2) <= {1, 2, 4}


def test_besov_l2_equivalence(gaussian256, zero256):
    pg = PolarGrid(160, 11.0)
    ratio = besov_angular_norm(gaussian256, pg, 2.0, 0.0) / math.sqrt(mass(gaussian256))
    assert 0.5 <= ratio <= 1.0 + 1e-6
    assert besov_angular_norm(zero256, pg, 2.0, 0.0) == 0.0


def test_galilean_time_zero(gaussian256):
    j1, j2 = galilean_J(gaussian256, 0.0)
    x1, x2 = gaussian256.grid.coords
    np.testing.assert_allclose(j1.samples, x1 * gaussian256.samples)
    np.testing.assert_allclose(j2.samples, x2 * gaussian256.samples)


def test_galilean_norm_free_flow_constant():
    g = make_grid(256, 16.0)
    x1, x2 = g.coords
    phi = WaveField(g, np.exp(-(x1 ** 2 + x2 ** 2) / 2) + 0j)
    base = galilean_J_norm_sq(phi, 0.0)
    for t in (0.5, 1.0):
        assert galilean_J_norm_sq(free_propagate(phi, t), t) == pytest.approx(base, rel=1e-6)


def test_galilean_real_gaussian(gaussian256):
    assert galilean_J_norm_sq(gaussian256, 1.0) == pytest.approx(5 * math.pi, rel=1e-9)


def test_correlation_H(gaussian256):
    up = free_propagate(gaussian256 * (1 + 0.5j), 0.3)
    assert scattering_correlation_H(up, up) == pytest.approx(0.0, abs=1e-14)
    # -Im <i u+, u+> = -m(u+)
    assert scattering_correlation_H(up * 1j, up) == pytest.approx(-mass(up), rel=1e-12)
    v = free_propagate(gaussian256 * 0.7j, 0.1)
    assert abs(scattering_correlation_H(v, up)) <= math.sqrt(mass(v) * mass(up))


def test_correlation_grid_mismatch(gaussian256, grid128):
    with pytest.raises(ValueError):
        scattering_correlation_H(gaussian256, WaveField(grid128, np.zeros((128, 128), complex)))


def test_virial_rhs_free(gaussian256):
    assert virial_rhs(gaussian256, ZERO, ZERO) == pytest.approx(2 * grad_norm_sq(gaussian256), rel=1e-14)


def test_virial_rhs_constant_focusing(gaussian256):
    u = gaussian256 * 2
    sextic = float(u.grid.integrate(np.abs(u.samples) ** 6))
    expect = 4 * energy(u, MINUS_ONE, MINUS_ONE) - 2 * sextic / 3
    assert virial_rhs(u, MINUS_ONE, MINUS_ONE) == pytest.approx(expect, rel=1e-12)


def test_virial_rhs_power_laws(gaussian256):
    b1, b2 = 0.25, 1.0
    K1, K2 = power_law_field(b1), power_law_field(b2)
    g = gaussian256.grid
    a = np.abs(gaussian256.samples) ** 2
    r = g.radius
    expect = (4 * energy(gaussian256, K1, K2) - b1 / 2 * float(g.integrate(r ** b1 * a ** 2))
              + (2 - b2) / 3 * float(g.integrate(r ** b2 * a ** 3)))
    assert virial_rhs(gaussian256, K1, K2) == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("q,r,adm", [(math.inf, 2, True), (4, 4, True), (2, math.inf, False), (3, 3, False)])
def test_strichartz_admissible(q, r, adm):
    assert StrichartzPair(q, r).is_admissible() is adm


@pytest.mark.parametrize("q,r,inside", [(math.inf, 2, True), (2, 8, True), (4, 8, False), (100, 8, False),
                                        (4, math.inf, False)])
def test_extended_pair_set(q, r, inside):
    assert StrichartzPair(q, r).in_extended_set() is inside


def test_record_fields(gaussian256):
    rec = diagnostics_record(gaussian256, 0.0, ONE, ONE)
    assert isinstance(rec, DiagnosticsRecord)
    assert rec.columns()[0] == "t"
    assert rec.mass == pytest.approx(math.pi)
    assert rec.energy == pytest.approx(49 * math.pi / 72)
    assert len(rec.values()) == len(rec.columns())
