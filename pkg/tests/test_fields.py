import math

import numpy as np
import pytest

from icqnls.fields import (ZERO, growth_condition_check, power_law_field, radial_gradient_dot,
                           rigidity_check)
from icqnls.grid import make_grid


def test_constant_field():
    K = power_law_field(0.0)
    assert np.all(K(np.array([0.0, 3.0, 100.0]), np.zeros(3)) == 1.0)


def test_quarter_power_value():
    K = power_law_field(0.25)
    assert K(2.0, 0.0) == pytest.approx(2 ** 0.25, rel=1e-15)


def test_cap_rule():
    K = power_law_field(1.0, 1.0, -1, 10.0)
    assert K(12.0, 0.0) == pytest.approx(-10.0)
    assert K(3.0, 4.0) == pytest.approx(-5.0)


@pytest.mark.parametrize("b,kappa,sign", [(-0.5, 1.0, 1), (1.0, 0.0, 1), (1.0, 1.0, 2)])
def test_power_law_rejects(b, kappa, sign):
    with pytest.raises(ValueError):
        power_law_field(b, kappa, sign)


def test_radial_gradient_dot_values():
    g = make_grid(64, 20.0)
    assert np.all(radial_gradient_dot(power_law_field(0.0), g).samples == 0)
    K = power_law_field(1.0, 2.0, -1, 10.0)
    assert float(K.radial_dot(3.0)) == pytest.approx(-6.0)
    assert float(K.radial_dot(11.0)) == 0.0
    Kq = power_law_field(0.25, 1.0, 1)
    assert float(Kq.radial_dot(16.0)) == pytest.approx(0.5)


def test_radial_dot_matches_finite_difference():
    K = power_law_field(0.7, 1.3, 1, 8.0)
    r = np.linspace(0.5, 7.5, 50)
    eps = 1e-6
    fd = r * (K.radial(r + eps) - K.radial(r - eps)) / (2 * eps)
    np.testing.assert_allclose(K.radial_dot(r), fd, rtol=1e-7)


def test_rigidity_focusing_constants():
    K = power_law_field(0.0, 1.0, -1)
    rep = rigidity_check(K, K, 0.0)
    assert rep.ok


def test_rigidity_defocusing_power_laws():
    rep = rigidity_check(power_law_field(0.25), power_law_field(1.0), 1.0)
    assert rep.ok


def test_rigidity_fails_for_half_power_quintic():
    rep = rigidity_check(power_law_field(0.25), power_law_field(0.5), 1.0)
    assert not rep.passed["K2"]
    r, margin = rep.witness["K2"]
    assert margin < 0


def test_rigidity_capped_needs_alpha_two():
    # past the cap 2K2 - x.grad K2 = 2K2, so the quintic condition needs alpha >= 2
    g = make_grid(128, 12.0)
    K1, K2 = power_law_field(0.25, cap_radius=10.0), power_law_field(1.0, cap_radius=10.0)
    assert not rigidity_check(K1, K2, 1.0, grid=g).ok
    assert rigidity_check(K1, K2, 2.0, grid=g).ok


def test_rigidity_rejects_negative_alpha():
    with pytest.raises(ValueError):
        rigidity_check(ZERO, ZERO, -1.0)


@pytest.mark.parametrize("b", [0.25, 1.0, 1.5])
def test_growth_constants_pure_power(b):
    rep = growth_condition_check(power_law_field(b))
    c0, c1, c2 = rep.constants
    assert c0 == pytest.approx(1.0)
    assert c1 == pytest.approx(b)
    assert c2 == pytest.approx(abs(b * (b - 1)))
    assert not rep.cap_kink


def test_growth_constants_constant_field():
    assert growth_condition_check(power_law_field(0.0)).constants == pytest.approx((1.0, 0.0, 0.0))


def test_growth_capped_reports_kink():
    g = make_grid(128, 12.0)
    rep = growth_condition_check(power_law_field(1.0, cap_radius=10.0), g)
    assert rep.finite
    assert rep.cap_kink and rep.notes


def test_zero_field():
    g = make_grid(32, 4.0)
    assert ZERO.is_zero
    assert ZERO.amplitude == 0.0
    assert np.all(ZERO.sample(g) == 0)
    assert math.isinf(ZERO.cap_radius)
