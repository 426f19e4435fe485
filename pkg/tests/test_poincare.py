import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpgeom.errors import DomainError
from wpgeom.poincare import (
    PoincareChart, annulus_chart, hessian_bound_probe, local_poincare, modular_chart,
    modular_outer_radius, phi_eps, phi_eps_jet, phi_profile, poincare_diagonal, poincare_volume,
    profile_bound, rho_eps, rho_hessian,
)


def test_chart_validation():
    with pytest.raises(ValueError):
        PoincareChart(dim=1, puncture_count=1, outer_radius=(1.0,))
    with pytest.raises(ValueError):
        PoincareChart(dim=2, puncture_count=1, outer_radius=(0.5,))
    with pytest.raises(ValueError):
        annulus_chart(0.3, 0.2)


def test_modular_profile():
    assert modular_outer_radius(0.0) == pytest.approx(math.exp(-2 * math.pi))
    assert modular_outer_radius(math.pi) == pytest.approx(math.exp(-math.pi * math.sqrt(3)))
    chart = modular_chart()
    th = np.linspace(-math.pi, math.pi, 101)
    assert np.all(chart.outer_at(0, th) <= chart.outer_radius[0] + 1e-15)


def test_local_metric():
    chart = PoincareChart(dim=2, puncture_count=1, outer_radius=(0.5, 1.0))
    r = 0.1
    g = local_poincare(chart, (r, 0.3))
    assert g.matrix[0, 0].real == pytest.approx(1 / (r * r * math.log(1 / r) ** 2))
    assert g.matrix[1, 1].real == 1
    with pytest.raises(DomainError):
        poincare_diagonal(chart, [[0.0, 0.1]])


def test_reference_values():
    chart = annulus_chart(1e-300, 0.5)
    g = local_poincare(chart, (math.exp(-10),)).matrix[0, 0].real
    assert g == pytest.approx(math.exp(20) / 100, rel=1e-12)
    # {r <= e^{-a}} has Poincare area 2 pi / a
    assert poincare_volume(0.0, 1 / 10) == pytest.approx(math.pi / 5)
    assert phi_eps(math.exp(-20), 0.1) == 1.0
    assert phi_eps(math.exp(-4), 0.1) == 0.0
    half = phi_profile(0.5)[0]
    assert phi_eps(math.exp(-1 / 0.15), 0.1) == pytest.approx(half)
    two = PoincareChart(dim=2, puncture_count=2, outer_radius=(0.5, 0.5))
    z = math.exp(-1 / 0.15)
    assert rho_eps(two, (z, z), 0.1) == pytest.approx((1 - half) ** 2)
    assert rho_eps(chart, (math.exp(-1),), 0.1) == 1.0
    assert rho_eps(chart, (math.exp(-100),), 0.1) == 0.0


def test_rho_monotone_and_bounded():
    chart = PoincareChart(dim=2, puncture_count=2, outer_radius=(0.5, 0.5))
    rng = np.random.default_rng(1)
    s = rng.uniform(0.01, 0.6, size=(500, 2))
    Z = np.exp(-1 / s) * np.exp(1j * rng.uniform(-3, 3, size=(500, 2)))
    for eps in (0.2, 0.1, 0.05):
        a, b = rho_eps(chart, Z, eps), rho_eps(chart, Z, eps / 2)
        assert np.all((0 <= a) & (a <= 1)) and np.all(b >= a)
        assert np.all(a[np.any(s <= eps, axis=1)] == 0)
        assert np.all(a[np.all(s >= 2 * eps, axis=1)] == 1)


def test_volume_in_s():
    # area integral of 1/(r^2 log^2) over e^{-1/a} <= r <= e^{-1/b} is 2 pi (b - a)
    a, b = 0.1, 0.3
    u = np.linspace(1 / b, 1 / a, 200001)
    # r dr = e^{-2u} du, integrand 1/(e^{-2u} u^2) -> 2 pi \int du/u^2
    numeric = 2 * math.pi * np.trapezoid(1 / u ** 2, u)
    assert poincare_volume(a, b) == pytest.approx(numeric, rel=1e-8)
    assert poincare_volume(b, a) == 0


def test_profile_endpoints():
    v, d1, d2 = phi_profile(np.array([0.0, 1.0, -0.5, 1.5]))
    assert list(v) == [1.0, 0.0, 1.0, 0.0]
    assert np.all(d1 == 0) and np.all(d2 == 0)
    # max |phi'| = 15/8 at t = 1/2 and max |phi''| = 10/sqrt(3) at t = (3 -+ sqrt 3)/6
    assert 10 / math.sqrt(3) < profile_bound() <= 15 / 8 + 10 / math.sqrt(3)
    t = np.linspace(0, 1, 1001)
    assert np.all(np.diff(phi_profile(t)[0]) <= 0)


def test_phi_eps_regions():
    eps = 0.1
    assert phi_eps(math.exp(-1 / eps) * 0.5, eps) == 1.0
    assert phi_eps(math.exp(-1 / (2 * eps)) * 1.01, eps) == 0.0
    assert 0 < phi_eps(math.exp(-1 / (1.5 * eps)), eps) < 1
    assert rho_eps(annulus_chart(1e-300, 0.5), (0.4,), eps) == 1.0


@settings(max_examples=40, deadline=None)
@given(s_frac=st.floats(0.05, 0.95), theta=st.floats(-3.0, 3.0))
def test_jet_against_finite_differences(s_frac, theta):
    eps = 0.1
    s = eps * (1 + s_frac)
    z = math.exp(-1 / s) * complex(math.cos(theta), math.sin(theta))
    _, dz, ddb = phi_eps_jet(z, eps)
    r, u = abs(z), 1 / s
    h = r * 1e-3
    scale = 1 / (eps * r * r * u ** 3)
    fx = (phi_eps(z + h, eps) - phi_eps(z - h, eps)) / (2 * h)
    fy = (phi_eps(z + 1j * h, eps) - phi_eps(z - 1j * h, eps)) / (2 * h)
    assert complex(dz) == pytest.approx(0.5 * (fx - 1j * fy), rel=1e-4, abs=1e-6 / (eps * r * u * u))
    lap = (phi_eps(z + h, eps) + phi_eps(z - h, eps) + phi_eps(z + 1j * h, eps) + phi_eps(z - 1j * h, eps)
           - 4 * phi_eps(z, eps)) / (h * h)
    assert float(ddb) == pytest.approx(lap / 4, rel=1e-4, abs=1e-5 * scale)


def test_rho_hessian_hermitian_two_punctures():
    chart = PoincareChart(dim=2, puncture_count=2, outer_radius=(0.5, 0.5))
    rng = np.random.default_rng(0)
    eps = 0.1
    s = eps * (1 + rng.uniform(size=(10, 2)))
    Z = np.exp(-1 / s) * np.exp(1j * rng.uniform(-3, 3, size=(10, 2)))
    H = rho_hessian(chart, Z, eps)
    assert np.allclose(H, np.conj(np.swapaxes(H, 1, 2)))


@pytest.mark.parametrize("chart", [annulus_chart(1e-300, 0.5),
                                   PoincareChart(dim=2, puncture_count=2, outer_radius=(0.5, 0.5))])
def test_hessian_bounds_uniform(chart):
    rep = hessian_bound_probe(chart, [0.2, 0.1, 0.05], sample_count=1000)
    assert rep.uniform and rep.spread < 0.2
    assert rep.gradient_ok
