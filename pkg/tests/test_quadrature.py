import csv
import math

import numpy as np
import pytest

from wpgeom import corpus
from wpgeom.errors import DomainError
from wpgeom.poincare import PoincareChart, annulus_chart, modular_chart
from wpgeom.quadrature import (
    MIN_EPS, build_cells, eps_limit, form_density, integrate_form, log_integrability_probe,
    mixed_coefficient, stokes_volume_1d, write_cells_csv,
)

ANNULUS = (math.exp(-2), math.exp(-1))


@pytest.fixture(scope="module")
def annulus():
    return annulus_chart(*ANNULUS)


@pytest.fixture(scope="module")
def modular_series():
    m = corpus.elliptic_model()
    return [integrate_form(m, modular_chart(), 0, 1, eps=e, level=2) for e in (0.1, 0.05, 0.025)]


class TestMixedCoefficient:
    def test_determinant_limits(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(3, 3, 3)) + 1j * rng.normal(size=(3, 3, 3))
        B = rng.normal(size=(3, 3, 3)) + 1j * rng.normal(size=(3, 3, 3))
        A, B = A + np.conj(A.transpose(0, 2, 1)), B + np.conj(B.transpose(0, 2, 1))  # Hermitian
        assert np.allclose(mixed_coefficient(A, B, 0), np.linalg.det(B))
        assert np.allclose(mixed_coefficient(A, B, 3), np.linalg.det(A))

    def test_two_by_two(self):
        A = np.array([[[1, 2j], [-2j, 4]]], dtype=complex)
        B = np.array([[[5, 1 + 1j], [1 - 1j, 8]]], dtype=complex)
        # [s] det(sA + B) = a11 b22 + a22 b11 - a12 b21 - a21 b12, divided by C(2,1) = 2
        expected = (1 * 8 + 4 * 5 - 2j * (1 - 1j) - (-2j) * (1 + 1j)).real / 2
        assert mixed_coefficient(A, B, 1)[0] == pytest.approx(expected)


class TestAnnulus:
    def test_volume_is_quarter(self, elliptic, annulus):
        for level in (1, 2, 3):
            est = integrate_form(elliptic, annulus, 0, 1, level=level)
            assert est.contains(0.25)
            assert abs(est.value - 0.25) < 1e-10
        assert est.error_bracket < 1e-6

    def test_ricci_is_minus_twice(self, elliptic, annulus):
        est = integrate_form(elliptic, annulus, 1, 0, level=2)
        assert abs(est.value + 0.5) <= est.error_bracket + 1e-12

    def test_stokes_oracle(self, elliptic, constant):
        assert stokes_volume_1d(elliptic, *ANNULUS) == pytest.approx(0.25, abs=1e-10)
        assert stokes_volume_1d(constant, *ANNULUS) == pytest.approx(0, abs=1e-14)

    @pytest.mark.parametrize("a, b", [(1e-6, 1e-3), (1e-3, 0.2), (0.05, 0.4)])
    def test_oracle_agreement(self, elliptic, a, b):
        est = integrate_form(elliptic, annulus_chart(a, b), 0, 1, level=2)
        assert abs(est.value - stokes_volume_1d(elliptic, a, b)) <= est.error_bracket

    def test_weight3_oracle(self, weight3):
        a, b = 1e-4, 0.04
        est = integrate_form(weight3, annulus_chart(a, b), 0, 1, level=3)
        assert abs(est.value - stokes_volume_1d(weight3, a, b)) <= est.error_bracket

    def test_constant_model_vanishes(self, constant, annulus):
        est = integrate_form(constant, annulus, 0, 1, level=1)
        assert est.value == 0.0

    def test_additivity(self, weight3):
        a, c, b = 1e-4, 3e-3, 0.04
        whole = integrate_form(weight3, annulus_chart(a, b), 0, 1, level=2)
        left = integrate_form(weight3, annulus_chart(a, c), 0, 1, level=2)
        right = integrate_form(weight3, annulus_chart(c, b), 0, 1, level=2)
        tol = whole.error_bracket + left.error_bracket + right.error_bracket
        assert abs(whole.value - left.value - right.value) <= tol


class TestBrackets:
    @pytest.mark.parametrize("name, chart, kl", [
        ("elliptic", annulus_chart(1e-5, 0.3), (0, 1)),
        ("elliptic", annulus_chart(1e-5, 0.3), (1, 0)),
        ("weight3", annulus_chart(1e-5, 0.04), (0, 1)),
        ("weight3", annulus_chart(1e-5, 0.04), (1, 0)),
        ("product", PoincareChart(dim=2, puncture_count=2, outer_radius=(0.3, 0.3), inner_radius=(1e-4, 1e-4)), (0, 2)),
        ("product", PoincareChart(dim=2, puncture_count=2, outer_radius=(0.3, 0.3), inner_radius=(1e-4, 1e-4)), (1, 1)),
    ])
    def test_refined_within_coarse_bracket(self, name, chart, kl):
        m = corpus.BUILTIN[name]()
        coarse = integrate_form(m, chart, *kl, level=1)
        fine = integrate_form(m, chart, *kl, level=2)
        assert abs(fine.value - coarse.value) <= coarse.error_bracket

    def test_product_factorizes(self):
        # omega^2 on a product of two elliptic factors is twice the product of their volumes
        m = corpus.product_model()
        a, b = 1e-4, 0.3
        chart = PoincareChart(dim=2, puncture_count=2, outer_radius=(b, b), inner_radius=(a, a))
        est = integrate_form(m, chart, 0, 2, level=2)
        v1 = stokes_volume_1d(corpus.elliptic_model(), a, b)
        assert abs(est.value - 2 * v1 * v1) <= est.error_bracket + 1e-12


class TestCutoff:
    def test_monotone_in_eps(self, modular_series):
        vals = [e.value for e in modular_series]
        assert vals[0] <= vals[1] <= vals[2]

    def test_weight3_monotone(self, weight3):
        chart = annulus_chart(1e-300, 0.04)
        vals = [integrate_form(weight3, chart, 0, 1, eps=e, level=2).value for e in (0.1, 0.05, 0.025)]
        assert vals[0] <= vals[1] <= vals[2]

    def test_limit_near_twelfth(self, modular_series):
        lim = eps_limit(modular_series)
        assert lim.extrapolated and lim.cauchy
        assert abs(lim.limit - 1 / 12) <= lim.uncertainty
        assert abs(lim.limit - 1 / 12) < 1e-3

    def test_small_eps_rejected(self, elliptic):
        with pytest.raises(DomainError):
            integrate_form(elliptic, modular_chart(), 0, 1, eps=MIN_EPS / 2)

    def test_missing_cutoff_rejected(self, elliptic):
        with pytest.raises(ValueError):
            integrate_form(elliptic, modular_chart(), 0, 1)

    def test_bad_k_l(self, elliptic, annulus):
        with pytest.raises(ValueError):
            integrate_form(elliptic, annulus, 1, 1)

    def test_outside_radius(self, weight3):
        with pytest.raises(DomainError):
            integrate_form(weight3, annulus_chart(1e-3, 0.2), 0, 1)


class TestEpsLimit:
    def test_constant(self):
        lim = eps_limit([(0.1, 2.0), (0.05, 2.0), (0.025, 2.0)])
        assert lim.limit == 2.0 and lim.uncertainty == 0.0

    def test_linear(self):
        lim = eps_limit([(e, 1 + e) for e in (0.1, 0.05, 0.025)])
        assert abs(lim.limit - 1) <= lim.uncertainty + 1e-15

    def test_quadratic_covered(self):
        lim = eps_limit([(e, 1 + e + 3 * e * e) for e in (0.1, 0.05, 0.025)])
        assert abs(lim.limit - 1) <= lim.uncertainty + 1e-12  # the quadratic fit is exact here

    def test_non_cauchy_flagged(self):
        lim = eps_limit([(0.1, 1.0), (0.05, 1.1), (0.025, 1.5)])
        assert not lim.cauchy and not lim.extrapolated
        assert lim.limit == 1.5

    def test_requires_geometric(self):
        with pytest.raises(ValueError):
            eps_limit([(0.1, 1), (0.05, 1), (0.01, 1)])
        with pytest.raises(ValueError):
            eps_limit([(0.1, 1), (0.05, 1)])


class TestDeterminism:
    def test_thread_counts_agree(self, weight3):
        chart = annulus_chart(1e-300, 0.04)
        a = integrate_form(weight3, chart, 0, 1, eps=0.05, level=2, threads=1)
        b = integrate_form(weight3, chart, 0, 1, eps=0.05, level=2, threads=1)
        c = integrate_form(weight3, chart, 0, 1, eps=0.05, level=2, threads=4)
        assert a.value == b.value
        assert abs(a.value - c.value) <= 1e-14 * abs(a.value)


class TestCells:
    def test_counts(self):
        dec = build_cells(annulus_chart(*ANNULUS), None, 2)
        assert dec.per_axis == 16 and dec.cell_count == 256 and dec.node_count == 1024

    def test_cut_chart_has_two_pieces(self):
        dec = build_cells(modular_chart(), 0.05, 1)
        assert {b[0] for b in dec.variables[0].cell_bounds} == {0, 1}

    def test_csv(self, elliptic, tmp_path):
        est = integrate_form(elliptic, annulus_chart(*ANNULUS), 0, 1, level=1, record_cells=True)
        path = tmp_path / "cells.csv"
        write_cells_csv(est, path)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == est.cells_used
        assert math.fsum(float(r["contribution"]) for r in rows) == pytest.approx(est.value, rel=1e-12)
        with pytest.raises(ValueError):
            write_cells_csv(integrate_form(elliptic, annulus_chart(*ANNULUS), 0, 1, level=0), path)


class TestDensity:
    def test_volume_density_elliptic(self, elliptic):
        z = np.array([[0.01 + 0.002j]])
        g = 1 / (4 * abs(z[0, 0]) ** 2 * math.log(1 / abs(z[0, 0])) ** 2)
        assert form_density(elliptic, z, 0, 1)[0] == pytest.approx(g / math.pi, rel=1e-12)
        assert form_density(elliptic, z, 1, 0)[0] == pytest.approx(-2 * g / math.pi, rel=1e-12)


class TestLogIntegrability:
    def test_elliptic_closed_form(self, elliptic):
        eps = [2.0 ** -k for k in range(3, 9)]
        rep = log_integrability_probe(elliptic, None, eps)
        assert rep.decreasing

        def F(s):  # antiderivative of -log(pi s)
            return -s * math.log(math.pi * s) + s

        for hi, lo, val in rep.shells:
            assert val == pytest.approx(2 * math.pi * (F(hi) - F(lo)), rel=1e-12)

    def test_constant(self, constant):
        rep = log_integrability_probe(constant, None, [0.1, 0.05, 0.025])
        for hi, lo, val in rep.shells:
            assert val == pytest.approx(math.log(2) * 2 * math.pi * (hi - lo), rel=1e-12)
        assert rep.decreasing

    def test_weight3_decreasing(self, weight3):
        rep = log_integrability_probe(weight3, None, [2.0 ** -k for k in range(3, 9)])
        assert rep.decreasing
