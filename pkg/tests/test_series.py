import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import QQ_I

from wpgeom.series import HOL, LogSeries, gaussian, next_degree_pair, multi_indices


def mono(a, b, l, c=1, pipow=0, m=1, k=1):
    return LogSeries.monomial(m, k, (a,), (b,), (l,), pipow=pipow, coef=gaussian(c))


def test_gaussian_rejects_floats():
    with pytest.raises(TypeError):
        gaussian(0.5)
    assert gaussian("1/3") == QQ_I(Fraction(1, 3), 0)
    assert gaussian(("1/2", -2)) == QQ_I(Fraction(1, 2), -2)


def test_zero_terms_are_dropped():
    s = mono(1, 0, 0) - mono(1, 0, 0)
    assert s.is_zero() and len(s) == 0


def test_product_of_monomials():
    s = mono(1, 0, 1, 2) * mono(0, 2, 1, 3, pipow=1)
    assert s.terms == {((1,), (2,), (2,), 1): QQ_I(6, 0)}


def test_diff_acts_on_real_log():
    # d/dz [z^2 * log(1/|z|^2)] = 2 z log(1/|z|^2) - z
    s = mono(2, 0, 1).diff(0)
    assert s.terms == {((1,), (0,), (1,), 0): QQ_I(2, 0), ((1,), (0,), (0,), 0): QQ_I(-1, 0)}


def test_diff_numerically():
    s = mono(2, 1, 2, "1/3") + mono(0, 3, 1, (0, 1))
    z = 0.01 + 0.02j
    h = 1e-7
    d = s.diff(0).evaluate(np.array([z]))
    fd = (s.evaluate(np.array([z + h])) - s.evaluate(np.array([z - h]))) / (2 * h)
    fd_i = (s.evaluate(np.array([z + 1j * h])) - s.evaluate(np.array([z - 1j * h]))) / (2 * h)
    wirtinger = 0.5 * (fd - 1j * fd_i)
    assert abs(complex(d) - complex(wirtinger)) < 1e-6 * abs(complex(d))


def test_euler_is_z_times_diff():
    s = mono(3, 1, 1, 2)
    assert s.euler(0) == s.diff(0).shift(0, 1, 0)


def test_conj_swaps_powers():
    s = mono(2, 1, 1, (1, 2))
    assert s.conj().terms == {((1,), (2,), (1,), 0): QQ_I(1, -2)}


def test_substitute_power_scales_logs():
    s = mono(1, 0, 2, 1)
    assert s.substitute_power(0, 4).terms == {((4,), (0,), (2,), 0): QQ_I(16, 0)}


def test_scale_variable_matches_direct_evaluation():
    s = mono(1, 1, 2, 3) + mono(2, 0, 1, (0, 1))
    c = 0.7 - 0.2j
    z = np.array([0.03 + 0.01j])
    a = complex(s.scale_variable(0, c).evaluate(z))
    b = complex(s.evaluate(c * z))
    assert abs(a - b) < 1e-12 * abs(b)


def test_collect_groups_by_variable():
    s = LogSeries(2, 1, {((1, 2), (1, 0), (1,), 0): QQ_I(2, 0), ((1, 0), (1, 1), (1,), 0): QQ_I(3, 0)})
    groups = s.collect(0)
    assert set(groups) == {(1, 1, 1)}
    assert len(groups[(1, 1, 1)]) == 2


def test_evaluate_extended_precision_agrees():
    s = mono(1, 1, 3, "1/7", pipow=2)
    z = np.array([1e-5 + 2e-6j])
    a = complex(s.evaluate(z))
    b = complex(s.evaluate(z, dtype=np.clongdouble))
    assert abs(a - b) < 1e-14 * abs(a)


def test_holomorphic_series_rejects_conj_powers():
    with pytest.raises(ValueError):
        LogSeries(1, 1, {((0,), (1,), (0,), 0): QQ_I(1, 0)}, log_kind=HOL)


def test_truncate_example_enumeration():
    # terms (k, l) = (0,1), (1,0), (1,3) with n = 1 (D = 2): degrees -1/2, 1, -1/2
    s = mono(0, 0, 1) + mono(1, 0, 0) + mono(1, 0, 3)
    res = s.truncate(0, 2)
    kept = {(sum(k[0]) + sum(k[1]), sum(k[2])) for k in res.series.terms}
    assert kept == {(0, 1), (1, 3)}
    assert (res.k0, res.l0) == (1, 1)      # smallest degree above 0 is 1 - 1/2
    assert res.leading_dropped == (1, 0)


def test_truncate_identity_and_empty():
    s = mono(0, 0, 1) + mono(2, 1, 0)
    assert s.truncate(math.inf, 2).series == s
    e = LogSeries(1, 1)
    assert e.truncate(0, 2).series.is_zero()


@pytest.mark.parametrize("mu,D,expected", [
    (0, 2, (1, 1)), (Fraction(1, 2), 2, (1, 0)), (-1, 2, (0, 1)), (2, 4, (3, 3)), (-10, 3, (0, 2)),
])
def test_next_degree_pair(mu, D, expected):
    assert next_degree_pair(mu, D) == expected


@settings(max_examples=60, deadline=None)
@given(mu=st.fractions(min_value=-3, max_value=5, max_denominator=12), D=st.integers(1, 6))
def test_next_degree_pair_is_minimal_degree_above_mu(mu, D):
    k0, l0 = next_degree_pair(mu, D)
    deg = Fraction(k0) - Fraction(l0, D)
    assert deg > mu and 0 <= l0 < D
    for k in range(0, 10):
        for l in range(D):
            d = Fraction(k) - Fraction(l, D)
            if d > mu:
                assert d >= deg


terms_strategy = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)),
    st.integers(-5, 5), max_size=8)


def from_dict(d):
    return LogSeries(1, 1, {((a,), (b,), (l,), 0): QQ_I(c, 0) for (a, b, l), c in d.items()})


@settings(max_examples=60, deadline=None)
@given(terms_strategy, st.fractions(min_value=-2, max_value=5, max_denominator=6),
       st.fractions(min_value=0, max_value=3, max_denominator=6))
def test_truncate_idempotent_and_monotone(d, mu, extra):
    s = from_dict(d)
    t = s.truncate(mu, 2).series
    assert t.truncate(mu, 2).series == t
    assert set(t.terms) <= set(s.truncate(mu + extra, 2).series.terms)


@settings(max_examples=40, deadline=None)
@given(terms_strategy, terms_strategy)
def test_product_rule(d1, d2):
    a, b = from_dict(d1), from_dict(d2)
    assert (a * b).diff(0) == a.diff(0) * b + a * b.diff(0)


def test_multi_indices():
    assert sorted(multi_indices(2, 2)) == [(0, 2), (1, 1), (2, 0)]
