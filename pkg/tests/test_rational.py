import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpgeom.rational import (
    NoUniqueCandidate, RationalCandidate, brute_force_rationals, interval_of, rationalize, simplest_in,
)


def reference(lo, hi, max_den):
    """Verdict from brute force: the unique rational of denominator <= max_den, or None."""
    found = brute_force_rationals((lo, hi), max_den)
    return found[0] if len(found) == 1 else None


class TestExamples:
    def test_twelfth(self):
        res = rationalize(0.0833333253, 3.9e-4, max_den=100)
        assert isinstance(res, RationalCandidate)
        assert (res.numerator, res.denominator) == (1, 12)
        assert res.contained and res.uniqueness_bound >= 100

    def test_minus_sixth(self):
        res = rationalize(-0.1666666506, 7.8e-4, max_den=100)
        assert str(res) == "-1/6"

    def test_wide_interval_not_unique(self):
        res = rationalize(0.5, 0.2, max_den=10)
        assert isinstance(res, NoUniqueCandidate) and not res.unique
        assert Fraction(1, 2) in res.candidates

    def test_exact_integer(self):
        res = rationalize(Fraction(3), 0)
        assert res.fraction == 3 and res.uniqueness_bound is None

    def test_float_zero_error_widened(self):
        lo, hi = interval_of(0.1, 0)
        assert lo < Fraction(1, 10) < hi
        assert rationalize(0.1, 0).fraction == Fraction(1, 10)

    def test_denominator_limit(self):
        res = rationalize(math.pi, 1e-12, max_den=1000)
        assert isinstance(res, NoUniqueCandidate)

    def test_invalid(self):
        with pytest.raises(ValueError):
            rationalize(1.0, -1)
        with pytest.raises(ValueError):
            rationalize(1.0, 0.1, max_den=0)
        with pytest.raises(ValueError):
            rationalize(float("nan"), 0.1)


class TestReferenceExamples:
    def test_half(self):
        assert rationalize(0.5, 0, 10).fraction == Fraction(1, 2)

    def test_twelfth_from_digits(self):
        assert str(rationalize(0.0833341, 1e-4, 100)) == "1/12"

    def test_crowded_interval(self):
        res = rationalize(0.49, 0.02, 100)
        assert not res.unique
        assert Fraction(1, 2) in res.candidates
        assert len(brute_force_rationals(res.interval, 100)) > 1

    def test_brute_force_examples(self):
        assert brute_force_rationals((0.2499, 0.2501), 10) == [Fraction(1, 4)]
        assert brute_force_rationals((0, 1), 2) == [0, Fraction(1, 2), 1]
        found = brute_force_rationals((0.3333, 0.3334), 1000)
        assert found == [Fraction(1, 3)]
        assert rationalize(0.33335, 0.00005, 1000).fraction == Fraction(1, 3)

    def test_brute_force_limit(self):
        with pytest.raises(ValueError):
            brute_force_rationals((0, 1), 10 ** 5)

    def test_integer_prints_plainly(self):
        assert str(rationalize(0.0, 1e-9, 100)) == "0"

    @pytest.mark.parametrize("q", [1, 2, 7, 12, 97, 360])
    def test_idempotent(self, q):
        for p in range(-2 * q, 2 * q + 1):
            f = Fraction(p, q)
            assert rationalize(f, 0, f.denominator).fraction == f
            assert rationalize(p / q, 0, f.denominator).fraction == f


class TestSimplest:
    @pytest.mark.parametrize("lo, hi, expected", [
        (Fraction(1, 3), Fraction(1, 2), Fraction(1, 2)),
        (Fraction(-5, 2), Fraction(-3, 2), -2),
        (Fraction(-1, 2), Fraction(1, 2), 0),
        (Fraction(31, 100), Fraction(32, 100), Fraction(5, 16)),
    ])
    def test_closed(self, lo, hi, expected):
        assert simplest_in(lo, hi) == expected

    def test_open_endpoints(self):
        assert simplest_in(Fraction(1, 3), Fraction(1, 2), hi_open=True) == Fraction(1, 3)
        assert simplest_in(Fraction(1, 3), Fraction(1, 2), lo_open=True, hi_open=True) == Fraction(2, 5)
        assert simplest_in(Fraction(0), Fraction(1, 3), lo_open=True) == Fraction(1, 3)
        assert simplest_in(Fraction(0), Fraction(1, 3), lo_open=True, hi_open=True) == Fraction(1, 4)

    def test_empty(self):
        with pytest.raises(ValueError):
            simplest_in(Fraction(1), Fraction(1), lo_open=True)

    @settings(max_examples=200, deadline=None)
    @given(st.fractions(min_value=-5, max_value=5, max_denominator=50),
           st.fractions(min_value=0, max_value=Fraction(1, 4), max_denominator=50))
    def test_matches_brute_force(self, lo, width):
        hi = lo + width
        best = brute_force_rationals((lo, hi), 60)
        got = simplest_in(lo, hi)
        if best:
            assert got.denominator == min(f.denominator for f in best)
        assert lo <= got <= hi


@settings(max_examples=300, deadline=None)
@given(st.floats(-3, 3), st.floats(1e-7, 1e-2), st.integers(1, 1000))
def test_rationalize_matches_brute_force(center, width, max_den):
    res = rationalize(center, width, max_den)
    lo, hi = res.interval
    ref = reference(lo, hi, max_den)
    if ref is None:
        assert not res.unique
    else:
        assert res.unique and res.fraction == ref
        assert res.uniqueness_bound is None or res.uniqueness_bound >= max_den


@settings(max_examples=100, deadline=None)
@given(st.fractions(min_value=-2, max_value=2, max_denominator=200), st.floats(1e-9, 1e-5))
def test_uniqueness_bound_is_sharp(x, err):
    res = rationalize(x, err, 10 ** 6)
    if res.unique and res.uniqueness_bound is not None and res.uniqueness_bound < 10 ** 4:
        lo, hi = res.interval
        found = brute_force_rationals((lo, hi), res.uniqueness_bound + 1)
        assert len(found) == 2
        assert brute_force_rationals((lo, hi), res.uniqueness_bound) == [res.fraction]
