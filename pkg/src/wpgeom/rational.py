"""Rational reconstruction of a numerical value with a certified uniqueness bound."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

DEFAULT_MAX_DEN = 10 ** 6


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError("value must be finite")
        return Fraction(x)
    return Fraction(x)


def interval_of(value, err) -> tuple[Fraction, Fraction]:
    """Exact closed interval ``[value - err, value + err]``.

    A float value with ``err == 0`` stands for every real that rounds to it,
    so it is widened by half an ulp.
    """
    e = _as_fraction(err)
    if e < 0:
        raise ValueError("err must be nonnegative")
    v = _as_fraction(value)
    if e == 0 and isinstance(value, float):
        e = Fraction(math.ulp(value)) / 2
    return v - e, v + e


def simplest_in(lo: Fraction, hi: Fraction, lo_open: bool = False, hi_open: bool = False) -> Fraction:
    """The rational of least denominator in the interval (ties among integers go to the one nearest 0).

    Continued-fraction recursion: peel off the integer part and recurse on
    the reciprocal interval, swapping the endpoints.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi or (lo == hi and (lo_open or hi_open)):
        raise ValueError("empty interval")
    if hi < 0 or (hi == 0 and hi_open):
        return -simplest_in(-hi, -lo, hi_open, lo_open)
    if lo < 0 or (lo == 0 and not lo_open):
        return Fraction(0)
    fl = math.floor(lo)
    n = fl if (lo == fl and not lo_open) else fl + 1
    if n < hi or (n == hi and not hi_open):
        return Fraction(n)
    # lo, hi now lie in [fl, fl + 1) with no admissible integer; x = fl + 1/y
    top = 1 / (hi - fl)
    if lo == fl:  # lo is open here; y is unbounded above
        y = math.ceil(top)
        if y == top and hi_open:
            y += 1
        return fl + Fraction(1, y)
    y = simplest_in(top, 1 / (lo - fl), hi_open, lo_open)
    return fl + 1 / y


@dataclass(frozen=True)
class RationalCandidate:
    """Reconstructed ``p/q``; unique among denominators up to ``uniqueness_bound``."""

    numerator: int
    denominator: int
    contained: bool
    uniqueness_bound: int | None   # None: the interval holds no other rational at all
    interval: tuple

    unique = True

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self):
        return self.numerator / self.denominator

    def __str__(self):
        return str(self.fraction)

    def to_dict(self):
        return {"unique": True, "candidate": str(self), "numerator": self.numerator,
                "denominator": self.denominator, "contained": self.contained,
                "uniqueness_bound": self.uniqueness_bound,
                "interval": [str(self.interval[0]), str(self.interval[1])]}


@dataclass(frozen=True)
class NoUniqueCandidate:
    """No rational with denominator ``<= max_den`` is alone in the interval.

    ``candidates`` holds the (up to two) lowest-denominator rationals found.
    """

    candidates: tuple
    max_den: int
    interval: tuple

    unique = False

    def to_dict(self):
        return {"unique": False, "candidates": [str(c) for c in self.candidates],
                "max_den": self.max_den, "interval": [str(self.interval[0]), str(self.interval[1])]}


def _runner_up(lo, hi, c):
    """Least-denominator rational in ``[lo, hi]`` other than ``c`` (or None)."""
    best = None
    if lo < c:
        best = simplest_in(lo, c, False, True)
    if c < hi:
        other = simplest_in(c, hi, True, False)
        if best is None or (other.denominator, abs(other)) < (best.denominator, abs(best)):
            best = other
    return best


def rationalize(value, err, max_den: int = DEFAULT_MAX_DEN):
    """Least-denominator rational in ``[value - err, value + err]``, if it is the only one
    with denominator ``<= max_den``; otherwise a :class:`NoUniqueCandidate`."""
    if max_den < 1:
        raise ValueError("max_den must be positive")
    lo, hi = interval_of(value, err)
    c = simplest_in(lo, hi)
    other = _runner_up(lo, hi, c)
    if c.denominator > max_den:
        return NoUniqueCandidate((c,) if other is None else (c, other), max_den, (lo, hi))
    if other is not None and other.denominator <= max_den:
        return NoUniqueCandidate((c, other), max_den, (lo, hi))
    bound = None if other is None else other.denominator - 1
    return RationalCandidate(c.numerator, c.denominator, lo <= c <= hi, bound, (lo, hi))


def brute_force_rationals(interval, max_den: int) -> list[Fraction]:
    """Every reduced fraction with denominator ``<= max_den`` in the closed interval, sorted."""
    if max_den > 10 ** 4:
        raise ValueError("brute force is limited to max_den <= 10^4")
    lo, hi = (_as_fraction(x) for x in interval)
    out = set()
    for q in range(1, max_den + 1):
        p0 = math.ceil(lo * q)
        p1 = math.floor(hi * q)
        for p in range(p0, p1 + 1):
            if math.gcd(p, q) == 1:
                out.add(Fraction(p, q))
    return sorted(out)
