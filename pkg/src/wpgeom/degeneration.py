"""Leading terms of the volume form along a boundary divisor and degeneration orders."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

import numpy as np

from .errors import (
    AmbiguousLeadingDegreeError,
    DegenerateMetricError,
    HomogeneousPositivityError,
    InsufficientSeriesDataError,
    WPGError,
)
from .model import VHSModel, potential_series
from .series import LogSeries, scalar_to_complex
from .wpmetric import PotentialJet

NUMERIC_ZERO = 1e-12


def _perm_sign(p):
    sign, seen = 1, set()
    for i in range(len(p)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def gtilde_from_potential(P: LogSeries, j: int) -> LogSeries:
    """``det(E)`` with ``E_{a b} = P_a P_bbar - P P_{a bbar}`` and row/column ``j``
    using ``z_j d/dz_j`` (resp. its conjugate); equals ``P^{2m} r_j^2 det g``."""
    m = P.num_vars

    def hol(s, a):
        return s.euler(a) if a == j else s.diff(a)

    def anti(s, b):
        return s.euler(b, anti=True) if b == j else s.diff(b, anti=True)

    Pa = [hol(P, a) for a in range(m)]
    Pb = [anti(P, b) for b in range(m)]
    E = [[Pa[a] * Pb[b] - P * anti(Pa[a], b) for b in range(m)] for a in range(m)]
    total = None
    for perm in permutations(range(m)):
        term = E[0][perm[0]]
        for a in range(1, m):
            term = term * E[a][perm[a]]
        term = term if _perm_sign(perm) > 0 else -term
        total = term if total is None else total + term
    return total


def gtilde_series(model: VHSModel, j: int, degree_cap=None) -> LogSeries:
    """Exact expansion of ``(Omega, conj Omega)^{2m} r_j^2 det(g)``.

    When the model only knows its coefficients through ``known_order``, the
    result is trusted through that total degree in ``z_j``; ``degree_cap``
    beyond it raises :class:`InsufficientSeriesDataError`.
    """
    if not 0 <= j < model.punctures:
        raise ValueError("divisor index must name a puncture variable")
    if model.known_order is not None and degree_cap is not None and degree_cap > model.known_order:
        raise InsufficientSeriesDataError(
            f"insufficient series data: degree {degree_cap} needs order {math.ceil(degree_cap)}, "
            f"model provides {model.known_order}", needed_order=math.ceil(degree_cap),
            known_order=model.known_order)
    key = ("gtilde", j)
    if key not in model._cache:
        model._cache[key] = gtilde_from_potential(potential_series(model), j)
    G = model._cache[key]
    if degree_cap is not None:
        G = G.truncate(degree_cap, model.potential_log_denominator, var=j).series
    return G


def _series_size(s: LogSeries) -> float:
    return max((abs(scalar_to_complex(c)) * math.pi ** (-k[3]) for k, c in s.items()), default=0.0)


@dataclass
class LeadingTerm:
    """``f(z_j, zbar_j) (log 1/r_j^2)^l`` with ``f = sum_s A_{s, k-s}(z') z^s zbar^(k-s)``."""

    divisor: int
    k: int
    l: int
    coefficients: dict            # (s, t) -> coefficient series in the transverse variables
    log_denominator: int
    degree: Fraction = field(default=None)

    def coefficient_values(self, transverse_point) -> dict:
        z = _slice_point(transverse_point, self.divisor)
        return {st: complex(np.asarray(c.evaluate(z))) for st, c in self.coefficients.items()}


def _slice_point(point, j):
    z = np.array(point, dtype=complex)
    z[j] = 0.5  # coefficient functions do not depend on z_j
    return z


def leading_term(series: LogSeries, j: int, log_denominator=None) -> LeadingTerm:
    """Minimize ``s + t - l/D`` over the nonzero ``(z_j, zbar_j, log)`` groups."""
    groups = series.collect(j)
    if not series.is_exact:
        big = max((_series_size(g) for g in groups.values()), default=0.0)
        groups = {k: g for k, g in groups.items() if _series_size(g) > NUMERIC_ZERO * big}
    groups = {k: g for k, g in groups.items() if not g.is_zero()}
    if not groups:
        raise WPGError("leading term of an all-zero series is undefined")
    if log_denominator is None:
        log_denominator = max(l for (_, _, l) in groups) + 1
    D = log_denominator
    deg = {key: Fraction(key[0] + key[1]) - Fraction(key[2], D) for key in groups}
    best = min(deg.values())
    minimizers = [key for key, d in deg.items() if d == best]
    pairs = sorted({(s + t, l) for (s, t, l) in minimizers})
    if len(pairs) > 1:
        raise AmbiguousLeadingDegreeError(
            f"ambiguous leading degree {best}: pairs {pairs}", pairs=pairs)
    k, l = pairs[0]
    coeffs = {(s, t): groups[(s, t, l)] for (s, t, ll) in minimizers}
    return LeadingTerm(j, k, l, coeffs, D, best)


@dataclass
class PositivityCheck:
    ok: bool
    c: float | None
    k: int | None
    violations: list

    def to_dict(self):
        return dict(self.__dict__)


def homogeneous_positivity_check(f, tol: float = 1e-10) -> PositivityCheck:
    """Check that ``sum A_{s,t} z^s zbar^t`` (with ``s + t = k``) equals ``c r^k``, ``c > 0``.

    ``f`` maps ``(s, t)`` to numeric coefficients.
    """
    f = {tuple(st): complex(v) for st, v in f.items()}
    degrees = {s + t for (s, t) in f}
    if len(degrees) > 1:
        raise ValueError("coefficients are not homogeneous")
    scale = max((abs(v) for v in f.values()), default=0.0)
    nz = {st: v for st, v in f.items() if abs(v) > tol * scale}
    if not nz:
        return PositivityCheck(False, None, None, [("identically zero", 0.0)])
    k = degrees.pop()
    violations = []
    for (s, t), v in nz.items():
        other = f.get((t, s), 0.0)
        if abs(v - np.conj(other)) > tol * scale:
            violations.append(((s, t), v, "not hermitian"))
    if k % 2:
        violations.append(("odd degree", k))
    for (s, t), v in nz.items():
        if s != t:
            violations.append(((s, t), v, "off-balanced coefficient"))
    c = nz.get((k // 2, k // 2)) if k % 2 == 0 else None
    if c is None:
        violations.append(("missing balanced coefficient", k))
    elif c.real <= 0 or abs(c.imag) > tol * scale:
        violations.append(((k // 2, k // 2), c, "balanced coefficient not positive"))
    ok = not violations
    return PositivityCheck(ok, float(c.real) if (ok and c is not None) else None, k, violations)


@dataclass
class DegenerationReport:
    divisor: int
    k: int
    l: int
    tau: int
    c: float
    transverse_point: tuple
    slope_k: float | None = None
    slope_l: float | None = None
    slope_ok: bool | None = None
    violations: list = field(default_factory=list)

    def to_dict(self):
        d = dict(self.__dict__)
        d["transverse_point"] = [[complex(z).real, complex(z).imag] for z in self.transverse_point]
        return d


def gtilde_numeric(model: VHSModel, Z, j: int):
    """``P^{2m} r_j^2 det g`` evaluated from the metric (independent of the g-tilde series)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    jet = PotentialJet(model, Z)
    G = jet.metric()
    P = jet.P().real
    return (P ** (2 * model.dim) * np.abs(Z[:, j]) ** 2 * np.linalg.det(G)).real


def slope_fit(model: VHSModel, j: int, transverse_point=None, u_range=(20.0, 200.0), count=24, theta=0.3):
    """Fit ``log gtilde = c + k log r + l log log(1/r)`` along a ray."""
    z0 = np.array(transverse_point if transverse_point is not None else model.base_point, dtype=complex)
    u = np.geomspace(max(u_range[0], -math.log(model.radius) + 1.0), u_range[1], count)
    Z = np.tile(z0, (count, 1))
    Z[:, j] = np.exp(-u) * np.exp(1j * theta)
    vals = gtilde_numeric(model, Z, j)
    if np.any(vals <= 0):
        raise DegenerateMetricError("g-tilde not positive along the fitting ray")
    X = np.column_stack([np.ones_like(u), -u, np.log(u)])
    coef, *_ = np.linalg.lstsq(X, np.log(vals), rcond=None)
    return float(coef[1]), float(coef[2])


def degeneration_order(model: VHSModel, j: int = 0, transverse_point=None, slope_check: bool = True) -> DegenerationReport:
    """``tau_j = (k - 2)/2`` from the leading term of g-tilde along ``z_j = 0``."""
    G = gtilde_series(model, j)
    if G.is_zero():
        raise DegenerateMetricError("g-tilde vanishes identically (degenerate metric)")
    lt = leading_term(G, j, model.potential_log_denominator)
    if model.known_order is not None and lt.k > model.known_order:
        raise InsufficientSeriesDataError(
            f"insufficient series data: leading order {lt.k} exceeds known order {model.known_order}",
            needed_order=lt.k, known_order=model.known_order)
    z0 = tuple(transverse_point if transverse_point is not None else model.base_point)
    check = homogeneous_positivity_check(lt.coefficient_values(z0))
    if not check.ok:
        raise HomogeneousPositivityError(
            f"leading term along divisor {j} is not c r^k with c > 0: {check.violations}",
            violations=check.violations)
    if lt.k % 2:
        raise HomogeneousPositivityError(f"odd leading power k = {lt.k}")
    report = DegenerationReport(j, lt.k, lt.l, (lt.k - 2) // 2, check.c, z0)
    if slope_check:
        k_hat, l_hat = slope_fit(model, j, z0)
        report.slope_k, report.slope_l = k_hat, l_hat
        report.slope_ok = abs(k_hat - lt.k) <= 0.05 * max(abs(lt.k), 1)
    return report


@dataclass
class ConstancyReport:
    divisor: int
    pairs: list
    included: int
    excluded: int
    constant: bool

    def to_dict(self):
        return dict(self.__dict__)


def order_constancy_probe(model: VHSModel, j: int, samples, threshold: float = 1e-8) -> ConstancyReport:
    """Recompute the leading ``(k, l)`` at each transverse sample point.

    A sample is excluded when ``|A_k(z')|`` is at most ``threshold`` times
    the largest value over the samples (the non-generic locus).
    """
    if model.dim == 1:
        return ConstancyReport(j, [], 0, 0, True)
    G = gtilde_series(model, j)
    D = model.potential_log_denominator
    lt = leading_term(G, j, D)
    groups = {k: g for k, g in G.collect(j).items() if not g.is_zero()}
    leading_vals, local_pairs = [], []
    for zp in samples:
        z = _slice_point(zp, j)
        vals = {key: complex(np.asarray(g.evaluate(z))) for key, g in groups.items()}
        scale = max(abs(v) for v in vals.values())
        lead = max(abs(vals.get((s, t, lt.l), 0.0)) for (s, t) in lt.coefficients)
        leading_vals.append(lead)
        live = [key for key, v in vals.items() if abs(v) > threshold * scale] if scale > 0 else []
        if live:
            best = min(Fraction(s + t) - Fraction(l, D) for (s, t, l) in live)
            pair = sorted({(s + t, l) for (s, t, l) in live if Fraction(s + t) - Fraction(l, D) == best})
            local_pairs.append(tuple(pair[0]) if len(pair) == 1 else tuple(pair))
        else:
            local_pairs.append(None)
    top = max(leading_vals) if leading_vals else 0.0
    included = [p for p, a in zip(local_pairs, leading_vals) if a > threshold * top]
    pairs = sorted(set(included), key=str)
    constant = len(pairs) <= 1 and all(p == (lt.k, lt.l) for p in pairs)
    return ConstancyReport(j, [list(p) for p in pairs], len(included), len(local_pairs) - len(included), constant)
