"""Exact bigraded series in z, conj(z) and logarithms of the puncture variables.

A term is stored under the key ``(alpha, beta, logs, p)`` and represents

    c * prod_j z_j**alpha_j * conj(z_j)**beta_j * prod_{j<k} L_j**logs_j * pi**(-p)

where ``L_j`` is one of two logarithm flavours:

* ``"real"``: ``L_j = log(1/|z_j|**2)`` (potential-type series, real valued);
* ``"hol"``:  ``L_j = log(1/z_j)`` on the principal branch (orbit-type series).

Coefficients are exact Gaussian rationals (``sympy.QQ_I`` elements) or plain
Python complex numbers once an inexact operation (for instance a rescaling by
a float) has been applied.  Vector-valued series store tuples of scalars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _iproduct

import numpy as np
from sympy import QQ, QQ_I

REAL = "real"
HOL = "hol"

# pi at extended precision; np.longdouble(np.pi) would only carry double digits
_PI_LONG = np.longdouble("3.141592653589793238462643383279502884197")


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------

def gaussian(x) -> object:
    """Convert ``x`` to an exact Gaussian rational.

    Accepts ints, ``Fraction``, strings ``"p/q"``, sympy rationals, ``QQ_I``
    elements and pairs ``(re, im)`` of any of those.  Floats are rejected:
    exactness is the point.
    """
    if isinstance(x, tuple) and len(x) == 2:
        re, im = (_rational(v) for v in x)
        return QQ_I(re, im)
    if _is_qqi(x):
        return x
    return QQ_I(_rational(x), 0)


def _rational(x):
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return QQ(x)
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    if isinstance(x, str):
        f = Fraction(x.strip())
        return QQ(f.numerator, f.denominator)
    if isinstance(x, float):
        raise TypeError(f"float {x!r} is not an exact rational")
    try:
        return QQ.convert(x)
    except Exception as exc:  # pragma: no cover - defensive
        raise TypeError(f"cannot interpret {x!r} as a rational") from exc


def _is_qqi(x) -> bool:
    return type(x).__name__ == "GaussianRational"


def is_exact_scalar(c) -> bool:
    return not isinstance(c, (complex, float, np.number))


def scalar_to_complex(c) -> complex:
    if _is_qqi(c):
        return complex(float(c.x), float(c.y))
    return complex(c)


def qqi_conj(c):
    if _is_qqi(c):
        return QQ_I(c.x, -c.y)
    return complex(c).conjugate()


def _mixed_mul(a, b):
    try:
        return a * b
    except TypeError:
        return scalar_to_complex(a) * scalar_to_complex(b)


def _mixed_add(a, b):
    try:
        return a + b
    except TypeError:
        return scalar_to_complex(a) + scalar_to_complex(b)


def _coef_add(a, b):
    if isinstance(a, tuple):
        return tuple(_mixed_add(x, y) for x, y in zip(a, b))
    return _mixed_add(a, b)


def _coef_scale(s, c):
    if isinstance(c, tuple):
        return tuple(_mixed_mul(s, x) for x in c)
    return _mixed_mul(s, c)


def _coef_is_zero(c) -> bool:
    if isinstance(c, tuple):
        return all(not x for x in c)
    return not c


def _coef_conj(c):
    if isinstance(c, tuple):
        return tuple(qqi_conj(x) for x in c)
    return qqi_conj(c)


def _scalar_mul(a, b):
    """Coefficient product where at most one side is a vector."""
    if isinstance(a, tuple) and isinstance(b, tuple):
        raise TypeError("product of two vector-valued series is undefined")
    if isinstance(a, tuple):
        return _coef_scale(b, a)
    return _coef_scale(a, b)


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


# ---------------------------------------------------------------------------
# the series type
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationResult:
    """Output of :meth:`LogSeries.truncate`.

    ``k0, l0`` is the pair of nonnegative integers with ``l0 <= D-1`` whose
    degree ``k0 - l0/D`` is the smallest value strictly above ``mu`` (``None``
    when nothing can be dropped, i.e. ``mu = inf``).  ``leading_dropped`` is the
    smallest-degree ``(k, l)`` pair actually present among the dropped terms.
    """

    series: "LogSeries"
    k0: int | None
    l0: int | None
    leading_dropped: tuple[int, int] | None

    def __iter__(self):
        yield self.series
        yield (self.k0, self.l0)


def next_degree_pair(mu, log_denominator: int) -> tuple[int, int] | tuple[None, None]:
    """Smallest degree ``k - l/D > mu`` over ``k >= 0``, ``0 <= l < D``."""
    if mu == math.inf:
        return None, None
    D = int(log_denominator)
    if mu == -math.inf:
        return 0, D - 1
    bound = Fraction(mu) * D
    N = math.floor(bound) + 1
    N = max(N, -(D - 1))
    k0 = -((-N) // D)  # ceil(N / D)
    k0 = max(k0, 0)
    l0 = k0 * D - N
    return k0, l0


class LogSeries:
    """Finite bigraded series; see module docstring for the term layout."""

    __slots__ = ("num_vars", "puncture_count", "log_kind", "radius", "shape", "_terms", "_compiled")

    def __init__(self, num_vars, puncture_count, terms=None, log_kind=REAL, radius=None, shape=None):
        if log_kind not in (REAL, HOL):
            raise ValueError(f"unknown log kind {log_kind!r}")
        if not 0 <= puncture_count <= num_vars:
            raise ValueError("puncture_count must lie in [0, num_vars]")
        self.num_vars = int(num_vars)
        self.puncture_count = int(puncture_count)
        self.log_kind = log_kind
        self.radius = radius
        self.shape = shape
        clean = {}
        for key, c in (terms or {}).items():
            key = _norm_key(key, self.num_vars, self.puncture_count)
            if log_kind == HOL and any(key[1]):
                raise ValueError("holomorphic-log series cannot carry conj(z) powers")
            if shape is not None:
                if not isinstance(c, tuple) or len(c) != shape:
                    raise ValueError(f"vector coefficient of length {shape} expected")
            elif isinstance(c, tuple):
                raise ValueError("scalar series given a vector coefficient")
            if key in clean:
                c = _coef_add(clean[key], c)
            clean[key] = c
        self._terms = {k: v for k, v in clean.items() if not _coef_is_zero(v)}
        self._compiled = {}

    # -- basic protocol ----------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, LogSeries):
            return NotImplemented
        return (self.num_vars, self.puncture_count, self.log_kind, self.shape) == (
            other.num_vars, other.puncture_count, other.log_kind, other.shape
        ) and (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        kind = "vector" if self.shape else "scalar"
        return f"LogSeries({kind}, m={self.num_vars}, k={self.puncture_count}, {self.log_kind}, {len(self)} terms)"

    def _new(self, terms, shape=..., log_kind=None):
        return LogSeries(
            self.num_vars,
            self.puncture_count,
            terms,
            log_kind=log_kind or self.log_kind,
            radius=self.radius,
            shape=self.shape if shape is ... else shape,
        )

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_exact(self) -> bool:
        for c in self._terms.values():
            vals = c if isinstance(c, tuple) else (c,)
            if not all(is_exact_scalar(v) for v in vals):
                return False
        return True

    def max_log_power(self) -> int:
        return max((sum(k[2]) for k in self._terms), default=0)

    def max_pole_order(self) -> int:
        return max((max((-a for a in k[0] + k[1]), default=0) for k in self._terms), default=0)

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, num_vars, puncture_count, value, log_kind=REAL, radius=None):
        key = ((0,) * num_vars, (0,) * num_vars, (0,) * puncture_count, 0)
        return cls(num_vars, puncture_count, {key: value}, log_kind=log_kind, radius=radius)

    @classmethod
    def monomial(cls, num_vars, puncture_count, alpha=None, beta=None, logs=None, pipow=0,
                 coef=None, log_kind=REAL, radius=None, shape=None):
        alpha = tuple(alpha or (0,) * num_vars)
        beta = tuple(beta or (0,) * num_vars)
        logs = tuple(logs or (0,) * puncture_count)
        if coef is None:
            coef = QQ_I(1, 0)
        return cls(num_vars, puncture_count, {(alpha, beta, logs, pipow): coef},
                   log_kind=log_kind, radius=radius, shape=shape)

    # -- arithmetic ---------------------------------------------------------
    def _check_compatible(self, other):
        if (self.num_vars, self.puncture_count, self.log_kind) != (
            other.num_vars, other.puncture_count, other.log_kind
        ):
            raise ValueError("incompatible series")

    def __add__(self, other):
        if not isinstance(other, LogSeries):
            return NotImplemented
        self._check_compatible(other)
        if self.shape != other.shape:
            raise ValueError("cannot add scalar and vector series")
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = _coef_add(out[k], c) if k in out else c
        return self._new(out)

    def __neg__(self):
        return self.scale(QQ_I(-1, 0))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c, pipow: int = 0):
        """Multiply every coefficient by ``c * pi**(-pipow)``."""
        out = {}
        for (a, b, l, p), v in self._terms.items():
            out[(a, b, l, p + pipow)] = _coef_scale(c, v)
        return self._new(out)

    def __mul__(self, other):
        if isinstance(other, LogSeries):
            self._check_compatible(other)
            if self.shape is not None and other.shape is not None:
                raise TypeError("product of two vector-valued series is undefined")
            shape = self.shape if self.shape is not None else other.shape
            out = {}
            for (a1, b1, l1, p1), c1 in self._terms.items():
                for (a2, b2, l2, p2), c2 in other._terms.items():
                    key = (
                        tuple(x + y for x, y in zip(a1, a2)),
                        tuple(x + y for x, y in zip(b1, b2)),
                        tuple(x + y for x, y in zip(l1, l2)),
                        p1 + p2,
                    )
                    c = _scalar_mul(c1, c2)
                    out[key] = _coef_add(out[key], c) if key in out else c
            return self._new(out, shape=shape)
        return self.scale(other)

    __rmul__ = __mul__

    def shift(self, j: int, da: int = 0, db: int = 0):
        """Multiply by ``z_j**da * conj(z_j)**db``."""
        out = {}
        for (a, b, l, p), c in self._terms.items():
            a = list(a)
            b = list(b)
            a[j] += da
            b[j] += db
            out[(tuple(a), tuple(b), l, p)] = c
        return self._new(out)

    def conj(self):
        """Complex conjugate of a real-kind series (swaps z and conj(z))."""
        if self.log_kind != REAL:
            raise ValueError("conjugation is only closed for real-log series")
        out = {(b, a, l, p): _coef_conj(c) for (a, b, l, p), c in self._terms.items()}
        return self._new(out)

    def component(self, i: int):
        """Scalar series of the ``i``-th vector component."""
        if self.shape is None:
            raise ValueError("series is scalar")
        return self._new({k: c[i] for k, c in self._terms.items()}, shape=None)

    def dot(self, vec):
        """Contract a vector series with a constant coefficient vector."""
        out = {}
        for k, c in self._terms.items():
            acc = None
            for w, x in zip(vec, c):
                t = _mixed_mul(w, x)
                acc = t if acc is None else _mixed_add(acc, t)
            out[k] = acc
        return self._new(out, shape=None)

    # -- differentiation ------------------------------------------------------
    def diff(self, j: int, anti: bool = False):
        """Derivative in ``z_j`` (or in ``conj(z_j)`` when ``anti``)."""
        out = {}

        def put(key, c):
            out[key] = _coef_add(out[key], c) if key in out else c

        for (a, b, l, p), c in self._terms.items():
            pw = b[j] if anti else a[j]
            if pw:
                aa, bb = list(a), list(b)
                if anti:
                    bb[j] -= 1
                else:
                    aa[j] -= 1
                put((tuple(aa), tuple(bb), l, p), _coef_scale(QQ_I(pw, 0), c))
            if j < self.puncture_count and l[j] and not (anti and self.log_kind == HOL):
                # d L / dz = -1/z for both flavours; d L / d conj z = -1/conj z for "real"
                aa, bb, ll = list(a), list(b), list(l)
                if anti:
                    bb[j] -= 1
                else:
                    aa[j] -= 1
                ll[j] -= 1
                put((tuple(aa), tuple(bb), tuple(ll), p), _coef_scale(QQ_I(-l[j], 0), c))
        return self._new(out)

    def euler(self, j: int, anti: bool = False):
        """Euler operator ``z_j d/dz_j`` (or its conjugate)."""
        return self.diff(j, anti).shift(j, 0 if anti else 1, 1 if anti else 0)

    def derivative(self, hol=(), anti=()):
        s = self
        for j in hol:
            s = s.diff(j)
        for j in anti:
            s = s.diff(j, anti=True)
        return s

    # -- substitutions -----------------------------------------------------
    def substitute_power(self, j: int, m: int):
        """Substitute ``z_j -> w_j**m`` (logs scale by ``m``)."""
        out = {}
        for (a, b, l, p), c in self._terms.items():
            aa, bb = list(a), list(b)
            aa[j] *= m
            bb[j] *= m
            factor = QQ_I(m ** l[j], 0) if j < self.puncture_count else QQ_I(1, 0)
            key = (tuple(aa), tuple(bb), l, p)
            v = _coef_scale(factor, c)
            out[key] = _coef_add(out[key], v) if key in out else v
        return self._new(out)

    def scale_variable(self, j: int, c: complex):
        """Substitute ``z_j -> c * z_j`` numerically (coefficients become complex)."""
        if self.log_kind != REAL:
            raise ValueError("rescaling implemented for real-log series")
        c = complex(c)
        shift = -math.log(abs(c) ** 2)  # log(1/|c z|^2) = log(1/|z|^2) + shift
        out = {}
        for (a, b, l, p), v in self._terms.items():
            base = scalar_to_complex(v) * c ** a[j] * c.conjugate() ** b[j]
            if j < self.puncture_count and l[j]:
                for i in range(l[j] + 1):
                    ll = list(l)
                    ll[j] = i
                    key = (a, b, tuple(ll), p)
                    w = base * math.comb(l[j], i) * shift ** (l[j] - i)
                    out[key] = out.get(key, 0) + w
            else:
                out[(a, b, l, p)] = out.get((a, b, l, p), 0) + base
        return self._new(out)

    # -- degree bookkeeping ------------------------------------------------
    @staticmethod
    def key_degree(key, log_denominator, var=None) -> Fraction:
        a, b, l, _ = key
        if var is None:
            k = sum(a) + sum(b)
            ll = sum(l)
        else:
            k = a[var] + b[var]
            ll = l[var] if var < len(l) else 0
        return Fraction(k) - Fraction(ll, log_denominator)

    def truncate(self, mu, log_denominator: int, var=None) -> TruncationResult:
        """Keep exactly the terms with degree ``<= mu``.

        Degrees use ``k - l/D`` with ``k`` the total power and ``l`` the total
        log power (restricted to ``var`` when given).
        """
        kept, dropped = {}, []
        for key, c in self._terms.items():
            deg = self.key_degree(key, log_denominator, var)
            if mu == math.inf or deg <= Fraction(mu):
                kept[key] = c
            else:
                dropped.append(key)
        k0, l0 = next_degree_pair(mu, log_denominator)
        leading = None
        if dropped:
            best = min(dropped, key=lambda k: self.key_degree(k, log_denominator, var))
            a, b, l, _ = best
            if var is None:
                leading = (sum(a) + sum(b), sum(l))
            else:
                leading = (a[var] + b[var], l[var] if var < len(l) else 0)
        return TruncationResult(self._new(kept), k0, l0, leading)

    def collect(self, j: int) -> dict:
        """Group terms by ``(alpha_j, beta_j, l_j)``; values are series in the rest."""
        groups = {}
        for (a, b, l, p), c in self._terms.items():
            aa, bb, ll = list(a), list(b), list(l)
            s, t = aa[j], bb[j]
            aa[j] = bb[j] = 0
            lj = 0
            if j < self.puncture_count:
                lj = ll[j]
                ll[j] = 0
            groups.setdefault((s, t, lj), {})[(tuple(aa), tuple(bb), tuple(ll), p)] = c
        return {k: self._new(v) for k, v in groups.items()}

    # -- numerics ------------------------------------------------------------
    def _compile(self, dtype):
        key = np.dtype(dtype).name
        if key in self._compiled:
            return self._compiled[key]
        keys = list(self._terms)
        m, k = self.num_vars, self.puncture_count
        T = len(keys)
        alpha = np.array([kk[0] for kk in keys], dtype=np.int64).reshape(T, m)
        beta = np.array([kk[1] for kk in keys], dtype=np.int64).reshape(T, m)
        logs = np.array([kk[2] for kk in keys], dtype=np.int64).reshape(T, k)
        extended = np.dtype(dtype) == np.dtype(np.clongdouble)
        pi = _PI_LONG if extended else math.pi
        rows = []
        for kk in keys:
            c = self._terms[kk]
            vals = c if isinstance(c, tuple) else (c,)
            rows.append([_scalar_numeric(v, extended) * pi ** (-kk[3]) for v in vals])
        width = self.shape or 1
        coef = np.array(rows, dtype=dtype).reshape(T, width)
        compiled = (alpha, beta, logs, coef)
        self._compiled[key] = compiled
        return compiled

    def evaluate(self, Z, dtype=np.complex128):
        """Evaluate at points ``Z`` of shape ``(m,)`` or ``(N, m)``.

        Returns shape ``()``/``(N,)`` for scalar series and ``(b,)``/``(N, b)``
        for vector series.
        """
        Z = np.asarray(Z, dtype=dtype)
        single = Z.ndim == 1
        if single:
            Z = Z[None, :]
        if Z.shape[1] != self.num_vars:
            raise ValueError(f"expected points with {self.num_vars} coordinates")
        N = Z.shape[0]
        width = self.shape or 1
        if not self._terms:
            out = np.zeros((N, width), dtype=dtype)
        else:
            alpha, beta, logs, coef = self._compile(dtype)
            mono = np.ones((alpha.shape[0], N), dtype=dtype)
            for j in range(self.num_vars):
                zj = Z[:, j]
                mono *= _power_table(zj, alpha[:, j])
                if self.log_kind == REAL:
                    mono *= _power_table(np.conj(zj), beta[:, j])
            for j in range(self.puncture_count):
                zj = Z[:, j]
                if self.log_kind == REAL:
                    L = -2.0 * np.log(np.abs(zj))
                else:
                    L = -np.log(zj)
                mono *= _power_table(L.astype(dtype), logs[:, j])
            out = coef.T @ mono  # (width, N)
            out = out.T
        if self.shape is None:
            out = out[:, 0]
        return out[0] if single else out


def _scalar_numeric(v, extended):
    if not extended:
        return scalar_to_complex(v)
    if _is_qqi(v):
        re = np.longdouble(int(v.x.numerator)) / np.longdouble(int(v.x.denominator))
        im = np.longdouble(int(v.y.numerator)) / np.longdouble(int(v.y.denominator))
        return np.clongdouble(re + 1j * im) if im == 0 else re + np.clongdouble(1j) * im
    return np.clongdouble(complex(v))


def _power_table(x, exps):
    """Return ``x**e`` for each exponent row, shape ``(len(exps), N)``."""
    lo, hi = int(exps.min()), int(exps.max())
    if lo == 0 and hi == 0:
        return np.ones((len(exps), x.shape[0]), dtype=x.dtype)
    table = {}
    for e in range(lo, hi + 1):
        if e == 0:
            table[e] = np.ones_like(x)
        elif e > 0:
            table[e] = x ** e
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                table[e] = (1.0 / x) ** (-e)
    stack = np.stack([table[e] for e in range(lo, hi + 1)])
    return stack[exps - lo]


def _norm_key(key, m, k):
    a, b, l, p = key
    a = tuple(int(x) for x in a)
    b = tuple(int(x) for x in b)
    l = tuple(int(x) for x in l)
    if len(a) != m or len(b) != m or len(l) != k:
        raise ValueError(f"term key {key!r} does not match m={m}, k={k}")
    if any(x < 0 for x in l):
        raise ValueError("negative log exponent")
    return (a, b, l, int(p))


def multi_indices(m: int, order: int):
    """All multi-indices of length ``m`` with total order exactly ``order``."""
    for idx in _iproduct(range(order + 1), repeat=m):
        if sum(idx) == order:
            yield idx
