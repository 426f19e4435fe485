"""Local nilpotent-orbit data of a polarized variation of Hodge structure.

A model is the tuple ``(n, Q, N_1..N_k, A(z))`` on a chart
``(punctured disk)^k x (disk)^(m-k)``; the period vector is

    Omega(z) = exp((i/2pi) * sum_j N_j * log(1/z_j)) * A(z)

and the Kaehler potential of the Weil-Petersson metric is
``(Omega, conj Omega) = s * i**n * Omega^T Q conj(Omega)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

import numpy as np
from sympy import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from .errors import (
    DegenerateFitError,
    DomainError,
    InsufficientSeriesDataError,
    ModelInconsistencyError,
    PositivityError,
)
from .series import HOL, REAL, LogSeries, TruncationResult, gaussian, scalar_to_complex

IMAG_TOL = 1e-10


# ---------------------------------------------------------------------------
# exact matrix helpers
# ---------------------------------------------------------------------------

def rational_matrix(rows) -> DomainMatrix:
    """Build an exact rational matrix from nested lists of ints/Fractions/'p/q'."""
    rows = [list(r) for r in rows]
    n = len(rows)
    width = len(rows[0]) if rows else 0
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix")
    data = [[_to_qq(x) for x in r] for r in rows]
    return DomainMatrix(data, (n, width), QQ)


def _to_qq(x):
    if isinstance(x, float):
        raise TypeError(f"float entry {x!r}; use 'p/q' strings")
    if isinstance(x, str):
        f = Fraction(x.strip())
        return QQ(f.numerator, f.denominator)
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    return QQ.convert(x)


def to_numpy(M: DomainMatrix) -> np.ndarray:
    rows = M.to_list()
    if M.domain == QQ_I:
        return np.array([[scalar_to_complex(x) for x in r] for r in rows], dtype=complex)
    return np.array([[float(x) for x in r] for r in rows], dtype=float)


def qq_rows(M: DomainMatrix) -> list[list[Fraction]]:
    return [[Fraction(int(x.numerator), int(x.denominator)) for x in r] for r in M.to_list()]


def nonzero_entries(M: DomainMatrix):
    out = []
    for i, r in enumerate(M.to_list()):
        for j, x in enumerate(r):
            if x:
                out.append((i, j, str(x)))
    return out


def _eye(b, dom=QQ):
    return DomainMatrix.eye(b, dom).to_dense()


def _matpow(M, e):
    R = _eye(M.shape[0], M.domain)
    for _ in range(e):
        R = R * M
    return R


def _vec_qqi(coef) -> DomainMatrix:
    return DomainMatrix([[c] for c in coef], (len(coef), 1), QQ_I)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PolarizationForm:
    weight: int
    matrix: DomainMatrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def array(self) -> np.ndarray:
        return to_numpy(self.matrix)

    def parity_defect(self):
        sign = QQ(-1) if self.weight % 2 else QQ(1)
        D = self.matrix.transpose() - self.matrix * sign
        return nonzero_entries(D)

    def determinant(self):
        return self.matrix.det()


@dataclass(frozen=True, eq=False)
class NilpotentFamily:
    operators: tuple
    weight: int

    def __len__(self):
        return len(self.operators)

    def arrays(self):
        return [to_numpy(N) for N in self.operators]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    offending: list = field(default_factory=list)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "offending": [list(map(str, o)) if isinstance(o, tuple) else str(o) for o in self.offending]}


@dataclass
class ValidationReport:
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"ok": self.ok, "checks": [c.to_dict() for c in self.checks]}


@dataclass(frozen=True, eq=False)
class VHSModel:
    """Nilpotent-orbit model.  Build with :meth:`from_data` for convenience.

    ``holomorphic_part`` is a vector :class:`LogSeries` without logs holding
    the coefficients ``A_alpha``.  ``known_order`` (optional) marks that the
    coefficients are only known through total degree ``known_order``.
    ``pairing_sign`` is auto-detected when ``None``; it is ``0`` when no sign
    makes the potential positive at the base point.
    """

    weight: int
    rank: int
    dim: int
    punctures: int
    polarization: PolarizationForm
    nilpotents: NilpotentFamily
    holomorphic_part: LogSeries
    radius: float
    base_point: tuple
    pairing_sign: int | None = None
    known_order: int | None = None
    name: str = ""
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.holomorphic_part.shape != self.rank:
            raise ValueError("holomorphic part must be a vector series of length rank")
        if self.holomorphic_part.num_vars != self.dim:
            raise ValueError("holomorphic part has the wrong number of variables")
        if len(self.nilpotents) != self.punctures:
            raise ValueError("one nilpotent operator per puncture is required")
        if len(self.base_point) != self.dim:
            raise ValueError("base point has the wrong number of coordinates")
        if self.holomorphic_part.max_log_power():
            raise ValueError("holomorphic part must not contain logarithms")
        object.__setattr__(self, "base_point", tuple(complex(x) for x in self.base_point))
        object.__setattr__(self, "radius", float(self.radius))
        if self.pairing_sign is None:
            object.__setattr__(self, "pairing_sign", _detect_sign(self))
        elif self.pairing_sign not in (-1, 0, 1):
            raise ValueError("pairing_sign must be +1, -1 or 0")

    # convenience -----------------------------------------------------------
    @classmethod
    def from_data(cls, weight, Q, nilpotents, coefficients, radius, base_point,
                  punctures=None, pairing_sign=None, known_order=None, name=""):
        """Build a model from plain Python data.

        ``coefficients`` maps power tuples ``(k_1..k_m)`` to length-``b``
        sequences of exact Gaussian rationals (ints, Fractions, ``'p/q'``
        strings or ``(re, im)`` pairs).
        """
        Qm = rational_matrix(Q)
        b = Qm.shape[0]
        Ns = tuple(rational_matrix(N) for N in nilpotents)
        k = len(Ns) if punctures is None else punctures
        coefficients = dict(coefficients)
        m = len(next(iter(coefficients)))
        terms = {}
        for powers, vec in coefficients.items():
            vec = tuple(gaussian(v) for v in vec)
            if len(vec) != b:
                raise ValueError("coefficient vector length differs from rank")
            terms[(tuple(powers), (0,) * m, (0,) * k, 0)] = vec
        A = LogSeries(m, k, terms, log_kind=HOL, radius=radius, shape=b)
        return cls(weight=weight, rank=b, dim=m, punctures=k,
                   polarization=PolarizationForm(weight, Qm),
                   nilpotents=NilpotentFamily(Ns, weight), holomorphic_part=A,
                   radius=radius, base_point=tuple(base_point), pairing_sign=pairing_sign,
                   known_order=known_order, name=name)

    def with_changes(self, **kw):
        data = {f: getattr(self, f) for f in (
            "weight", "rank", "dim", "punctures", "polarization", "nilpotents",
            "holomorphic_part", "radius", "base_point", "pairing_sign", "known_order", "name")}
        if "pairing_sign" not in kw:
            data["pairing_sign"] = None
        data.update(kw)
        return VHSModel(**data)

    @property
    def Q(self) -> np.ndarray:
        return self._cached("Q", lambda: self.polarization.array)

    @property
    def N(self) -> list:
        return self._cached("N", self.nilpotents.arrays)

    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def coefficient(self, powers) -> tuple:
        key = (tuple(powers), (0,) * self.dim, (0,) * self.punctures, 0)
        return self.holomorphic_part.terms.get(key, (QQ_I(0, 0),) * self.rank)

    @property
    def log_denominator(self) -> int:
        """Degree denominator used by orbit-type series (``n + 1``)."""
        return self.weight + 1

    @property
    def potential_log_denominator(self) -> int:
        """Degree denominator used for potential-type series (``m n + 1``)."""
        return self.dim * self.weight + 1


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _as_points(model, z):
    Z = np.asarray(z, dtype=complex)
    single = Z.ndim <= 1
    Z = np.atleast_2d(Z.reshape(-1, model.dim) if Z.ndim <= 1 else Z)
    return Z, single


def check_domain(model, Z):
    r = np.abs(Z)
    if np.any(r >= model.radius):
        bad = Z[np.any(r >= model.radius, axis=1)][0]
        raise DomainError(f"point {tuple(bad)} outside the convergence radius {model.radius}")
    if model.punctures and np.any(r[:, : model.punctures] == 0):
        raise DomainError("zero coordinate at a puncture")


def _orbit_apply(model, lam, vecs):
    """Apply exp((i/2pi) sum_j N_j lam_j) to ``vecs`` (N, b); ``lam`` is (N, k)."""
    if not model.punctures:
        return vecs
    Ns = model.N
    X = np.zeros((lam.shape[0], model.rank, model.rank), dtype=complex)
    for j, Nj in enumerate(Ns):
        X += (1j / (2 * math.pi)) * lam[:, j, None, None] * Nj[None, :, :]
    order = model.weight * model.punctures
    term = vecs.astype(complex)
    total = term.copy()
    for q in range(1, order + 1):
        term = np.einsum("nij,nj->ni", X, term) / q
        total = total + term
    return total


def principal_logs(model, Z):
    return -np.log(Z[:, : model.punctures])


def evaluate_omega(model: VHSModel, z, check=True):
    """Period vector ``Omega(z)``; accepts one point ``(m,)`` or a batch ``(N, m)``."""
    Z, single = _as_points(model, z)
    if check:
        check_domain(model, Z)
    A = model.holomorphic_part.evaluate(Z)
    out = _orbit_apply(model, principal_logs(model, Z), A)
    return out[0] if single else out


def omega_on_branch(model, z, logs):
    """``Omega`` with explicitly prescribed values of ``log(1/z_j)``."""
    Z, single = _as_points(model, z)
    lam = np.atleast_2d(np.asarray(logs, dtype=complex))
    out = _orbit_apply(model, lam, model.holomorphic_part.evaluate(Z))
    return out[0] if single else out


def pairing(model: VHSModel, u, v):
    """``s * i**n * u^T Q conj(v)``; broadcasts over leading axes."""
    if model.pairing_sign == 0:
        raise ModelInconsistencyError(
            "pairing at the base point is not real and nonzero; no sign normalization exists")
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    raw = np.einsum("...i,ij,...j->...", u, model.Q, np.conj(v))
    return model.pairing_sign * (1j ** model.weight) * raw


def _detect_sign(model) -> int:
    try:
        z0 = np.array(model.base_point)
        om = evaluate_omega(model, z0, check=False)
    except Exception:
        return 0
    raw = (1j ** model.weight) * (om @ model.Q @ np.conj(om))
    if not np.isfinite(raw) or raw == 0:
        return 0
    if abs(raw.imag) > 1e-12 * abs(raw):
        return 0
    return 1 if raw.real > 0 else -1


def potential(model: VHSModel, z, tol=IMAG_TOL):
    """``(Omega, conj Omega)`` at ``z``; raises :class:`PositivityError` if not real positive."""
    Z, single = _as_points(model, z)
    om = evaluate_omega(model, Z)
    val = pairing(model, om, om)
    bad = (np.abs(val.imag) > tol * np.abs(val)) | (val.real <= 0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise PositivityError(f"positivity violated at {tuple(Z[i])}: value {val[i]}",
                              point=tuple(Z[i]), value=complex(val[i]))
    out = val.real
    return float(out[0]) if single else out


# ---------------------------------------------------------------------------
# exact series
# ---------------------------------------------------------------------------

def _log_multi_indices(model):
    n, k = model.weight, model.punctures
    return list(iproduct(range(n + 1), repeat=k))


def _log_operator(model, l, factor):
    """``prod_j factor**l_j / l_j! * N_j**l_j`` over QQ_I (``factor`` Gaussian)."""
    b = model.rank
    M = _eye(b, QQ_I)
    c = QQ_I(1, 0)
    for j, e in enumerate(l):
        if e:
            Nj = model.nilpotents.operators[j].convert_to(QQ_I)
            M = M * _matpow(Nj, e)
            c = c * factor ** e * QQ_I(QQ(1, math.factorial(e)), 0)
    return M * c if c != QQ_I(1, 0) else M


def omega_series(model: VHSModel) -> LogSeries:
    """Exact expansion of ``Omega`` in ``z`` and ``log(1/z_j)``."""
    def build():
        terms = {}
        half_i = QQ_I(0, QQ(1, 2))
        for l in _log_multi_indices(model):
            M = _log_operator(model, l, half_i)
            if M.is_zero_matrix:
                continue
            for (a, b, _, p), vec in model.holomorphic_part.items():
                col = M * _vec_qqi(vec)
                out = tuple(r[0] for r in col.to_list())
                key = (a, b, l, p + sum(l))
                terms[key] = out
        return LogSeries(model.dim, model.punctures, terms, log_kind=HOL,
                         radius=model.radius, shape=model.rank)
    return model._cached("omega_series", build)


def _full_potential_series(model):
    def build():
        if model.pairing_sign == 0:
            raise ModelInconsistencyError("pairing sign undetermined; potential series undefined")
        prefactor = QQ_I(model.pairing_sign, 0) * QQ_I(0, 1) ** model.weight
        Q = model.polarization.matrix.convert_to(QQ_I)
        m, k = model.dim, model.punctures
        A = list(model.holomorphic_part.items())
        minus_half_i = QQ_I(0, QQ(-1, 2))
        terms = {}
        for l in _log_multi_indices(model):
            M = _log_operator(model, l, minus_half_i)
            if M.is_zero_matrix:
                continue
            QM = Q * M
            for (a1, _, _, p1), v1 in A:
                row = _vec_qqi(v1).transpose() * QM
                for (a2, _, _, p2), v2 in A:
                    col = _vec_qqi(tuple(QQ_I(c.x, -c.y) for c in v2))
                    c = (row * col).to_list()[0][0]
                    if not c:
                        continue
                    key = (a1, a2, l, p1 + p2 + sum(l))
                    c = c * prefactor
                    terms[key] = terms[key] + c if key in terms else c
        return LogSeries(m, k, terms, log_kind=REAL, radius=model.radius)
    return model._cached("potential_series", build)


def potential_series(model: VHSModel, total_degree_cap=None, log_denominator=None) -> LogSeries:
    """Exact expansion ``sum A_{s,t,l} z^s conj(z)^t (log 1/|z|^2)^l`` of the potential.

    Degrees are ``s + t - l/D`` with ``D = m n + 1`` unless overridden.  When
    the model only knows its coefficients through ``known_order`` and the cap
    would need more data, raises :class:`InsufficientSeriesDataError`.
    """
    full = _full_potential_series(model)
    D = log_denominator or model.potential_log_denominator
    lmax = model.weight * model.punctures
    if model.known_order is not None:
        if total_degree_cap is None:
            total_degree_cap = model.known_order
        needed = math.floor(Fraction(total_degree_cap) + Fraction(lmax, D))
        if needed > model.known_order:
            raise InsufficientSeriesDataError(
                f"insufficient series data: degree cap {total_degree_cap} needs coefficients "
                f"through order {needed}, model provides order {model.known_order}",
                needed_order=needed, known_order=model.known_order)
        keep = {key: c for key, c in full.items()
                if sum(key[0]) + sum(key[1]) <= model.known_order}
        full = LogSeries(full.num_vars, full.puncture_count, keep, radius=full.radius)
    if total_degree_cap is None:
        return full
    return full.truncate(total_degree_cap, D).series


def truncate(series: LogSeries, mu, log_denominator=None, var=None) -> TruncationResult:
    """Keep terms with ``deg f_{k,l} = k - l/D <= mu``.

    ``D`` defaults to one more than the largest log power found in the series
    (``n + 1`` for a period series whose top nilpotent power is nonzero).
    """
    if log_denominator is None:
        per_var = [max((key[2][j] for key in series.terms), default=0)
                   for j in range(series.puncture_count)]
        log_denominator = max(per_var, default=0) + 1
    return series.truncate(mu, log_denominator, var=var)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate(model: VHSModel) -> ValidationReport:
    checks = []
    n, b = model.weight, model.rank
    Q = model.polarization.matrix
    checks.append(Check("dimensions", Q.shape == (b, b) and all(N.shape == (b, b) for N in model.nilpotents.operators),
                        f"rank {b}, {len(model.nilpotents)} nilpotents"))
    defect = model.polarization.parity_defect()
    checks.append(Check("Q parity", not defect,
                        f"Q^T = (-1)^{n} Q", offending=defect))
    det = model.polarization.determinant()
    checks.append(Check("Q nondegenerate", bool(det), f"det Q = {det}"))
    ops = model.nilpotents.operators
    for j, N in enumerate(ops):
        P = _matpow(N, n + 1)
        bad = nonzero_entries(P)
        checks.append(Check(f"N_{j + 1} nilpotent", not bad, f"N_{j + 1}^{n + 1} = 0", offending=bad))
        L = N.transpose() * Q + Q * N
        bad = nonzero_entries(L)
        checks.append(Check(f"N_{j + 1} preserves Q", not bad, "N^T Q + Q N = 0", offending=bad))
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            C = ops[i] * ops[j] - ops[j] * ops[i]
            bad = nonzero_entries(C)
            checks.append(Check(f"N_{i + 1} N_{j + 1} commute", not bad, "", offending=bad))
    A0 = model.coefficient((0,) * model.dim)
    checks.append(Check("A(0) nonzero", any(bool(c) for c in A0), f"A_0 = {[str(c) for c in A0]}"))
    z0 = np.array(model.base_point)
    in_dom = bool(np.all(np.abs(z0) < model.radius) and np.all(np.abs(z0[: model.punctures]) > 0))
    checks.append(Check("base point in domain", in_dom, f"base point {model.base_point}"))
    detail = "pairing sign s = %+d" % model.pairing_sign if model.pairing_sign else "no sign makes the potential real positive"
    ok = model.pairing_sign != 0
    if ok and in_dom:
        try:
            val = potential(model, z0)
            detail += f"; potential(base point) = {val:.12g}"
        except PositivityError as exc:
            ok = False
            detail = str(exc)
    checks.append(Check("potential positive at base point", ok, detail))
    return ValidationReport(checks)


# ---------------------------------------------------------------------------
# probes
# ---------------------------------------------------------------------------

@dataclass
class ProbeResult:
    k_hat: float | None
    l_hat: float | None
    k0: int | None
    l0: int | None
    s: int
    exact: bool
    radii: list
    errors: list
    leading_dropped: tuple | None = None

    def to_dict(self):
        return dict(self.__dict__)


def _circle_points(model, var, r, n_angles):
    theta = np.linspace(-math.pi, math.pi, n_angles, endpoint=False) + math.pi / n_angles
    Z = np.tile(np.array(model.base_point, dtype=complex), (n_angles, 1))
    Z[:, var] = r * np.exp(1j * theta)
    return Z


def truncation_error_probe(model: VHSModel, mu, s: int, radii, variable: int = 0,
                           n_angles: int = 64, log_denominator=None) -> ProbeResult:
    """Fit ``log ||Omega - trunc||_{C^s}`` against ``k log r + l log log(1/r)``.

    The ``C^s`` norm on a circle is the maximum over derivative orders
    ``0..s`` (in ``z_variable``) of the sup over sampled angles of the
    Euclidean norm of the remainder.  The remainder is evaluated from its
    own series, so tiny errors deep inside the disk are still resolved;
    ``exact`` means the remainder vanishes identically.
    """
    radii = [float(r) for r in radii]
    if any(r2 >= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    if radii and radii[0] >= model.radius:
        raise DomainError("radii must lie inside the convergence radius")
    D = log_denominator or model.log_denominator
    S = omega_series(model)
    res = S.truncate(mu, D, var=None)
    dropped = S - res.series
    derivs = [dropped]
    for _ in range(s):
        derivs.append(derivs[-1].diff(variable))
    errs = []
    for r in radii:
        Z = _circle_points(model, variable, r, n_angles)
        e = 0.0
        for d in derivs:
            if d.is_zero():
                continue
            vals = d.evaluate(Z)
            e = max(e, float(np.max(np.linalg.norm(vals, axis=1))))
        errs.append(e)
    if all(d.is_zero() for d in derivs):
        return ProbeResult(None, None, res.k0, res.l0, s, True, radii, errs, res.leading_dropped)
    good = [(r, e) for r, e in zip(radii, errs) if e > 0]
    if len(good) < 3:
        raise DegenerateFitError("fewer than three radii with nonzero error")
    lr = np.log([r for r, _ in good])
    llr = np.log(-lr)
    X = np.column_stack([np.ones_like(lr), lr, llr])
    y = np.log([e for _, e in good])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return ProbeResult(float(coef[1]), float(coef[2]), res.k0, res.l0, s, False, radii, errs,
                       res.leading_dropped)


@dataclass
class UntwistReport:
    cut_residual: float
    growth_ratios: list
    single_valued: bool
    bounded: bool
    samples: int

    @property
    def ok(self):
        return self.single_valued and self.bounded

    def to_dict(self):
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def _untwist(model, Z, lam):
    om = omega_on_branch(model, Z, lam)
    return _orbit_apply(model, -lam, om)


def untwist_check(model: VHSModel, sample_count: int = 16, cut_tol=1e-10, ratio_bound=1.5) -> UntwistReport:
    """Check that ``psi = exp(-(i/2pi) sum N_j log 1/z_j) Omega`` is single valued and bounded.

    (a) ``psi`` is evaluated exactly on the cut ``theta = pi`` from both sides
    (logs ``-log r - i pi`` and ``-log r + i pi``) and compared.
    (b) ``|psi|`` is evaluated at radii ``r_q = exp(-u_0 2^q)``; any growth of
    the form ``(log 1/r)^p`` doubles the ratio of consecutive values, so the
    ratios must stay below ``ratio_bound``.
    """
    rng = np.random.default_rng(12345)
    z0 = np.array(model.base_point, dtype=complex)
    worst = 0.0
    ratios = []
    for j in range(model.punctures):
        radii = model.radius * rng.uniform(0.05, 0.95, size=sample_count)
        Z = np.tile(z0, (sample_count, 1))
        Z[:, j] = -radii  # theta = pi
        lam_plus = principal_logs(model, Z)
        lam_minus = lam_plus.copy()
        lam_minus[:, j] = -np.log(radii) + 1j * math.pi
        psi_p = _untwist(model, Z, lam_plus)
        psi_m = _untwist(model, Z, lam_minus)
        denom = np.maximum(np.linalg.norm(psi_p, axis=1), 1e-300)
        worst = max(worst, float(np.max(np.linalg.norm(psi_p - psi_m, axis=1) / denom)))
        u0 = -math.log(0.9 * model.radius)
        angles = rng.uniform(-math.pi, math.pi, size=min(sample_count, 8))
        for th in angles:
            prev = None
            for q in range(9):
                u = u0 * 2 ** q
                zz = z0.copy()
                zz[j] = math.exp(-u) * cmath.exp(1j * th)
                Zq = zz[None, :]
                psi = _untwist(model, Zq, principal_logs(model, Zq))[0]
                val = float(np.linalg.norm(psi))
                if prev is not None and prev > 0:
                    ratios.append(val / prev)
                prev = val
    single = worst < cut_tol
    tail = ratios[-4:] if ratios else []
    bounded = all(x < ratio_bound for x in ratios) if ratios else True
    return UntwistReport(worst, tail, single, bounded, sample_count)
