"""Weil-Petersson metric, Hodge decomposition, curvature and Ricci forms.

All derivatives of the potential are taken symbolically on its exact series
and then evaluated.  The metric is ``g_{i jbar} = -d_i dbar_j log P`` with
``P = (Omega, conj Omega)``; the curvature convention is

    R_{i jbar k lbar} = d_k dbar_l g_{i jbar} - g^{p qbar} d_k g_{i qbar} dbar_l g_{p jbar},

for which the elliptic model has ``R = 2 g^2`` and ``Ric_{i jbar} =
-g^{k lbar} R_{i jbar k lbar}`` has ``Ric + 2 m g >= 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .errors import DegenerateMetricError, FlagDimensionError, HodgeSignatureError
from .model import VHSModel, _as_points, check_domain, omega_series, pairing, potential_series
from .poincare import PoincareChart, poincare_diagonal
from .tensors import CurvatureTensor, MetricTensor, generalized_eigenvalues, hermitian_part

CONVENTION = ("raw section Omega; pairing s*i^n*u^T Q conj(v); "
              "R = d d-bar g - g^-1 dg d-bar g (so R = 2g^2 at weight 1); Ric = -g^{k lbar} R_{i jbar k lbar}")
DEGENERACY_TOL = 1e-12


# ---------------------------------------------------------------------------
# potential jets
# ---------------------------------------------------------------------------

def _series_derivative(model, hol, anti):
    key = ("P", tuple(sorted(hol)), tuple(sorted(anti)))
    if key not in model._cache:
        if not hol and not anti:
            model._cache[key] = potential_series(model)
        else:
            if anti:
                parent = _series_derivative(model, hol, anti[:-1])
                model._cache[key] = parent.diff(sorted(anti)[-1], anti=True)
            else:
                parent = _series_derivative(model, hol[:-1], ())
                model._cache[key] = parent.diff(sorted(hol)[-1])
    return model._cache[key]


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


class PotentialJet:
    """Derivatives of ``P`` and of ``log P`` at a batch of points."""

    def __init__(self, model: VHSModel, Z, dtype=np.complex128):
        self.model = model
        self.Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        self.dtype = dtype
        self._p = {}
        self._k = {}

    def P(self, hol=(), anti=()):
        key = (tuple(sorted(hol)), tuple(sorted(anti)))
        if key not in self._p:
            s = _series_derivative(self.model, key[0], key[1])
            self._p[key] = np.asarray(s.evaluate(self.Z, dtype=self.dtype), dtype=complex)
        return self._p[key]

    def K(self, hol=(), anti=()):
        """Derivative of ``log P`` via the set-partition (cumulant) formula."""
        key = (tuple(sorted(hol)), tuple(sorted(anti)))
        if key in self._k:
            return self._k[key]
        tokens = [("h", i) for i in key[0]] + [("a", j) for j in key[1]]
        P0 = self.P()
        total = np.zeros(self.Z.shape[0], dtype=complex)
        for part in _set_partitions(tokens):
            q = len(part)
            term = ((-1) ** (q - 1)) * math.factorial(q - 1) * np.ones_like(total)
            for block in part:
                h = [i for t, i in block if t == "h"]
                a = [i for t, i in block if t == "a"]
                term = term * self.P(h, a) / P0
            total = total + term
        self._k[key] = total
        return total

    # metric pieces; index layout [n, ...]
    def metric(self):
        m = self.model.dim
        G = np.empty((self.Z.shape[0], m, m), dtype=complex)
        for i in range(m):
            for j in range(m):
                G[:, i, j] = -self.K((i,), (j,))
        return G

    def metric_derivatives(self):
        m, N = self.model.dim, self.Z.shape[0]
        dg = np.empty((N, m, m, m), dtype=complex)   # [n, k, i, j] = d_k g_{i jbar}
        dgb = np.empty((N, m, m, m), dtype=complex)  # [n, l, i, j] = dbar_l g_{i jbar}
        ddg = np.empty((N, m, m, m, m), dtype=complex)  # [n, k, l, i, j]
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    dg[:, k, i, j] = -self.K((i, k), (j,))
                    dgb[:, k, i, j] = -self.K((i,), (j, k))
                    for l in range(m):
                        ddg[:, k, l, i, j] = -self.K((i, k), (j, l))
        return dg, dgb, ddg


def _check_metric(G, Z, strict):
    G = hermitian_part(G)
    ev = np.linalg.eigvalsh(G)
    scale = np.maximum(np.max(np.abs(ev), axis=1), 1e-300)
    bad = ev[:, 0] <= DEGENERACY_TOL * scale
    bad |= np.max(np.abs(ev), axis=1) == 0
    if strict and np.any(bad):
        i = int(np.argmax(bad))
        raise DegenerateMetricError(
            f"metric not positive definite at {tuple(Z[i])}; eigenvalues {ev[i].tolist()}",
            metric=G[i], eigenvalues=ev[i])
    return G, ev, bad


def metric_batch(model: VHSModel, Z, strict=True, dtype=np.complex128):
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    check_domain(model, Z)
    jet = PotentialJet(model, Z, dtype)
    G, _, _ = _check_metric(jet.metric(), Z, strict)
    return G


def wp_metric(model: VHSModel, z, strict: bool = True) -> MetricTensor:
    """``g_{i jbar} = -d_i dbar_j log P`` at one point.

    With ``strict`` a non-positive-definite result raises
    :class:`DegenerateMetricError` (carrying the matrix and eigenvalues);
    otherwise it is returned with ``degenerate=True``.
    """
    Z, _ = _as_points(model, z)
    check_domain(model, Z)
    jet = PotentialJet(model, Z)
    G, ev, bad = _check_metric(jet.metric(), Z, strict)
    return MetricTensor(point=tuple(Z[0]), matrix=G[0], eigenvalues=ev[0], degenerate=bool(bad[0]))


def curvature_batch(model: VHSModel, Z, dtype=np.complex128):
    """Return ``(G, R, Ric)`` from the potential alone; shapes ``(N,m,m)``, ``(N,m,m,m,m)``, ``(N,m,m)``."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    check_domain(model, Z)
    jet = PotentialJet(model, Z, dtype)
    G, _, _ = _check_metric(jet.metric(), Z, True)
    Ginv = np.linalg.inv(G)
    dg, dgb, ddg = jet.metric_derivatives()
    R = np.einsum("nklij->nijkl", ddg) - np.einsum("nqp,nkiq,nlpj->nijkl", Ginv, dg, dgb)
    Ric = -np.einsum("nlk,nijkl->nij", Ginv, R)
    return G, R, Ric


def curvature_direct(model: VHSModel, z) -> CurvatureTensor:
    """Curvature from fourth derivatives of ``log P`` (no Hodge theory)."""
    Z, _ = _as_points(model, z)
    _, R, _ = curvature_batch(model, Z)
    return CurvatureTensor(point=tuple(Z[0]), components=R[0], convention=CONVENTION)


def ricci_logdet_batch(model: VHSModel, Z):
    """``-d_i dbar_j log det g`` via Jacobi's formula on the metric jet."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    jet = PotentialJet(model, Z)
    G, _, _ = _check_metric(jet.metric(), Z, True)
    Ginv = np.linalg.inv(G)
    dg, dgb, ddg = jet.metric_derivatives()
    # d_i dbar_j log det G = tr(G^-1 d_i dbar_j G) - tr(G^-1 d_i G G^-1 dbar_j G)
    t1 = np.einsum("nba,nijab->nij", Ginv, ddg)
    A = np.einsum("nba,nicb->nica", Ginv, dg)    # (G^-1 d_i G) as [n, i, c, a] with matrix indices
    B = np.einsum("nba,njcb->njca", Ginv, dgb)
    t2 = np.einsum("niac,njca->nij", A, B)
    return -(t1 - t2)


def ricci(model: VHSModel, z, method: str = "contraction") -> MetricTensor:
    """Ricci form ``-g^{k lbar} R_{i jbar k lbar}`` (``method="contraction"``, using
    the Strominger tensor) or ``-d dbar log det g`` (``method="logdet"``)."""
    Z, _ = _as_points(model, z)
    if method == "logdet":
        Ric = ricci_logdet_batch(model, Z)[0]
    elif method == "contraction":
        R = strominger_curvature(model, Z[0]).components
        G = wp_metric(model, Z[0]).matrix
        Ric = -np.einsum("lk,ijkl->ij", np.linalg.inv(G), R)
    elif method == "direct":
        Ric = curvature_batch(model, Z)[2][0]
    else:
        raise ValueError(f"unknown method {method!r}")
    Ric = hermitian_part(Ric)
    return MetricTensor(point=tuple(Z[0]), matrix=Ric, eigenvalues=np.linalg.eigvalsh(Ric))


# ---------------------------------------------------------------------------
# Hodge decomposition
# ---------------------------------------------------------------------------

@dataclass
class HodgeDecomposition:
    point: tuple
    flag: dict       # p -> orthonormal basis (b x dim F^p)
    hodge: dict      # (p, q) -> basis (b x h^{p,q})
    weight: int

    @property
    def flag_dims(self):
        return tuple(self.flag[p].shape[1] for p in range(self.weight, -1, -1))

    @property
    def hodge_numbers(self):
        return {pq: B.shape[1] for pq, B in self.hodge.items()}

    def to_dict(self):
        return {"flag_dims": list(self.flag_dims),
                "hodge_numbers": {f"{p},{q}": d for (p, q), d in self.hodge_numbers.items()}}


def _omega_jet_series(model, multi_index, euler=True):
    key = ("O", tuple(multi_index), euler)
    if key not in model._cache:
        s = omega_series(model)
        for j, e in enumerate(multi_index):
            for _ in range(e):
                s = s.euler(j) if (euler and j < model.punctures) else s.diff(j)
        model._cache[key] = s
    return model._cache[key]


def _orthonormal_span(M, tol=1e-9):
    if M.shape[1] == 0:
        return M
    norms = np.linalg.norm(M, axis=0)
    M = M[:, norms > 0] / norms[norms > 0]
    if M.shape[1] == 0:
        return M
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > tol * s[0]))
    return U[:, :rank]


def _intersect(U, V, tol=1e-9):
    """Orthonormal basis of span(U) intersect span(V) for orthonormal inputs."""
    b = U.shape[0]
    if U.shape[1] == 0 or V.shape[1] == 0:
        return np.zeros((b, 0), dtype=complex)
    M = np.hstack([U, -V])
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    s = np.concatenate([s, np.zeros(M.shape[1] - len(s))])
    null = Vh[s <= tol * s[0]].conj().T
    if null.shape[1] == 0:
        return np.zeros((b, 0), dtype=complex)
    return _orthonormal_span(U @ null[: U.shape[1]])


def hodge_flag(model: VHSModel, z) -> HodgeDecomposition:
    """Hodge filtration from derivatives of ``Omega`` and ``H^{p,q} = F^p cap conj(F^q)``."""
    Z, _ = _as_points(model, z)
    check_domain(model, Z)
    n, m, b = model.weight, model.dim, model.rank
    zz = Z[0]
    cols = {0: [_omega_jet_series(model, (0,) * m).evaluate(zz)]}
    for order in range(1, n + 1):
        cols[order] = []
        for combo in combinations_with_replacement(range(m), order):
            idx = [0] * m
            for j in combo:
                idx[j] += 1
            cols[order].append(_omega_jet_series(model, tuple(idx)).evaluate(zz))
    flag = {}
    acc = []
    prev = 0
    for p in range(0, n + 1):  # F^{n-p} from derivatives of order <= p
        acc.extend(cols[p])
        B = _orthonormal_span(np.column_stack(acc))
        d = B.shape[1]
        expected = {0: 1, 1: 1 + m}.get(p)
        if (expected is not None and d != min(expected, b)) or d < prev or (p == n and d != b):
            want = expected if expected is not None else (b if p == n else f">= {prev}")
            raise FlagDimensionError(
                f"dim F^{n - p} = {d} at {tuple(zz)}, expected {want}", p=n - p, expected=want, found=d)
        prev = d
        flag[n - p] = B
    hodge = {}
    for p in range(n, -1, -1):
        q = n - p
        H = _intersect(flag[p], np.conj(flag[q]))
        hodge[(p, q)] = H
    dims = {pq: B.shape[1] for pq, B in hodge.items()}
    if sum(dims.values()) != b or any(dims[(p, q)] != dims[(q, p)] for (p, q) in dims):
        bad = next(p for (p, q) in dims if dims[(p, q)] != dims[(q, p)]) if any(
            dims[(p, q)] != dims[(q, p)] for (p, q) in dims) else n
        raise FlagDimensionError(f"Hodge numbers {dims} do not decompose rank {b}", p=bad,
                                 expected=b, found=sum(dims.values()))
    for (p, q), B in hodge.items():
        if B.shape[1] == 0:
            continue
        Gm = ((-1) ** q) * pairing(model, B.T[:, None, :], B.T[None, :, :])
        ev = np.linalg.eigvalsh(hermitian_part(Gm))
        if ev[0] <= 0:
            raise HodgeSignatureError(f"Hodge form not positive on H^{p},{q} at {tuple(zz)}: {ev}")
    return HodgeDecomposition(point=tuple(zz), flag=flag, hodge=hodge, weight=n)


def _decompose(dec: HodgeDecomposition, v):
    blocks = [(pq, B) for pq, B in dec.hodge.items() if B.shape[1]]
    W = np.column_stack([B for _, B in blocks])
    c = np.linalg.solve(W, np.asarray(v, dtype=complex))
    out, i = {}, 0
    for pq, B in blocks:
        d = B.shape[1]
        out[pq] = B @ c[i:i + d]
        i += d
    return out


def project_Hn22(model: VHSModel, z, v, decomposition: HodgeDecomposition | None = None):
    """Component of ``v`` in ``H^{n-2,2}`` for the direct-sum Hodge decomposition."""
    n = model.weight
    v = np.asarray(v, dtype=complex)
    if n < 2:
        return np.zeros_like(v)
    dec = decomposition or hodge_flag(model, z)
    parts = _decompose(dec, v)
    return parts.get((n - 2, 2), np.zeros_like(v))


def strominger_curvature(model: VHSModel, z) -> CurvatureTensor:
    """``R = g g + g g - (D_k D_i Omega, conj D_l D_j Omega)/(Omega, conj Omega)``."""
    Z, _ = _as_points(model, z)
    zz = Z[0]
    m = model.dim
    G = wp_metric(model, zz).matrix
    R = np.einsum("ij,kl->ijkl", G, G) + np.einsum("il,kj->ijkl", G, G)
    if model.weight >= 2:
        dec = hodge_flag(model, zz)
        P = float(np.real(pairing(model, omega_series(model).evaluate(zz), omega_series(model).evaluate(zz))))
        DD = {}
        for i in range(m):
            for k in range(m):
                idx = [0] * m
                idx[i] += 1
                idx[k] += 1
                v = _omega_jet_series(model, tuple(idx), euler=False).evaluate(zz)
                DD[(k, i)] = project_Hn22(model, zz, v, dec)
        for i, j, k, l in np.ndindex(m, m, m, m):
            R[i, j, k, l] -= pairing(model, DD[(k, i)], DD[(l, j)]) / P
    return CurvatureTensor(point=tuple(zz), components=R, convention=CONVENTION)


# ---------------------------------------------------------------------------
# comparison with the Poincare metric
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    radii: list
    c1: list
    c2: list
    stable: bool

    @property
    def c1_max(self):
        return max(self.c1) if self.c1 else None

    @property
    def c2_max(self):
        vals = [c for c in self.c2 if c is not None]
        return max(vals) if vals else None

    def to_dict(self):
        d = dict(self.__dict__)
        d.update(c1_max=self.c1_max, c2_max=self.c2_max)
        return d


def _ray_points(model, chart, r, n_angles, rng):
    theta = rng.uniform(-math.pi, math.pi, (n_angles, model.dim))
    Z = np.tile(np.array(model.base_point, dtype=complex), (n_angles, 1))
    for j in range(chart.puncture_count):
        Z[:, j] = r * np.exp(1j * theta[:, j])
    return Z


def poincare_bound_probe(model: VHSModel, chart: PoincareChart, radii, n_angles: int = 16,
                         seed: int = 0) -> BoundReport:
    """Per-radius smallest ``c1, c2`` with ``g <= c1 omega_P`` and ``|Ric| <= c2 omega_P``.

    Each sample puts every puncture coordinate at radius ``r`` (random
    angles) and keeps the remaining coordinates at the base point.  ``c2`` is
    ``None`` where the metric is degenerate.  ``stable`` asserts that the
    constants for the deepest radii do not grow (within 10%).
    """
    rng = np.random.default_rng(seed)
    c1s, c2s = [], []
    for r in radii:
        Z = _ray_points(model, chart, r, n_angles, rng)
        check_domain(model, Z)
        D = poincare_diagonal(chart, Z)
        jet = PotentialJet(model, Z)
        G, _, bad = _check_metric(jet.metric(), Z, strict=False)
        c1s.append(float(np.max(generalized_eigenvalues(G, D))))
        if np.any(bad):
            c2s.append(None)
            continue
        _, _, Ric = curvature_batch(model, Z)
        c2s.append(float(np.max(np.abs(generalized_eigenvalues(Ric, D)))))

    def nongrowing(vals):
        vals = [v for v in vals if v is not None]
        if len(vals) < 2:
            return True
        tail = vals[-3:]
        return all(b <= 1.1 * a + 1e-300 for a, b in zip(tail, tail[1:])) or (
            max(tail) <= 1.1 * min(tail))

    stable = nongrowing(c1s) and nongrowing(c2s)
    return BoundReport(list(map(float, radii)), c1s, c2s, stable)
