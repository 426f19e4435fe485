"""Cut-off weighted integrals of Weil-Petersson forms over punctured polydisk charts.

Puncture variables are integrated in ``s = 1/log(1/r)``: the Poincare area
``dA / (r^2 log(1/r)^2)`` equals ``ds dtheta``, so equal cells in ``s`` carry
equal Poincare volume however deep the chart reaches.  The ``s`` range of
each puncture variable is split at ``s = 2 eps`` where the cut-off ``rho_eps``
stops being smooth; each piece is mapped linearly onto ``[0, 1]`` for every
angle, which also absorbs angle-dependent outer radii (the modular chart).
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMetricError, DomainError, PositivityError
from .model import VHSModel, check_domain
from .poincare import PoincareChart, rho_eps
from .tensors import hermitian_part
from .wpmetric import DEGENERACY_TOL, PotentialJet, curvature_batch

MIN_EPS = 1.0 / 150.0        # below this, r = e^{-1/eps} drives curvature terms out of double range
CHUNK = 16384
RELATIVE_FLOOR = 1e-13

_GAUSS2 = (np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)]), np.array([0.5, 0.5]))
_MIDPOINT = (np.array([0.5]), np.array([1.0]))


def thread_count(threads=None) -> int:
    if threads is None:
        threads = int(os.environ.get("WPG_THREADS", "1") or 1)
    return max(1, int(threads))


def _axis(n, rule):
    """Nodes, weights and cell index of an ``n``-cell composite rule on ``[0, 1]``."""
    x0, w0 = rule
    edges = np.arange(n)[:, None]
    x = ((edges + x0[None, :]) / n).ravel()
    w = np.broadcast_to(w0 / n, (n, len(w0))).ravel()
    c = np.repeat(np.arange(n), len(x0))
    return x, w, c


def _s_of_r(r):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(r > 0, 1.0 / -np.log(np.where(r > 0, r, 0.5)), 0.0)


@dataclass
class VariableNodes:
    """Quadrature nodes for one variable (all angles, radial pieces and cells)."""

    z: np.ndarray
    weight: np.ndarray          # includes the Jacobian to Euclidean area dx dy
    cell: np.ndarray
    s: np.ndarray               # log-log radius (inf for disk variables)
    poincare: np.ndarray        # Poincare area density 1/(r^2 log(1/r)^2), or 1
    cell_bounds: list           # per cell: (piece, radial lo, radial hi, theta lo, theta hi)


@dataclass
class CellDecomposition:
    """Tensor product of per-variable cells at a refinement level."""

    variables: list
    level: int
    per_axis: int
    eps: float | None

    @property
    def cell_count(self) -> int:
        return int(np.prod([len(v.cell_bounds) for v in self.variables]))

    @property
    def node_count(self) -> int:
        return int(np.prod([len(v.z) for v in self.variables]))


def _variable_nodes(chart: PoincareChart, j: int, eps, n: int, rule) -> VariableNodes:
    xt, wt, ct = _axis(n, rule)
    theta = -math.pi + 2 * math.pi * xt
    wtheta = 2 * math.pi * wt
    outer = chart.outer_at(j, theta)
    inner = chart.inner_radius[j]
    xr, wr, cr = _axis(n, rule)
    zs, ws, cs, ss, ps, bounds = [], [], [], [], [], []
    if j < chart.puncture_count:
        s_in = float(_s_of_r(inner))
        s_hi = _s_of_r(outer)
        s_lo = np.full_like(s_hi, max(s_in, eps) if eps is not None else s_in)
        s_lo = np.minimum(s_lo, s_hi)
        if eps is not None and s_in < 2 * eps:
            mid = np.clip(2 * eps, s_lo, s_hi)
            pieces = [(s_lo, mid), (mid, s_hi)]
        else:
            pieces = [(s_lo, s_hi)]
        ncell_theta = n
        for p, (lo, hi) in enumerate(pieces):
            # node grid: theta nodes (rows) x radial nodes (columns)
            L = (hi - lo)[:, None]
            s = lo[:, None] + xr[None, :] * L
            with np.errstate(divide="ignore", over="ignore"):
                r = np.exp(-1.0 / np.where(s > 0, s, 1.0))
            r = np.where(s > 0, r, 0.0)
            w = wtheta[:, None] * wr[None, :] * L * np.where(s > 0, r * r / np.where(s > 0, s * s, 1.0), 0.0)
            zs.append((r * np.exp(1j * theta)[:, None]).ravel())
            ws.append(w.ravel())
            cs.append((p * n * ncell_theta + cr[None, :] * ncell_theta + ct[:, None]).ravel())
            ss.append(s.ravel())
            with np.errstate(divide="ignore"):
                ps.append((1.0 / (r * r * np.log(np.where(r > 0, r, 0.5)) ** 2)).ravel())
            for rc in range(n):
                for tc in range(ncell_theta):
                    t_mid = -math.pi + 2 * math.pi * (tc + 0.5) / ncell_theta
                    o = float(chart.outer_at(j, np.array([t_mid]))[0])
                    sh = float(_s_of_r(o))
                    sl = min(max(s_in, eps) if eps is not None else s_in, sh)
                    if len(pieces) == 2:
                        a, b = (sl, min(max(2 * eps, sl), sh)) if p == 0 else (min(max(2 * eps, sl), sh), sh)
                    else:
                        a, b = sl, sh
                    bounds.append((p, a + (b - a) * rc / n, a + (b - a) * (rc + 1) / n,
                                   -math.pi + 2 * math.pi * tc / ncell_theta,
                                   -math.pi + 2 * math.pi * (tc + 1) / ncell_theta))
    else:
        L = (outer - inner)[:, None]
        r = inner + xr[None, :] * L
        w = wtheta[:, None] * wr[None, :] * L * r
        zs.append((r * np.exp(1j * theta)[:, None]).ravel())
        ws.append(w.ravel())
        cs.append((cr[None, :] * n + ct[:, None]).ravel())
        ss.append(np.full(r.size, np.inf))
        ps.append(np.ones(r.size))
        for rc in range(n):
            for tc in range(n):
                o = chart.outer_radius[j]
                bounds.append((0, inner + (o - inner) * rc / n, inner + (o - inner) * (rc + 1) / n,
                               -math.pi + 2 * math.pi * tc / n, -math.pi + 2 * math.pi * (tc + 1) / n))
    # bounds are listed in cell-id order: (piece, radial, angular)
    return VariableNodes(np.concatenate(zs), np.concatenate(ws), np.concatenate(cs),
                         np.concatenate(ss), np.concatenate(ps), bounds)


def build_cells(chart: PoincareChart, eps, level: int, n0: int = 4, rule=None) -> CellDecomposition:
    n = max(1, int(round(n0 * 2 ** level)))
    if rule is None:
        rule = _MIDPOINT if level <= 0 else _GAUSS2
    variables = [_variable_nodes(chart, j, eps, n, rule) for j in range(chart.dim)]
    return CellDecomposition(variables, level, n, eps)


# ---------------------------------------------------------------------------
# integrand
# ---------------------------------------------------------------------------

def mixed_coefficient(A, B, k: int):
    """``[s^k] det(s A + B) / C(m, k)`` (the mixed discriminant ``D(A[k], B[m-k])``)."""
    A = np.asarray(A)
    B = np.asarray(B)
    m = A.shape[-1]
    if k == 0:
        return np.linalg.det(B).real
    if k == m:
        return np.linalg.det(A).real
    w = np.exp(2j * math.pi * np.arange(m + 1) / (m + 1))
    dets = np.stack([np.linalg.det(wj * A + B) for wj in w], axis=-1)
    coef = np.mean(dets * w ** (-k), axis=-1)
    return coef.real / math.comb(m, k)


def form_density(model: VHSModel, Z, k: int, l: int, dtype=np.complex128):
    """Density of ``Ric^k wedge omega^l`` with respect to ``prod dx_j dy_j`` (Chern normalization)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    m = model.dim
    if k == 0:
        jet = PotentialJet(model, Z, dtype)
        G = hermitian_part(jet.metric())
        ev = np.linalg.eigvalsh(G)
        scale = np.maximum(np.max(np.abs(ev), axis=1), 1e-300)
        bad = ev[:, 0] < -DEGENERACY_TOL * scale
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DegenerateMetricError(f"metric indefinite at {tuple(Z[i])}", metric=G[i], eigenvalues=ev[i])
        D = np.linalg.det(G).real
    else:
        G, _, Ric = curvature_batch(model, Z, dtype)
        D = mixed_coefficient(Ric, G, k)
    return math.factorial(m) * np.asarray(D, dtype=float) / math.pi ** m


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

@dataclass
class IntegralEstimate:
    value: float
    error_bracket: float
    quad_error: float
    tail_bound: float
    epsilon: float | None
    cells_used: int
    k: int
    l: int
    level: int
    coarse_value: float | None = None
    cells: list = field(default=None, repr=False)

    def contains(self, x) -> bool:
        return abs(x - self.value) <= self.error_bracket

    def to_dict(self):
        d = {key: v for key, v in self.__dict__.items() if key != "cells"}
        return d


def _evaluate(model, chart, dec: CellDecomposition, k, l, eps, threads, dtype, record):
    vars_ = dec.variables
    sizes = [len(v.z) for v in vars_]
    ncells = [len(v.cell_bounds) for v in vars_]
    total = int(np.prod(sizes))
    starts = list(range(0, total, CHUNK))

    def work(start):
        idx = np.arange(start, min(start + CHUNK, total))
        sub = np.unravel_index(idx, sizes)
        Z = np.column_stack([v.z[i] for v, i in zip(vars_, sub)])
        W = np.prod([v.weight[i] for v, i in zip(vars_, sub)], axis=0)
        cid = np.ravel_multi_index([v.cell[i] for v, i in zip(vars_, sub)], ncells)
        live = W > 0
        f = np.zeros(len(idx))
        rho = np.ones(len(idx))
        if np.any(live):
            check_domain(model, Z[live])
            f[live] = form_density(model, Z[live], k, l, dtype)
            if eps is not None and chart.puncture_count:
                rho[live] = rho_eps(chart, Z[live], eps)
        shell = np.zeros(len(idx), dtype=bool)
        ratio = np.zeros(len(idx))
        if eps is not None and chart.puncture_count:
            S = np.column_stack([vars_[j].s[sub[j]] for j in range(chart.puncture_count)])
            shell = live & np.any(S < 2 * eps, axis=1)
            if np.any(shell):
                dens = np.prod([v.poincare[i][shell] for v, i in zip(vars_, sub)], axis=0) / math.pi ** model.dim
                ratio[shell] = np.abs(f[shell]) / dens
        return cid, f * rho * W, f, ratio

    threads = thread_count(threads)
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    cid = np.concatenate([p[0] for p in parts])
    contrib = np.concatenate([p[1] for p in parts])
    c1 = max((float(np.max(p[3])) for p in parts), default=0.0)
    per_cell = np.zeros(int(np.prod(ncells)))
    np.add.at(per_cell, cid, contrib)
    value = math.fsum(per_cell.tolist())
    cells = None
    if record:
        fvals = np.concatenate([p[2] for p in parts])
        counts = np.bincount(cid, minlength=per_cell.size)
        fsum_ = np.bincount(cid, weights=fvals, minlength=per_cell.size)
        cells = []
        for c in range(per_cell.size):
            sub = np.unravel_index(c, ncells)
            bounds = [vars_[j].cell_bounds[int(sub[j])] for j in range(len(vars_))]
            cells.append({"cell": c, "bounds": bounds,
                          "mean_density": float(fsum_[c] / counts[c]) if counts[c] else 0.0,
                          "contribution": float(per_cell[c])})
    return value, c1, cells


def _shell_volume(chart: PoincareChart, eps, samples: int = 512):
    """Normalized Poincare volumes of the full chart and of ``{s_j < 2 eps}`` per variable."""
    theta = -math.pi + 2 * math.pi * (np.arange(samples) + 0.5) / samples
    full, shell = [], []
    for j in range(chart.dim):
        outer = chart.outer_at(j, theta)
        if j < chart.puncture_count:
            s_in = float(_s_of_r(chart.inner_radius[j]))
            s_hi = _s_of_r(outer)
            full.append(float(np.mean(s_hi - s_in)) * 2.0)
            cut = np.clip(2 * eps, s_in, s_hi) if eps is not None else np.full_like(s_hi, s_in)
            shell.append(float(np.mean(cut - s_in)) * 2.0)
        else:
            full.append(float(np.mean(outer ** 2)) - chart.inner_radius[j] ** 2)
            shell.append(0.0)
    return full, shell


def tail_estimate(chart: PoincareChart, eps, c1: float) -> float:
    """``c1`` times the normalized Poincare volume of the region where ``rho_eps < 1``."""
    if eps is None or c1 == 0.0:
        return 0.0
    full, shell = _shell_volume(chart, eps)
    total = 0.0
    for j in range(chart.puncture_count):
        others = math.prod(full[i] for i in range(chart.dim) if i != j)
        total += shell[j] * others
    return c1 * total


def _check_chart(model, chart, k, l, eps):
    if k < 0 or l < 0 or k + l != model.dim:
        raise ValueError("k + l must equal the dimension of the base")
    if chart.dim != model.dim or chart.puncture_count != model.punctures:
        raise ValueError("chart and model disagree on dimension or puncture count")
    if max(chart.outer_radius) >= model.radius:
        raise DomainError("chart reaches outside the model's radius of convergence")
    if eps is not None and eps < MIN_EPS:
        raise DomainError(f"eps below {MIN_EPS:.4g} is out of double-precision range")
    if eps is None:
        for j in range(chart.puncture_count):
            if chart.inner_radius[j] <= 0:
                raise ValueError("a punctured chart without inner radius needs a cut-off eps")


def integrate_form(model: VHSModel, chart: PoincareChart, k: int, l: int, eps=None, level: int = 2,
                   n0: int = 4, threads=None, dtype=np.complex128, record_cells: bool = False) -> IntegralEstimate:
    """``int rho_eps Ric(omega)^k wedge omega^l`` with ``(i/2 pi)`` normalization.

    Level 0 uses the midpoint rule; higher levels use the 2-point Gauss rule
    per axis, with ``n0 * 2^level`` cells per axis.  The bracket is the
    difference to the previous level plus a tail bound for the region where
    the cut-off differs from 1 (zero when ``eps`` is ``None``).
    """
    _check_chart(model, chart, k, l, eps)
    dec = build_cells(chart, eps, level, n0)
    value, c1, cells = _evaluate(model, chart, dec, k, l, eps, threads, dtype, record_cells)
    if level > 0:
        coarse_dec = build_cells(chart, eps, level - 1, n0)
    else:
        coarse_dec = build_cells(chart, eps, 0, max(n0 / 2, 0.5))
    coarse, _, _ = _evaluate(model, chart, coarse_dec, k, l, eps, threads, dtype, False)
    quad = abs(value - coarse) + RELATIVE_FLOOR * max(abs(value), abs(coarse)) + 1e-300
    tail = tail_estimate(chart, eps, c1)
    return IntegralEstimate(value, quad + tail, quad, tail, eps, dec.cell_count, k, l, level,
                            coarse_value=coarse, cells=cells)


def write_cells_csv(estimate: IntegralEstimate, path) -> None:
    if estimate.cells is None:
        raise ValueError("estimate was computed without record_cells=True")
    m = len(estimate.cells[0]["bounds"]) if estimate.cells else 0
    header = ["cell"]
    for j in range(m):
        header += [f"piece{j}", f"radial_lo{j}", f"radial_hi{j}", f"theta_lo{j}", f"theta_hi{j}"]
    header += ["mean_density", "contribution"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for c in estimate.cells:
            row = [c["cell"]]
            for b in c["bounds"]:
                row += [b[0], repr(b[1]), repr(b[2]), repr(b[3]), repr(b[4])]
            row += [repr(c["mean_density"]), repr(c["contribution"])]
            w.writerow(row)


# ---------------------------------------------------------------------------
# eps -> 0
# ---------------------------------------------------------------------------

@dataclass
class EpsLimit:
    limit: float
    uncertainty: float
    extrapolated: bool
    cauchy: bool
    eps: list
    values: list
    linear: float | None = None
    quadratic: float | None = None

    def to_dict(self):
        return dict(self.__dict__)


def _unpack(est):
    if isinstance(est, IntegralEstimate):
        return float(est.epsilon), float(est.value), float(est.quad_error)
    e, v, *rest = est
    return float(e), float(v), float(rest[0]) if rest else 0.0


def eps_limit(estimates) -> EpsLimit:
    """Extrapolate ``eps -> 0`` assuming ``v(eps) = v0 + c eps + O(eps^2)``.

    The limit is the line through the two smallest ``eps``; the uncertainty
    is its distance to the quadratic through the last three points plus
    the propagated quadrature errors.  A sequence whose successive
    differences grow is flagged and returned unextrapolated.
    """
    data = [_unpack(e) for e in estimates]
    if len(data) < 3:
        raise ValueError("eps_limit needs at least three estimates")
    eps = [d[0] for d in data]
    vals = [d[1] for d in data]
    errs = [d[2] for d in data]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps values must decrease")
    ratios = [b / a for a, b in zip(eps, eps[1:])]
    if max(ratios) - min(ratios) > 1e-9 * max(ratios):
        raise ValueError("eps values must form a geometric sequence")
    diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    scale = max(abs(v) for v in vals)
    cauchy = all(d2 <= d1 * (1 + 1e-9) + 1e-14 * scale for d1, d2 in zip(diffs, diffs[1:]))
    if not cauchy:
        return EpsLimit(vals[-1], diffs[-1], False, False, eps, vals)
    e1, e2 = eps[-2], eps[-1]
    c1, c2 = -e2 / (e1 - e2), e1 / (e1 - e2)
    linear = c1 * vals[-2] + c2 * vals[-1]
    x = np.array(eps[-3:])
    V = np.vander(x, 3)
    quadratic = float(np.linalg.solve(V, np.array(vals[-3:]))[-1])
    unc = abs(quadratic - linear) + abs(c1) * errs[-2] + abs(c2) * errs[-1]
    return EpsLimit(float(linear), float(unc), True, True, eps, vals, float(linear), quadratic)


# ---------------------------------------------------------------------------
# one-dimensional oracles and probes
# ---------------------------------------------------------------------------

def _circle_average(model, r, n):
    theta = 2 * math.pi * np.arange(n) / n
    Z = np.tile(np.array(model.base_point, dtype=complex), (n, 1))
    Z[:, 0] = r * np.exp(1j * theta)
    jet = PotentialJet(model, Z)
    P = jet.P().real
    if np.any(P <= 0):
        i = int(np.argmin(P))
        raise PositivityError("potential not positive on the contour", point=tuple(Z[i]), value=float(P[i]))
    Pz = jet.P(hol=(0,))
    return float(np.mean(2 * (Z[:, 0] * Pz / P).real))


def stokes_volume_1d(model: VHSModel, inner_radius: float, outer_radius: float, tol: float = 1e-14) -> float:
    """``int omega`` over ``a <= |z| <= b`` from circle averages of ``r d/dr log P``.

    The periodic trapezoid rule is doubled until two successive values agree.
    """
    if model.dim != 1:
        raise ValueError("stokes_volume_1d needs a one-dimensional base")
    a, b = float(inner_radius), float(outer_radius)
    if not 0 < a < b < model.radius:
        raise DomainError("need 0 < inner < outer < radius")
    prev = None
    n = 64
    while True:
        val = -0.5 * (_circle_average(model, b, n) - _circle_average(model, a, n))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        if n >= 8192:
            return val
        prev, n = val, 2 * n


@dataclass
class IntegrabilityReport:
    shells: list          # (eps_outer, eps_inner, integral)
    decreasing: bool
    ratios: list

    def to_dict(self):
        return dict(self.__dict__)


def log_integrability_probe(model: VHSModel, chart: PoincareChart, eps_list, variable: int = 0,
                            nodes: int = 48, angles: int = 64) -> IntegrabilityReport:
    """``int |log P| ds dtheta`` over the shells ``eps_{i+1} <= s_j <= eps_i``.

    ``ds dtheta`` is the Poincare area of the puncture variable ``j``; the
    other variables stay at the model's base point.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps values must decrease")
    x, w = np.polynomial.legendre.leggauss(nodes)
    theta = 2 * math.pi * np.arange(angles) / angles
    shells = []
    for hi, lo in zip(eps_list, eps_list[1:]):
        s = lo + (hi - lo) * (x + 1) / 2
        ws = w * (hi - lo) / 2
        r = np.exp(-1.0 / s)
        Z = np.tile(np.array(model.base_point, dtype=complex), (nodes * angles, 1))
        Z[:, variable] = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
        P = PotentialJet(model, Z).P().real
        if np.any(P <= 0):
            raise PositivityError("potential not positive in a shell", point=None, value=float(P.min()))
        F = np.abs(np.log(P)).reshape(nodes, angles)
        val = float(np.sum(ws * F.mean(axis=1)) * 2 * math.pi)
        shells.append((hi, lo, val))
    vals = [v for _, _, v in shells]
    ratios = [b / a for a, b in zip(vals, vals[1:]) if a]
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    return IntegrabilityReport(shells, decreasing, ratios)
