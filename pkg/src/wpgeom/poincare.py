"""Local Poincare metric on punctured polydisks and the cut-off family rho_eps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .tensors import MetricTensor, generalized_eigenvalues


@dataclass(frozen=True)
class PoincareChart:
    """Chart ``(punctured disk)^k x (disk)^(m-k)`` with per-variable radii.

    ``outer_profile[j]``, when given, is a callable ``theta -> R_j(theta)``
    replacing the constant outer radius of variable ``j`` (it must not
    exceed ``outer_radius[j]``).  Puncture variables come first.
    """

    dim: int
    puncture_count: int
    outer_radius: tuple
    inner_radius: tuple = None
    outer_profile: tuple = None
    name: str = ""

    def __post_init__(self):
        outer = tuple(float(r) for r in self.outer_radius)
        if len(outer) != self.dim:
            raise ValueError("one outer radius per variable is required")
        inner = tuple(float(r) for r in (self.inner_radius or (0.0,) * self.dim))
        object.__setattr__(self, "outer_radius", outer)
        object.__setattr__(self, "inner_radius", inner)
        if self.outer_profile is None:
            object.__setattr__(self, "outer_profile", (None,) * self.dim)
        for j in range(self.puncture_count):
            if not 0 < outer[j] < 1:
                raise ValueError("puncture variables need 0 < outer_radius < 1")
        for a, b in zip(inner, outer):
            if not 0 <= a < b:
                raise ValueError("radii must satisfy 0 <= inner < outer")

    def outer_at(self, j, theta):
        prof = self.outer_profile[j]
        if prof is None:
            return np.full_like(np.asarray(theta, dtype=float), self.outer_radius[j])
        return np.minimum(prof(np.asarray(theta, dtype=float)), self.outer_radius[j])

    def describe(self):
        return {"name": self.name, "dim": self.dim, "punctures": self.puncture_count,
                "inner_radius": list(self.inner_radius), "outer_radius": list(self.outer_radius),
                "profiled": [p is not None for p in self.outer_profile]}


def modular_outer_radius(theta):
    """Pullback of ``|tau| >= 1`` under ``z = exp(2 pi i tau)``, ``theta = 2 pi Re tau``."""
    x = np.asarray(theta, dtype=float) / (2 * math.pi)
    return np.exp(-2 * math.pi * np.sqrt(np.clip(1.0 - x * x, 0.0, None)))


def modular_chart() -> PoincareChart:
    """The standard fundamental domain ``|Re tau| <= 1/2, |tau| >= 1`` in ``z = e^{2 pi i tau}``."""
    return PoincareChart(dim=1, puncture_count=1, outer_radius=(math.exp(-math.pi * math.sqrt(3)),),
                         outer_profile=(modular_outer_radius,), name="modular")


def annulus_chart(inner, outer) -> PoincareChart:
    return PoincareChart(dim=1, puncture_count=1, outer_radius=(outer,), inner_radius=(inner,),
                         name=f"annulus[{inner:.6g},{outer:.6g}]")


def _points(z):
    Z = np.asarray(z, dtype=complex)
    single = Z.ndim <= 1
    return np.atleast_2d(Z), single


def local_poincare(chart: PoincareChart, z) -> MetricTensor:
    """Diagonal metric ``1/(r^2 log(1/r)^2)`` at punctures and ``1`` elsewhere."""
    Z, _ = _points(z)
    D = poincare_diagonal(chart, Z)[0]
    return MetricTensor(point=tuple(Z[0]), matrix=np.diag(D).astype(complex))


def poincare_diagonal(chart: PoincareChart, Z):
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    D = np.ones(Z.shape, dtype=float)
    r = np.abs(Z[:, : chart.puncture_count])
    if np.any(r >= 1):
        raise DomainError("puncture coordinate with r >= 1")
    if np.any(r == 0):
        raise DomainError("puncture coordinate at the puncture")
    u = -np.log(r)
    D[:, : chart.puncture_count] = 1.0 / (r * r * u * u)
    return D


def poincare_volume(s_lo, s_hi, angle=2 * math.pi):
    """Euclidean-area integral of ``1/(r^2 log(1/r)^2)`` over ``s_lo <= 1/log(1/r) <= s_hi``."""
    return angle * max(s_hi - s_lo, 0.0)


# ---------------------------------------------------------------------------
# cut-off profile
# ---------------------------------------------------------------------------

def phi_profile(t):
    """Decreasing quintic ``1 - (10 t^3 - 15 t^4 + 6 t^5)`` on ``[0, 1]``; returns ``(phi, phi', phi'')``."""
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)
    inside = (t > 0) & (t < 1)
    val = 1.0 - tc ** 3 * (10.0 - 15.0 * tc + 6.0 * tc * tc)
    d1 = np.where(inside, -30.0 * tc ** 2 * (1.0 - tc) ** 2, 0.0)
    d2 = np.where(inside, -60.0 * tc * (1.0 - tc) * (1.0 - 2.0 * tc), 0.0)
    return val, d1, d2


@dataclass(frozen=True)
class CutoffProfile:
    bound: float = field(default=None)

    def __post_init__(self):
        if self.bound is None:
            object.__setattr__(self, "bound", profile_bound())

    def __call__(self, t):
        return phi_profile(t)


def profile_bound(samples: int = 200001) -> float:
    t = np.linspace(0.0, 1.0, samples)
    _, d1, d2 = phi_profile(t)
    return float(np.max(np.abs(d1) + np.abs(d2)))


def _s_of(z):
    r = np.abs(np.asarray(z, dtype=complex))
    if np.any(r >= 1):
        raise DomainError("phi_eps needs r < 1")
    with np.errstate(divide="ignore"):
        u = -np.log(r)
    s = np.where(r == 0, 0.0, 1.0 / np.where(r == 0, 1.0, u))
    return r, u, s


def phi_eps(z, eps):
    """``phi((1/log(1/r) - eps)/eps)``: 1 on ``r <= e^{-1/eps}``, 0 on ``r >= e^{-1/(2 eps)}``."""
    _, _, s = _s_of(z)
    val, _, _ = phi_profile((s - eps) / eps)
    return val if np.ndim(val) else float(val)


def phi_eps_jet(z, eps):
    """``(phi_eps, d phi_eps / dz, d^2 phi_eps / dz dzbar)``."""
    z = np.asarray(z, dtype=complex)
    r, u, s = _s_of(z)
    val, d1, d2 = phi_profile((s - eps) / eps)
    with np.errstate(divide="ignore", invalid="ignore"):
        dz = np.where(d1 != 0, d1 / (2 * eps * z * u * u), 0.0)
        ddb = np.where((d1 != 0) | (d2 != 0),
                       d2 / (4 * eps * eps * r * r * u ** 4) + d1 / (2 * eps * r * r * u ** 3), 0.0)
    return val, dz, ddb


def rho_eps(chart: PoincareChart, z, eps):
    """``prod_{i <= k} (1 - phi_eps(z_i))``."""
    Z, single = _points(z)
    out = np.ones(Z.shape[0])
    for j in range(chart.puncture_count):
        out *= 1.0 - np.asarray(phi_eps(Z[:, j], eps))
    return float(out[0]) if single else out


def rho_hessian(chart: PoincareChart, Z, eps):
    """``d_i dbar_j rho_eps`` as an ``(N, m, m)`` Hermitian array."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    N, m = Z.shape
    k = chart.puncture_count
    h = np.ones((N, m))
    dh = np.zeros((N, m), dtype=complex)
    ddh = np.zeros((N, m))
    for j in range(k):
        v, d, dd = phi_eps_jet(Z[:, j], eps)
        h[:, j] = 1.0 - v
        dh[:, j] = -d
        ddh[:, j] = -dd
    H = np.zeros((N, m, m), dtype=complex)
    for i in range(k):
        for j in range(k):
            rest = np.ones(N)
            for q in range(k):
                if q != i and q != j:
                    rest = rest * h[:, q]
            if i == j:
                H[:, i, i] = rest * ddh[:, i]
            else:
                H[:, i, j] = rest * dh[:, i] * np.conj(dh[:, j])
    return H


@dataclass
class HessianProbeReport:
    eps: list
    constants: list
    gradient_ratio: list
    samples: int

    @property
    def spread(self) -> float:
        c = [x for x in self.constants if x > 0]
        return max(c) / min(c) - 1.0 if c else 0.0

    @property
    def uniform(self) -> bool:
        return self.spread < 0.2

    @property
    def gradient_ok(self) -> bool:
        return all(g <= 10.0 for g in self.gradient_ratio)

    def to_dict(self):
        d = dict(self.__dict__)
        d.update(spread=self.spread, uniform=self.uniform, gradient_ok=self.gradient_ok)
        return d


def _shell_samples(chart, eps, count, rng):
    m, k = chart.dim, chart.puncture_count
    Z = np.zeros((count, m), dtype=complex)
    for j in range(m):
        theta = rng.uniform(-math.pi, math.pi, count)
        if j < k:
            s = eps * (1.0 + rng.uniform(0.0, 1.0, count))
            r = np.exp(-1.0 / s)
            r = np.minimum(r, 0.999 * chart.outer_radius[j])
        else:
            r = chart.outer_radius[j] * np.sqrt(rng.uniform(0.0, 1.0, count))
        Z[:, j] = r * np.exp(1j * theta)
    return Z


def hessian_bound_probe(chart: PoincareChart, eps_list, sample_count: int = 2000, seed: int = 0):
    """Sampled bounds ``C(eps)`` with ``-C omega_P <= i d dbar rho_eps <= C omega_P``.

    Samples put every puncture coordinate in the transition shell
    ``e^{-1/eps} <= r <= e^{-1/(2 eps)}``.  Also returns, per ``eps``, the
    largest value of ``|d phi_eps| * r * log(1/r)`` (to be compared with 10).
    """
    rng = np.random.default_rng(seed)
    consts, grads = [], []
    for eps in eps_list:
        Z = _shell_samples(chart, eps, sample_count, rng)
        H = rho_hessian(chart, Z, eps)
        D = poincare_diagonal(chart, Z)
        ev = generalized_eigenvalues(H, D)
        consts.append(float(np.max(np.abs(ev))))
        g = 0.0
        for j in range(chart.puncture_count):
            r = np.abs(Z[:, j])
            _, d, _ = phi_eps_jet(Z[:, j], eps)
            g = max(g, float(np.max(np.abs(d) * r * -np.log(r))))
        grads.append(g)
    return HessianProbeReport(list(map(float, eps_list)), consts, grads, sample_count)
