"""Exact Jordan-Chevalley decomposition and unipotent reduction by base change."""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction

from sympy import QQ, Poly, factor_list, symbols
from sympy.polys.matrices import DomainMatrix

from .errors import InfiniteOrderError
from .model import NilpotentFamily, VHSModel, nonzero_entries, qq_rows, rational_matrix

_x = symbols("x")
ORDER_BOUND = 10 ** 4


def _dm(T) -> DomainMatrix:
    if isinstance(T, DomainMatrix):
        return T.convert_to(QQ).to_dense()
    return rational_matrix(T)


def _eye(b):
    return DomainMatrix.eye(b, QQ).to_dense()


def _poly_at(p: Poly, M: DomainMatrix) -> DomainMatrix:
    b = M.shape[0]
    R = DomainMatrix.zeros((b, b), QQ).to_dense()
    I = _eye(b)
    for c in p.all_coeffs():
        R = R * M + I * QQ.convert(c)
    return R


def charpoly(T: DomainMatrix) -> Poly:
    return Poly([QQ.to_sympy(c) for c in T.charpoly()], _x, domain="QQ")


@dataclass(frozen=True, eq=False)
class MonodromyOperator:
    """``T = gamma_s gamma_u``; ``semisimple_order`` is ``None`` when infinite."""

    matrix: DomainMatrix
    semisimple_part: DomainMatrix
    unipotent_part: DomainMatrix
    semisimple_order: int | None

    @property
    def order_label(self):
        return "infinite" if self.semisimple_order is None else self.semisimple_order

    @property
    def is_unipotent(self) -> bool:
        return self.semisimple_part == _eye(self.matrix.shape[0])

    def nilpotent_log(self) -> DomainMatrix:
        return unipotent_log(self.unipotent_part)

    def to_dict(self):
        return {
            "matrix": [[str(x) for x in r] for r in qq_rows(self.matrix)],
            "semisimple_part": [[str(x) for x in r] for r in qq_rows(self.semisimple_part)],
            "unipotent_part": [[str(x) for x in r] for r in qq_rows(self.unipotent_part)],
            "semisimple_order": self.order_label,
        }


def semisimple_order(p: Poly, bound: int = ORDER_BOUND) -> int | None:
    """Least ``m`` with ``x^m = 1`` modulo the squarefree polynomial ``p``."""
    _, factors = factor_list(p.as_expr(), _x)
    if not all(Poly(f, _x).is_cyclotomic for f, _ in factors):
        return None
    xp = Poly(_x, _x, domain="QQ")
    one = Poly(1, _x, domain="QQ")
    r = xp.rem(p)
    for m in range(1, bound + 1):
        if r == one.rem(p):
            return m
        r = (r * xp).rem(p)
    return None


def jordan_chevalley(T, order_bound: int = ORDER_BOUND) -> MonodromyOperator:
    """Multiplicative Jordan-Chevalley decomposition in exact rational arithmetic.

    The semisimple part is the Newton iterate ``S <- S - p(S) p'(S)^{-1}``
    with ``p`` the squarefree part of the characteristic polynomial; it is a
    polynomial in ``T``, so it commutes with ``T`` and with ``S^{-1} T``.
    """
    T = _dm(T)
    if not T.det():
        raise ValueError("monodromy matrix must be invertible")
    chi = charpoly(T)
    p = chi.quo(chi.gcd(chi.diff(_x)))
    dp = p.diff(_x)
    S = T
    for _ in range(T.shape[0] + 2):
        pS = _poly_at(p, S)
        if pS.is_zero_matrix:
            break
        S = S - pS * _poly_at(dp, S).inv()
    U = S.inv() * T
    return MonodromyOperator(T, S, U, semisimple_order(p, order_bound))


def unipotent_log(U: DomainMatrix) -> DomainMatrix:
    """``log U`` for unipotent ``U`` via the finite series ``sum (-1)^{k+1} X^k / k``."""
    U = _dm(U)
    b = U.shape[0]
    X = U - _eye(b)
    L = DomainMatrix.zeros((b, b), QQ).to_dense()
    P = _eye(b)
    for k in range(1, b + 1):
        P = P * X
        if P.is_zero_matrix:
            break
        L = L + P * QQ((-1) ** (k + 1), k)
    if not (P * X).is_zero_matrix and not P.is_zero_matrix:
        raise ValueError("matrix is not unipotent")
    return L


def nilpotent_exp(N) -> DomainMatrix:
    N = _dm(N)
    b = N.shape[0]
    E = _eye(b)
    P = _eye(b)
    for k in range(1, b + 1):
        P = P * N * QQ(1, k)
        E = E + P
    return E


def _matpow(M, e):
    R = _eye(M.shape[0])
    for _ in range(e):
        R = R * M
    return R


def unipotent_reduction(model: VHSModel, monodromies=None) -> VHSModel:
    """Base change ``z_j = w_j^{m_j}`` making every local monodromy unipotent.

    ``monodromies[j]`` is the (full) monodromy around puncture ``j``; its
    unipotent part must have logarithm ``N_j`` (the model's data describe the
    unipotent part), and its semisimple part must commute with ``N_j``.
    Defaults to ``T_j = exp(N_j)``, in which case the model is returned as is.
    """
    if monodromies is None:
        return model
    if len(monodromies) != model.punctures:
        raise ValueError("one monodromy operator per puncture is required")
    ops = []
    for T in monodromies:
        ops.append(T if isinstance(T, MonodromyOperator) else jordan_chevalley(T))
    orders = []
    new_N = []
    for j, op in enumerate(ops):
        if op.semisimple_order is None:
            raise InfiniteOrderError(f"monodromy {j + 1} has infinite semisimple order")
        Nj = model.nilpotents.operators[j].convert_to(QQ).to_dense()
        L = unipotent_log(op.unipotent_part)
        if L != Nj:
            raise ValueError(f"N_{j + 1} is not the logarithm of the unipotent part of T_{j + 1}")
        comm = op.semisimple_part * Nj - Nj * op.semisimple_part
        if not comm.is_zero_matrix:
            raise ValueError(f"semisimple part of T_{j + 1} does not commute with N_{j + 1}: "
                             f"{nonzero_entries(comm)}")
        m = op.semisimple_order
        orders.append(m)
        Tm = _matpow(op.matrix, m)
        new_N.append(unipotent_log(Tm))
    if all(m == 1 for m in orders):
        return model
    A = model.holomorphic_part
    base = list(model.base_point)
    for j, m in enumerate(orders):
        if m > 1:
            A = A.substitute_power(j, m)
            base[j] = cmath.exp(cmath.log(base[j]) / m)
    radii = [model.radius ** (1.0 / orders[j]) if j < model.punctures else model.radius
             for j in range(model.dim)]
    known = None if model.known_order is None else model.known_order * max(orders)
    return model.with_changes(
        nilpotents=NilpotentFamily(tuple(new_N), model.weight),
        holomorphic_part=A, radius=min(radii), base_point=tuple(base), known_order=known,
        name=(model.name + "-reduced") if model.name else "reduced")


def reduction_orders(monodromies) -> list[int]:
    out = []
    for T in monodromies:
        op = T if isinstance(T, MonodromyOperator) else jordan_chevalley(T)
        if op.semisimple_order is None:
            raise InfiniteOrderError("infinite semisimple order")
        out.append(op.semisimple_order)
    return out


def as_fraction_rows(M: DomainMatrix):
    return [[Fraction(x) for x in r] for r in qq_rows(M)]
