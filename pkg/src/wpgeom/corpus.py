"""Built-in models used by the CLI, the tests and the acceptance run."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .model import VHSModel

Q_WEIGHT_ONE = [[0, 1], [-1, 0]]
N_WEIGHT_ONE = [[0, 0], [1, 0]]
ZERO_2 = [[0, 0], [0, 0]]


def elliptic_model(radius=Fraction(1, 2)) -> VHSModel:
    """Weight 1, rank 2: ``Omega = (1, tau)`` with ``tau = log(z)/(2 pi i)``."""
    return VHSModel.from_data(
        weight=1, Q=Q_WEIGHT_ONE, nilpotents=[N_WEIGHT_ONE],
        coefficients={(0,): (1, 0)}, radius=radius,
        base_point=(math.exp(-2 * math.pi),), name="elliptic")


def constant_model() -> VHSModel:
    """``N = 0`` and ``A = (1, i)``: the potential is the constant 2."""
    return VHSModel.from_data(
        weight=1, Q=Q_WEIGHT_ONE, nilpotents=[ZERO_2],
        coefficients={(0,): (1, (0, 1))}, radius=Fraction(1, 2),
        base_point=(0.25,), name="constant")


def weight_three_model(kappa=5, a=Fraction(1, 5), b=Fraction(1, 3), q=Fraction(1, 20),
                       radius=Fraction(1, 16)) -> VHSModel:
    """Weight 3, rank 4, one Jordan block (maximal unipotent monodromy).

    ``Omega = (1 + b z) exp((tau + a z) N) (1, 0, 0, i q)`` with the
    cubic prepotential shape ``(1, t, -kappa t^2/2, kappa t^3/6 + i q)``; the
    gauge factor ``1 + b z`` and the shift ``t -> t + a z`` keep every
    coefficient Gaussian rational while making ``A(z)`` nonconstant.
    """
    kappa = Fraction(kappa)
    a, b, q = Fraction(a), Fraction(b), Fraction(q)
    Q = [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]]
    N = [[0, 0, 0, 0], [1, 0, 0, 0], [0, -kappa, 0, 0], [0, 0, -1, 0]]
    # exp(a z N) (1, 0, 0, i q) = (1, a z, -kappa a^2 z^2 / 2, kappa a^3 z^3 / 6 + i q)
    base = {
        0: (1, 0, 0, (0, q)),
        1: (0, a, 0, 0),
        2: (0, 0, -kappa * a * a / 2, 0),
        3: (0, 0, 0, kappa * a ** 3 / 6),
    }
    coeffs = {}

    def add(power, vec, factor):
        cur = coeffs.setdefault(power, [(0, 0)] * 4)
        for i, v in enumerate(vec):
            re, im = v if isinstance(v, tuple) else (v, 0)
            cur[i] = (Fraction(cur[i][0]) + factor * Fraction(re), Fraction(cur[i][1]) + factor * Fraction(im))

    for p, vec in base.items():
        add(p, vec, Fraction(1))
        add(p + 1, vec, b)
    coefficients = {(p,): tuple(v) for p, v in coeffs.items()}
    return VHSModel.from_data(
        weight=3, Q=Q, nilpotents=[N], coefficients=coefficients, radius=radius,
        base_point=(complex(0.01, 0.005),), name="weight3")


def _kron(A, B):
    return np.kron(np.array(A, dtype=object), np.array(B, dtype=object)).tolist()


def product_model() -> VHSModel:
    """Tensor product of two elliptic factors: weight 2, rank 4, two punctures."""
    I2 = [[1, 0], [0, 1]]
    Q = _kron(Q_WEIGHT_ONE, Q_WEIGHT_ONE)
    N1 = _kron(N_WEIGHT_ONE, I2)
    N2 = _kron(I2, N_WEIGHT_ONE)
    return VHSModel.from_data(
        weight=2, Q=Q, nilpotents=[N1, N2], coefficients={(0, 0): (1, 0, 0, 0)},
        radius=Fraction(1, 2), base_point=(0.01, complex(0.0, 0.02)), name="product")


def locus_model() -> VHSModel:
    """Elliptic factor at ``z_1`` times ``(1, i + z_2^2)``; its volume form vanishes on ``z_2 = 0``."""
    I2 = [[1, 0], [0, 1]]
    Q = _kron(Q_WEIGHT_ONE, Q_WEIGHT_ONE)
    N1 = _kron(N_WEIGHT_ONE, I2)
    # (1, 0) tensor (1, i + z^2) = (1, i + z^2, 0, 0)
    coefficients = {(0, 0): (1, (0, 1), 0, 0), (0, 2): (0, 1, 0, 0)}
    return VHSModel.from_data(
        weight=2, Q=Q, nilpotents=[N1], coefficients=coefficients, radius=Fraction(1, 2),
        base_point=(0.01, 0.2), punctures=1, name="locus")


def two_term_model(order=3) -> VHSModel:
    """``A = (1, i) + z^order (1, 0)``: the truncation remainder at ``mu = order - 1`` is
    ``z^order (A + tau N A)`` with exponent pair ``(order, 1)``."""
    return VHSModel.from_data(
        weight=1, Q=Q_WEIGHT_ONE, nilpotents=[N_WEIGHT_ONE],
        coefficients={(0,): (1, (0, 1)), (order,): (1, 0)}, radius=Fraction(1, 2),
        base_point=(0.01,), name=f"two-term-{order}")


def random_weight_one_model(rng: np.random.Generator, max_degree=3) -> VHSModel:
    """Random weight-1 model on ``|z| < 1/8`` with small exact coefficients.

    With ``N = c N_0`` (``c`` in 0..2) the period ratio is ``b/a + c tau``;
    for ``c = 0`` a linear term of size at least 1/2 keeps the map immersive.
    """
    c = int(rng.integers(0, 3))

    def small(den=8):
        return Fraction(int(rng.integers(-2, 3)), den)

    coeffs = {(0,): (1, (small(), Fraction(int(rng.integers(1, 5)), 2)))}
    for k in range(1, max_degree + 1):
        coeffs[(k,)] = ((small(), small()), (small(), small()))
    if c == 0:
        lead = Fraction(int(rng.choice([-1, 1])) * int(rng.integers(1, 3)), 2)
        coeffs[(1,)] = (coeffs[(1,)][0], (lead, small()))
    N = [[0, 0], [c, 0]]
    return VHSModel.from_data(
        weight=1, Q=Q_WEIGHT_ONE, nilpotents=[N], coefficients=coeffs, radius=Fraction(1, 8),
        base_point=(0.01,), name=f"random-c{c}")


BUILTIN = {
    "elliptic": elliptic_model,
    "constant": constant_model,
    "weight3": weight_three_model,
    "product": product_model,
    "locus": locus_model,
    "two-term": two_term_model,
}
