import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpgeom import corpus
from wpgeom.errors import InfiniteOrderError
from wpgeom.model import potential, rational_matrix
from wpgeom.modelfile import load_model
from wpgeom.monodromy import (
    as_fraction_rows, jordan_chevalley, nilpotent_exp, reduction_orders, unipotent_log,
    unipotent_reduction,
)


def rows(M):
    return as_fraction_rows(M)


@pytest.mark.parametrize("T, order, unipotent", [
    ([[1, 1], [0, 1]], 1, True),
    ([[0, -1], [1, 0]], 4, False),
    ([[0, -1], [1, 1]], 6, False),
])
def test_examples(T, order, unipotent):
    op = jordan_chevalley(T)
    assert op.semisimple_order == order
    assert op.is_unipotent == unipotent
    if unipotent:
        assert rows(op.unipotent_part) == rows(rational_matrix(T))
    else:
        assert rows(op.semisimple_part) == rows(rational_matrix(T))
        assert rows(op.unipotent_part) == [[1, 0], [0, 1]]


def test_mixed_block():
    # -I times a unipotent block: gamma_s = -I, gamma_u = [[1,1],[0,1]]
    op = jordan_chevalley([[-1, -1], [0, -1]])
    assert rows(op.semisimple_part) == [[-1, 0], [0, -1]]
    assert rows(op.unipotent_part) == [[1, 1], [0, 1]]
    assert op.semisimple_order == 2
    assert rows(op.nilpotent_log()) == [[0, 1], [0, 0]]


def test_infinite_order():
    op = jordan_chevalley([[2, 1], [1, 1]])
    assert op.semisimple_order is None and op.order_label == "infinite"
    with pytest.raises(InfiniteOrderError):
        reduction_orders([[[2, 1], [1, 1]]])


def test_singular_rejected():
    with pytest.raises(ValueError):
        jordan_chevalley([[1, 1], [1, 1]])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-2, 2), min_size=6, max_size=6), st.integers(1, 3), st.sampled_from([1, -1]))
def test_decomposition_is_exact(c, a, sign):
    # conjugate (rotation of order 4) + (sign times a unipotent 2x2 block) by a unitriangular matrix
    P = rational_matrix([[1, c[0], c[1], c[2]], [0, 1, c[3], c[4]], [0, 0, 1, c[5]], [0, 0, 0, 1]])
    T0 = rational_matrix([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, sign, sign * a], [0, 0, 0, sign]])
    T = P * T0 * P.inv()
    op = jordan_chevalley(T)
    gs, gu = op.semisimple_part, op.unipotent_part
    assert gs * gu == T
    assert gs * gu == gu * gs
    assert op.semisimple_order == 4
    X = gu - rational_matrix(np.eye(4, dtype=int).tolist())
    assert not X.is_zero_matrix and (X * X).is_zero_matrix


@settings(max_examples=30, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3))
def test_exp_log_roundtrip(a, b, c):
    N = rational_matrix([[0, a, b], [0, 0, c], [0, 0, 0]])
    assert unipotent_log(nilpotent_exp(N)) == N


def test_unipotent_reduction_identity(elliptic):
    assert unipotent_reduction(elliptic) is elliptic
    assert unipotent_reduction(elliptic, [nilpotent_exp(elliptic.nilpotents.operators[0])]) is elliptic


def test_order_four_reduction(models_dir):
    mf = load_model(models_dir / "order4.toml")
    reduced = unipotent_reduction(mf.model, mf.monodromies)
    T4 = rational_matrix(mf.monodromies[0]) ** 4
    assert jordan_chevalley(T4).is_unipotent
    assert rows(reduced.nilpotents.operators[0]) == [[0, 0], [0, 0]]
    w = math.exp(-math.pi / 2)
    assert potential(reduced, (w,)) == pytest.approx(potential(mf.model, (math.exp(-2 * math.pi),)), rel=1e-12)


def test_elliptic_with_sign_flip():
    # T = -exp(N): gamma_s = -I commutes with N, order 2; the reduced nilpotent is 2N
    m = corpus.elliptic_model()
    T = [[-1, 0], [-1, -1]]
    reduced = unipotent_reduction(m, [T])
    assert rows(reduced.nilpotents.operators[0]) == [[0, 0], [2, 0]]
    rng = np.random.default_rng(7)
    for _ in range(100):
        w = reduced.radius * 0.9 * math.sqrt(rng.uniform(0.01, 1)) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
        assert potential(reduced, (w,)) == pytest.approx(potential(m, (w * w,)), rel=1e-10)


def test_wrong_unipotent_part_rejected(elliptic):
    with pytest.raises(ValueError):
        unipotent_reduction(elliptic, [[[1, 0], [2, 1]]])


def test_noncommuting_semisimple_rejected(elliptic):
    T = rational_matrix([[0, -1], [1, 0]]) * nilpotent_exp(elliptic.nilpotents.operators[0])
    with pytest.raises(ValueError):
        unipotent_reduction(elliptic, [T])
