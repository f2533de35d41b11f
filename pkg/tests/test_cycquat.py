from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odlab.cycquat import (
    CPolynomial,
    CycCoeff,
    QPolynomial,
    cyc_reduce,
    monomial,
    qconj,
    qeval,
    qmul,
    reduction_matrix,
)
from oracles import cpoly_value, cyc_value, entry_value, quat_rep

ORDERS = (4, 6, 12)
NAMES = ("x", "y")


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------

def cyc(order: int):
    return st.lists(st.integers(-3, 3), min_size=order, max_size=order).map(lambda v: cyc_reduce(v, order))


@st.composite
def monomials(draw):
    factors = []
    for n in NAMES:
        d = draw(st.integers(0, 2))
        ds = draw(st.integers(0, 2))
        if d or ds:
            factors.append((n, d, ds))
    return monomial(*factors)


@st.composite
def cpolys(draw, order: int = 12, max_terms: int = 3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        m = draw(monomials())
        c = draw(cyc(order))
        terms[m] = terms[m] + c if m in terms else c
    return CPolynomial(terms, order)


@st.composite
def qpolys(draw, order: int = 12):
    return QPolynomial(draw(cpolys(order)), draw(cpolys(order)))


unit_angles = st.floats(0, 2 * math.pi, allow_nan=False)


@st.composite
def assignments(draw):
    return {n: cmath.exp(1j * draw(unit_angles)) for n in NAMES}


# ---------------------------------------------------------------------------
# cyclotomic coefficients
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "L, raw, expected",
    [
        (4, [0, 0, 1, 0], -1),  # i^2 = -1
        (6, [0, 0, 0, 1, 0, 0], -1),  # zeta_6^3 = -1
        (6, [1, -1, 1, 0, 0, 0], 0),  # 1 - zeta + zeta^2 = Phi_6(zeta)
    ],
)
def test_reduce_examples(L, raw, expected):
    c = cyc_reduce(raw, L)
    assert c == CycCoeff.integer(expected, L)
    # independent numeric oracle at zeta = e^{2 pi i / L}
    direct = sum(k * cmath.exp(2j * math.pi * t / L) for t, k in enumerate(raw))
    assert abs(direct - expected) < 1e-12


@pytest.mark.parametrize("L", ORDERS + (3, 8, 9, 24))
def test_reduction_matrix_preserves_value(L):
    R = reduction_matrix(L)
    zeta = cmath.exp(2j * math.pi / L)
    powers = np.array([zeta**t for t in range(L)])
    # reducing zeta^t must not change its value
    for t in range(L):
        assert abs(R[t] @ powers - powers[t]) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ORDERS).flatmap(lambda L: st.tuples(st.just(L), st.lists(st.integers(-5, 5), min_size=L, max_size=L))))
def test_reduce_idempotent_and_value_preserving(args):
    L, raw = args
    c = cyc_reduce(raw, L)
    assert cyc_reduce(c.coeffs, L) == c
    direct = sum(k * cmath.exp(2j * math.pi * t / L) for t, k in enumerate(raw))
    assert abs(cyc_value(c) - direct) < 1e-9


@settings(max_examples=60, deadline=None)
@given(cyc(12), cyc(12), cyc(12))
def test_cyc_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a * b).conj() == a.conj() * b.conj()
    assert abs(cyc_value(a * b) - cyc_value(a) * cyc_value(b)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(cyc(12))
def test_zero_test_sound(a):
    # the canonical vector is zero exactly when the value is
    assert a.is_zero() == (abs(cyc_value(a)) < 1e-9)


def test_lift_mixed_orders():
    w3 = CycCoeff.root(1, 3)
    i4 = CycCoeff.imag_unit(4)
    prod = w3 * i4
    assert prod.order == 12
    assert prod == CycCoeff.root(4 + 3, 12)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(cpolys(), cpolys(), cpolys())
def test_cpoly_ring_axioms(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p.conj().conj() == p


@settings(max_examples=40, deadline=None)
@given(cpolys(), cpolys(), assignments())
def test_cpoly_evaluation_homomorphism(p, q, vals):
    assert abs(cpoly_value(p * q, vals) - cpoly_value(p, vals) * cpoly_value(q, vals)) < 1e-8
    assert abs(cpoly_value(p.conj(), vals) - np.conj(cpoly_value(p, vals))) < 1e-8


# ---------------------------------------------------------------------------
# quaternion polynomials
# ---------------------------------------------------------------------------

def test_quaternion_units():
    i, j, k = (QPolynomial.unit(u) for u in "ijk")
    one = QPolynomial.const(1)
    assert qmul(i, j) == k
    assert qmul(j, i) == -k
    assert qmul(j, k) == i and qmul(k, i) == j
    for u in (i, j, k):
        assert qmul(u, u) == -one
    assert qmul(qmul(i, j), k) == -one
    assert qconj(k) == -k


def test_j_moves_past_variable():
    x = QPolynomial.var("x")
    j = QPolynomial.unit("j")
    assert qmul(j, x) == qmul(QPolynomial.var("x", conj=True), j)
    assert qconj(x) == QPolynomial.var("x", conj=True)


def test_norm_of_two_term_quaternion():
    x, y = QPolynomial.var("x"), QPolynomial.var("y")
    j = QPolynomial.unit("j")
    p = x + qmul(y, j)
    prod = qmul(p, qconj(p))
    expected = qmul(x, qconj(x)) + qmul(y, qconj(y))
    assert prod == expected


@settings(max_examples=40, deadline=None)
@given(qpolys(), qpolys(), qpolys())
def test_qpoly_associative_and_distributive(p, q, r):
    assert qmul(qmul(p, q), r) == qmul(p, qmul(q, r))
    assert qmul(p, q + r) == qmul(p, q) + qmul(p, r)


@settings(max_examples=40, deadline=None)
@given(qpolys(), qpolys())
def test_conj_is_anti_automorphism(p, q):
    assert qconj(qmul(p, q)) == qmul(qconj(q), qconj(p))
    assert qconj(qconj(p)) == p


@settings(max_examples=100, deadline=None)
@given(qpolys(), qpolys(), assignments())
def test_qeval_homomorphism_and_norm(p, q, vals):
    # oracle: 2x2 complex representation of the evaluated factors
    P = quat_rep(*entry_value(p, vals))
    Q = quat_rep(*entry_value(q, vals))
    z, w = qeval(qmul(p, q), vals)
    PQ = P @ Q
    scale = max(1.0, np.abs(PQ).max())
    assert abs(z - PQ[0, 0]) <= 1e-9 * scale and abs(w - PQ[0, 1]) <= 1e-9 * scale
    norm = lambda zw: math.hypot(abs(zw[0]), abs(zw[1]))  # noqa: E731
    assert abs(norm((z, w)) - norm(qeval(p, vals)) * norm(qeval(q, vals))) <= 1e-9 * scale


@settings(max_examples=40, deadline=None)
@given(qpolys(), assignments())
def test_symbolic_zero_evaluates_to_zero(p, vals):
    z, w = qeval(p - p, vals)
    assert z == 0 and w == 0


def test_nonzero_polynomials_evaluate_nonzero():
    rng = np.random.default_rng(7)
    hits = tried = 0
    for _ in range(1000):
        terms = {}
        for _ in range(rng.integers(1, 4)):
            m = monomial(*[(n, int(rng.integers(0, 3)), int(rng.integers(0, 3))) for n in NAMES])
            terms[m] = cyc_reduce([int(v) for v in rng.integers(-2, 3, size=12)], 12)
        p = QPolynomial(CPolynomial(terms, 12), CPolynomial({(): CycCoeff.integer(int(rng.integers(0, 2)), 12)}, 12))
        if p.is_zero():
            continue
        vals = {n: cmath.exp(2j * math.pi * rng.random()) for n in NAMES}
        z, w = qeval(p, vals)
        tried += 1
        hits += abs(z) + abs(w) > 1e-12
    assert tried > 900 and hits >= 0.99 * tried


def test_qeval_examples_and_errors():
    x = QPolynomial.var("x")
    assert qeval(x, {"x": 1}) == (1, 0)
    theta = 0.73
    z, w = qeval(qmul(x, qconj(x)), {"x": cmath.exp(1j * theta)})
    assert abs(z - 1) < 1e-12 and w == 0
    with pytest.raises(KeyError, match="'x'"):
        qeval(x, {})
    with pytest.raises(ValueError, match="unit modulus"):
        qeval(x, {"x": 2.0})
    assert qeval(x, {"x": 2.0}, enforce_unit=False) == (2, 0)


def test_j_part_requires_i():
    with pytest.raises(ValueError):
        QPolynomial(CPolynomial.const(1, 3), CPolynomial.const(1, 3))
    # a missing complex part defaults to order 4, so the pair is lifted to 12
    assert QPolynomial(None, CPolynomial.const(1, 3)).order == 12
