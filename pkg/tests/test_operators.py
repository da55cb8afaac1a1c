from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from twinbasic.numkernel import DomainError
from twinbasic.operators import (
    FormalSeries,
    WeightFunction,
    classical_q_derivative_weight,
    delta_op,
    divide_by_delta_z,
    phi_coefficients,
    phi_difference_residual,
    pq_derivative,
    u_derivative,
)
from twinbasic.pqcore import BasePair, twin_basic_number
from twinbasic.series import Phi

from conftest import rationals

coeff_lists = st.lists(rationals(-6, 6, 9), min_size=1, max_size=10)
nonzero = rationals(-4, 4, 9, nonzero=True)


def series(*cs):
    return FormalSeries(tuple(Fraction(c) for c in cs))


def test_pq_derivative_examples():
    p, q = Fraction(5, 3), Fraction(2, 7)
    for n in range(6):
        d = pq_derivative(FormalSeries.monomial(n), BasePair(p, q))
        expected = [0] * n
        if n:
            expected[n - 1] = twin_basic_number(n, BasePair(p, q))
        assert list(d.coefficients) == (expected or [0])
    assert list(pq_derivative(series(4), BasePair(p, q)).coefficients) == [0]
    assert list(pq_derivative(FormalSeries.monomial(3), BasePair(2, 1)).coefficients) == [0, 0, 7]


def test_delta_examples():
    p, q = Fraction(3), Fraction(1, 2)
    assert list(delta_op(series(1), 1, 1, BasePair(p, q)).coefficients) == [0]
    assert list(delta_op(series(0, 1), 1, 1, BasePair(p, q)).coefficients) == [0, q - p]
    base = BasePair(2, 1)
    via_delta = divide_by_delta_z(delta_op(FormalSeries.monomial(3), 1, 1, base), base)
    assert via_delta == pq_derivative(FormalSeries.monomial(3), base) == series(0, 0, 7)
    with pytest.raises(DomainError):
        divide_by_delta_z(series(1, 2), base)


def test_u_derivative_examples():
    z3 = FormalSeries.monomial(3)
    assert u_derivative(z3, WeightFunction(lambda n: n)) == series(0, 0, 3)
    assert u_derivative(z3, WeightFunction.twin_basic(BasePair(2, 1))) == series(0, 0, 7)
    assert all(c == 0 for c in u_derivative(series(1, 2, 3, 4), WeightFunction(lambda n: 0)).coefficients)


@given(coeff_lists, coeff_lists, nonzero, nonzero, rationals(), rationals())
def test_linearity(f, g, p, q, s, t):
    n = min(len(f), len(g))
    f, g = FormalSeries(tuple(f[:n])), FormalSeries(tuple(g[:n]))
    base = BasePair(p, q)
    combo = f.scale(s) + g.scale(t)
    for op in (lambda h: pq_derivative(h, base), lambda h: delta_op(h, s + 1, t - 1, base),
               lambda h: u_derivative(h, WeightFunction(lambda n: n * n - 1))):
        assert op(combo) == op(f).scale(s) + op(g).scale(t)


@given(coeff_lists, nonzero, nonzero)
def test_delta_quotient_is_derivative(f, p, q):
    if p == q:
        return
    f = FormalSeries(tuple(f))
    base = BasePair(p, q)
    assert divide_by_delta_z(delta_op(f, 1, 1, base), base) == pq_derivative(f, base)


@given(rationals(Fraction(-3), Fraction(3), 9, nonzero=True), st.integers(0, 15))
def test_classical_specialization(q, n):
    if q == 1:
        return
    base = BasePair(1, q)
    assert WeightFunction.twin_basic(base)(n) == classical_q_derivative_weight(n, q)


def _random_doublet(rng):
    return (Fraction(rng.randint(1, 9), rng.randint(1, 5)) * rng.choice([-1, 1]),
            Fraction(rng.randint(-9, 9), rng.randint(1, 5)))


@pytest.mark.parametrize("r,s", [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)])
def test_difference_equation_is_exact(r, s):
    rng = random.Random(100 * r + s)
    for _ in range(5):
        p = Fraction(rng.randint(1, 9), rng.randint(1, 4))
        q = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
        if q == 0 or q == p:
            continue
        spec = Phi([_random_doublet(rng) for _ in range(r)], [_random_doublet(rng) for _ in range(s)], (p, q),
                   Fraction(1, 3))
        try:
            assert phi_difference_residual(spec, 25) == 0
        except DomainError:
            continue


def test_difference_equation_p1():
    q = Fraction(2, 5)
    spec = Phi([(1, Fraction(1, 3)), (1, 4)], [(1, Fraction(-2, 7))], (1, q), Fraction(1, 2))
    assert phi_difference_residual(spec, 20) == 0


def test_phi00_recurrence():
    p, q = Fraction(7, 3), Fraction(1, 2)
    c = phi_coefficients(Phi([], [], (p, q), 1), 20)
    rho = q / p
    for n in range(1, 21):
        assert c[n] * (q**n - p**n) == c[n - 1] * rho ** (n - 1)


def test_residual_detects_wrong_series():
    # perturbing one coefficient breaks the equation
    from twinbasic import operators

    spec = Phi([(1, Fraction(1, 3))], [], (2, 1), 1)
    real = operators.phi_coefficients

    def broken(s, order):
        f = real(s, order)
        return FormalSeries(f.coefficients[:3] + (f.coefficients[3] + 1,) + f.coefficients[4:])

    operators.phi_coefficients = broken
    try:
        assert phi_difference_residual(spec, 10) != 0
    finally:
        operators.phi_coefficients = real


def test_formal_series_basics():
    with pytest.raises(ValueError):
        FormalSeries(())
    f = series(1, 2, 3)
    assert (f + series(1, 1)).order == 1
    assert f.times_z() == series(0, 1, 2)
    assert f.rescale_argument(2) == series(1, 4, 12)
    with pytest.raises(ValueError):
        phi_difference_residual(Phi([], [], (2, 1), 1), 0)
