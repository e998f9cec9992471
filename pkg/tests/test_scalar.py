'''Scalar backends: ring laws, calculus, parsing, and homotopy integration.'''

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmanifold.errors import (
    DivisionByZeroFunction, ExprSyntaxError, JetOrderExhausted, NotClosed,
    UnknownVariable, UnsupportedDivision,
)
from fmanifold.scalar import (
    Jet, Poly, RationalFn, homotopy_integrate, multi_indices, parse_scalar,
)

from conftest import poly, random_poly, rational

coeffs = st.fractions(min_value=-4, max_value=4, max_denominator=6)
exps2 = st.tuples(st.integers(0, 3), st.integers(0, 3))
polys2 = st.dictionaries(exps2, coeffs, max_size=4).map(
    lambda d: Poly(2, {e: c for e, c in d.items() if c != 0}))


# ---- polynomial ring ----

@given(polys2, polys2, polys2)
@settings(max_examples=60, deadline=None)
def test_poly_ring_laws(p, q, r):
    assert (p + q) * r == p * r + q * r
    assert p * q == q * p
    assert (p + q) + r == p + (q + r)
    assert p - p == Poly.zero(2)


@given(polys2, polys2)
@settings(max_examples=60, deadline=None)
def test_poly_leibniz_rule(p, q):
    for i in (1, 2):
        assert (p * q).partial(i) == p.partial(i) * q + p * q.partial(i)


@given(polys2, polys2)
@settings(max_examples=40, deadline=None)
def test_jet_lift_is_a_ring_map(p, q):
    base = (Fraction(3, 2), Fraction(-1, 3))
    order = 5
    assert (p * q).to_jet(base, order) == p.to_jet(base, order) * q.to_jet(base, order)
    assert (p + q).to_jet(base, order) == p.to_jet(base, order) + q.to_jet(base, order)


@given(polys2)
@settings(max_examples=40, deadline=None)
def test_jet_partial_commutes_with_lift(p):
    base = (Fraction(1), Fraction(2))
    for i in (1, 2):
        assert p.partial(i).to_jet(base, 3) == p.to_jet(base, 4).partial(i)


@given(polys2)
@settings(max_examples=40, deadline=None)
def test_parser_round_trip(p):
    assert parse_scalar(p.to_expr(), 'poly', 2) == p


def test_poly_evaluate_matches_compiled():
    import random
    rng = random.Random(11)
    for _ in range(10):
        p = random_poly(rng, 3, [1, 2, 3], degree=4, terms=5)
        point = tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(3))
        exact = p.evaluate(point)
        compiled = p.compile_eval()(tuple(float(x) for x in point))
        assert abs(float(exact) - compiled) < 1e-9


def test_substitute_zero_and_vars_used():
    p = poly('u1*u3^2 + u2 + 5', 4)
    assert p.vars_used() == {1, 2, 3}
    assert p.substitute_zero({3}) == poly('u2 + 5', 4)
    assert p.substitute_zero({1, 2, 3}) == poly('5', 4)


# ---- homotopy integration ----

def test_homotopy_inverts_gradients():
    import random
    rng = random.Random(5)
    variables = [3, 4, 5]
    for _ in range(8):
        f = random_poly(rng, 5, [1, 2, 3, 4, 5], degree=4, terms=6)
        form = {v: f.partial(v) for v in variables}
        got = homotopy_integrate(form, variables)
        assert got == f - f.substitute_zero(set(variables))


def test_homotopy_rejects_non_closed_forms():
    form = {3: Poly.var(4, 4), 4: Poly.var(3, 4) * (-1)}
    with pytest.raises(NotClosed):
        homotopy_integrate(form, [3, 4])


def test_homotopy_normalizes_to_zero_on_the_slice():
    form = {3: Poly.var(3, 3) * 2}
    got = homotopy_integrate(form, [3])
    assert got == poly('u3^2', 3)
    assert got.substitute_zero({3}).is_zero()


# ---- parser diagnostics ----

def test_parser_reports_positions_and_kinds():
    with pytest.raises(UnknownVariable):
        parse_scalar('u9', 'poly', 2)
    with pytest.raises(ExprSyntaxError, match='position'):
        parse_scalar('((u1', 'poly', 2)
    with pytest.raises(ExprSyntaxError, match='exponent'):
        parse_scalar('2^u1', 'poly', 2)
    with pytest.raises(UnsupportedDivision):
        parse_scalar('1/u1', 'poly', 2)
    with pytest.raises(DivisionByZeroFunction):
        parse_scalar('1/(u1-u1)', 'rational', 2)


def test_parser_precedence_and_unary_minus():
    assert parse_scalar('-u1^2', 'poly', 1) == Poly.var(1, 1) ** 2 * (-1)
    assert parse_scalar('2*u1+3*u2^2', 'poly', 2) == \
        Poly.var(1, 2) * 2 + Poly.var(2, 2) ** 2 * 3
    assert parse_scalar('u1/3', 'poly', 2) == Poly.var(1, 2) * Fraction(1, 3)
    assert parse_scalar('(u1+u2)^2', 'poly', 2) == (Poly.var(1, 2) + Poly.var(2, 2)) ** 2


# ---- rational functions ----

def test_rational_arithmetic_cancels():
    p = rational('u1^2 + u2', 2)
    q = rational('u1 + 1', 2)
    assert ((p / q) * q - p).is_zero()
    assert (p / q + p / q - (p + p) / q).is_zero()


def test_rational_partial_quotient_rule():
    r = rational('u2', 2) / rational('u1', 2)
    base = (Fraction(2), Fraction(3))
    # d/du1 (u2/u1) = -u2/u1^2
    expect = rational('-u2', 2) / (rational('u1', 2) ** 2)
    assert (r.partial(1) - expect).is_zero()
    assert r.partial(1).to_jet(base, 2).value() == Fraction(-3, 4)


def test_rational_narrowing_guards():
    r = rational('u1', 2) / rational('u2', 2)
    with pytest.raises(UnsupportedDivision):
        r.to_poly()
    assert (rational('u1*u2', 2) / rational('u2', 2)).to_poly() == poly('u1', 2)


# ---- jets ----

def test_jet_reciprocal_is_exact():
    p = poly('1 + u1 + u2^2', 2)
    j = p.to_jet((Fraction(1), Fraction(2)), 4)
    one = Jet.constant(2, (Fraction(1), Fraction(2)), 4, 1)
    assert j * j.reciprocal() == one


def test_jet_division_by_vanishing_value():
    j = poly('u1', 1).to_jet((Fraction(0),), 3)
    with pytest.raises(DivisionByZeroFunction):
        j.reciprocal()


def test_jet_order_exhaustion():
    j = poly('u1', 1).to_jet((Fraction(1),), 0)
    with pytest.raises(JetOrderExhausted):
        j.partial(1)


def test_jet_partial_coefficient_matches_derivatives():
    p = poly('u1^3*u2 + u2^2', 2)
    j = p.to_jet((Fraction(2), Fraction(-1)), 4)
    # third derivative in u1, first in u2 of u1^3*u2 is 6
    assert j.partial_coefficient((3, 1)) == 6
    assert j.partial_coefficient((0, 2)) == 2


def test_multi_indices_graded_and_complete():
    idx = multi_indices(2, 2)
    assert idx[0] == (0, 0)
    assert set(idx) == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    assert [sum(e) for e in idx] == sorted(sum(e) for e in idx)
