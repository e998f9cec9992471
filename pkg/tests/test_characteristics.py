'''Numeric generator completion along characteristics.

The hard reference case is the block of size four whose level-4
integration constant is not polynomial: with E = (u1, u1 u2, ...) and
a_2 = u2 the level-3 constant vanishes and the level-4 constant
satisfies

    u1 d1 C + u1 u2 d2 C - (3 u1 - 2) C + u2^2 = 0,

which separates as C = u2^2 h(u1) with u1 h' = (u1 - 2) h - 1 and
h(1) = 0 on the anchor slice.  That scalar ODE is the oracle here.
'''

from fractions import Fraction

import pytest

from fmanifold import BlockShape, Poly
from fmanifold.characteristics import CharacteristicGenerators, _sep_homotopy
from fmanifold.errors import JetOrderExhausted, NotClosed, SingularEncounter
from fmanifold.frame import build_frame, construct_a, frame_product_check, v2_conditions
from fmanifold.solver import EISeed, euler_seed, solve

POINTS = ((1.7, 0.8), (2.3, -1.1), (0.6, 0.4))


@pytest.fixture(scope='module')
def hard_case():
    seed = EISeed.from_json(
        {'shape': [4], 'seeds': [{'block': 1, 'f': ['u1', 'u1*u2', '0', 'u2^2']}]})
    solved = solve(seed)
    gens = construct_a(solved, [Poly.var(2, 4)], mode='numeric')
    return solved, gens


def h_oracle(u1_target, steps=4000):
    '''RK4 for u1 h' = (u1 - 2) h - 1 from h(1) = 0.'''
    t, h = 1.0, 0.0
    dt = (u1_target - 1.0) / steps

    def f(tt, hh):
        return ((tt - 2.0) * hh - 1.0) / tt

    for _ in range(steps):
        k1 = f(t, h)
        k2 = f(t + dt / 2, h + k1 * dt / 2)
        k3 = f(t + dt / 2, h + k2 * dt / 2)
        k4 = f(t + dt, h + k3 * dt)
        h += (k1 + 2 * k2 + 2 * k3 + k4) * dt / 6
        t += dt
    return h


def test_constant_matches_ode_oracle(hard_case):
    _, gens = hard_case
    for u1, u2 in POINTS:
        tab = gens.constant_table(1, 4, (u1, u2))
        h = h_oracle(u1)
        assert abs(tab[(0, 0)] - u2 * u2 * h) <= 1e-9
        assert abs(tab[(0, 1)] - 2 * u2 * h) <= 1e-9


def test_lower_constant_stays_zero(hard_case):
    # homogeneous level with zero slice data transports to zero
    _, gens = hard_case
    for point in POINTS:
        tab = gens.constant_table(1, 3, point)
        assert max(abs(v) for v in tab.values()) <= 1e-10


def test_pde_residual(hard_case):
    _, gens = hard_case
    for point in POINTS:
        assert abs(gens.pde_residual(1, 4, point)) <= 1e-8


def test_jet_frame_conditions(hard_case):
    solved, gens = hard_case
    for point in ((1.6, 0.4, -0.2, 0.9), (0.7, -1.0, 0.5, 0.3)):
        jets = gens.generator_jets(point)
        frame = build_frame(solved.field.to_jet(point, 3), jets, tol=1e-8)
        assert v2_conditions(frame).max_abs() <= 1e-6
        assert frame_product_check(frame).max_abs() <= 1e-6


def test_euler_numeric_matches_exact():
    shape = BlockShape((3,))
    solved = solve(euler_seed(shape))
    gens = construct_a(solved, [Poly.var(2, 3)], mode='numeric')
    point = (1.5, 0.7, -0.3)
    jets = gens.generator_jets(point)
    assert sorted(jets) == [(1, 2), (1, 3)]
    want = Poly.var(3, 3).to_jet(point, 3) * 2
    assert jets[(1, 3)].close_to(want, 1e-9)
    assert jets[(1, 2)].close_to(Poly.var(2, 3).to_jet(point, 3), 1e-12)


def test_query_caching_is_deterministic(hard_case):
    _, gens = hard_case
    first = gens.a_jet(1, 4, (1.3, 0.2, 0.1, -0.4))
    second = gens.a_jet(1, 4, (1.3, 0.2, 0.1, -0.4))
    assert (first - second).max_abs() == 0.0


def test_closure_guard():
    # du4 on coordinate 3 against -du3 on coordinate 4 is not closed
    one = Poly.const(4, Fraction(1))
    form = {
        3: {((0, 0, 0, 1), None): one},
        4: {((0, 0, 1, 0), None): -one},
    }
    with pytest.raises(NotClosed):
        _sep_homotopy(form, [3, 4])


def test_jet_order_exhausted(hard_case):
    _, gens = hard_case
    with pytest.raises(JetOrderExhausted):
        gens.a_jet(1, 4, (1.3, 0.2, 0.1, -0.4), order=5)


def test_singular_query(hard_case):
    # the lead component u1 stalls the characteristic near zero
    _, gens = hard_case
    with pytest.raises(SingularEncounter):
        gens.a_jet(1, 4, (1e-12, 0.5, 0.0, 0.0))


def test_order_validation():
    shape = BlockShape((3,))
    solved = solve(euler_seed(shape))
    with pytest.raises(ValueError):
        CharacteristicGenerators(solved, {1: Poly.var(2, 3)}, order=0)
