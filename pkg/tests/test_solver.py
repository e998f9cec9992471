'''Triangular solver: closed-form regression, seed handling, freeness.'''

import random

import pytest

from fmanifold import BlockShape, Poly, VectorField
from fmanifold.calculus import atlas_residual, ei_residual
from fmanifold.errors import SeedSupportViolation, ShapeMismatch
from fmanifold.solver import (
    EISeed, euler_seed, solve, verify_seed_freeness,
)

from conftest import low_level_formulas, poly, random_poly, random_seed


def test_euler_seed_solves_to_coordinate_scaling():
    for sizes in ((3,), (3, 2), (1, 1, 1)):
        shape = BlockShape(sizes)
        field = solve(euler_seed(shape)).field
        for i in range(1, shape.n + 1):
            assert field.components[i - 1] == Poly.var(i, shape.n)


def test_low_levels_match_closed_forms():
    rng = random.Random(67)
    shape = BlockShape((5,))
    for _ in range(6):
        seed = random_seed(rng, shape, degree=3)
        f1, f2, f3, f4, f5 = seed.fs[0]
        sol = solve(seed)
        assert sol.field.components[0] == f1
        assert sol.field.components[1] == f2
        e3, e4, e5 = low_level_formulas(f1, f2, f3, f4, f5)
        assert sol.field.components[2] == e3
        assert sol.field.components[3] == e4
        assert sol.field.components[4] == e5


def test_zeroed_tail_seed_gives_pure_scaling_third_component():
    # f1 = u1, f2 = f3 = 0 collapses the third component to -u3
    shape = BlockShape((3,))
    seed = EISeed(shape, [[poly('u1', 3), Poly.zero(3), Poly.zero(3)]])
    field = solve(seed).field
    assert field.components[0] == poly('u1', 3)
    assert field.components[1].is_zero()
    assert field.components[2] == poly('-u3', 3)


def test_solver_outputs_pass_both_residuals():
    rng = random.Random(71)
    for sizes in ((4,), (3, 2), (2, 2, 1)):
        field = solve(random_seed(rng, BlockShape(sizes))).field
        assert atlas_residual(field).is_zero(0)
        assert ei_residual(field).is_zero(0)


def test_block_locality_and_tail_support():
    rng = random.Random(73)
    shape = BlockShape((3, 2))
    field = solve(random_seed(rng, shape)).field
    # block one components may not see block two variables and vice versa
    for i in range(1, 4):
        assert field.components[i - 1].vars_used() <= {1, 2, 3}
    for i in range(4, 6):
        assert field.components[i - 1].vars_used() <= {4, 5}


def test_tail_restriction_recovers_seed():
    rng = random.Random(79)
    shape = BlockShape((4,))
    seed = random_seed(rng, shape)
    field = solve(seed).field
    for m in range(1, 5):
        restricted = field.components[m - 1].substitute_zero({3, 4})
        assert restricted == seed.fs[0][m - 1]


def test_seed_support_enforced():
    shape = BlockShape((3,))
    with pytest.raises(SeedSupportViolation):
        EISeed(shape, [[poly('u2', 3), Poly.zero(3), Poly.zero(3)]])
    with pytest.raises(SeedSupportViolation):
        EISeed(shape, [[poly('u1', 3), poly('u3', 3), Poly.zero(3)]])
    with pytest.raises(ShapeMismatch):
        EISeed(shape, [[poly('u1', 3), Poly.zero(3)]])


def test_seed_serialization_round_trip():
    rng = random.Random(83)
    shape = BlockShape((3, 2))
    seed = random_seed(rng, shape)
    back = EISeed.from_json(seed.to_json())
    assert back == seed
    data = seed.to_json()
    # seed files speak block-local names, so block two uses u1, u2 again
    assert all('u3' not in t and 'u4' not in t and 'u5' not in t
               for t in data['seeds'][1]['f'])


def test_freeness_of_the_last_seed_function():
    rng = random.Random(89)
    shape = BlockShape((5,))
    seed_a = random_seed(rng, shape)
    fs = [list(seed_a.fs[0])]
    fs[0][4] = fs[0][4] + poly('u1*u2', 5)
    seed_b = EISeed(shape, fs)
    sol_a, sol_b = solve(seed_a), solve(seed_b)
    # everything below the top level is untouched
    for i in range(4):
        assert sol_a.field.components[i] == sol_b.field.components[i]
    assert verify_seed_freeness(seed_a, seed_b)


def test_second_seed_function_moves_third_component_linearly():
    rng = random.Random(97)
    shape = BlockShape((3,))
    seed_a = random_seed(rng, shape)
    delta = poly('u1*u2^2', 3)
    fs = [list(seed_a.fs[0])]
    fs[0][1] = fs[0][1] + delta
    seed_b = EISeed(shape, fs)
    diff = solve(seed_b).field.components[2] - solve(seed_a).field.components[2]
    assert diff == delta.partial(2) * 2 * Poly.var(3, 3)


def test_identical_seeds_identical_outputs():
    rng = random.Random(101)
    shape = BlockShape((4,))
    seed = random_seed(rng, shape)
    assert solve(seed).field == solve(seed).field
    assert verify_seed_freeness(seed, seed)
