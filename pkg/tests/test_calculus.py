'''Bracket calculus and residual checkers, with independent oracles.'''

import random
from fractions import Fraction

import pytest

from fmanifold import (
    BlockShape, Poly, VectorField, circ, coordinate_field, dual_product,
    invert, unit_field,
)
from fmanifold.calculus import (
    OperatorField, atlas_residual, ei_residual, hm_residual, lie_bracket,
    mult_operator, nijenhuis_torsion, weak_ei_bracket_check,
)
from fmanifold.errors import PreconditionFailed
from fmanifold.solver import euler_seed, solve

from conftest import poly, random_poly, random_seed


def random_field(rng, shape, degree=2):
    comps = [random_poly(rng, shape.n, list(range(1, shape.n + 1)), degree)
             for _ in range(shape.n)]
    return VectorField(shape, comps)


# ---- Lie bracket ----

def test_bracket_antisymmetry_and_jacobi():
    rng = random.Random(41)
    shape = BlockShape((2, 1))
    zero = VectorField(shape, [Poly.zero(3)] * 3)
    for _ in range(50):
        x = random_field(rng, shape, degree=2)
        y = random_field(rng, shape, degree=2)
        z = random_field(rng, shape, degree=2)
        minus = VectorField(shape, [(-1) * c for c in lie_bracket(y, x).components])
        assert lie_bracket(x, y) == minus
        jac = lie_bracket(x, lie_bracket(y, z))
        jac = VectorField(shape, [a + b for a, b in zip(
            jac.components, lie_bracket(y, lie_bracket(z, x)).components)])
        jac = VectorField(shape, [a + b for a, b in zip(
            jac.components, lie_bracket(z, lie_bracket(x, y)).components)])
        assert jac == zero


def test_bracket_known_value():
    shape = BlockShape((1,))
    scaling = VectorField(shape, [poly('u1', 1)])
    const = VectorField(shape, [poly('1', 1)])
    assert lie_bracket(scaling, const) == VectorField(shape, [poly('-1', 1)])


# ---- multiplication operator ----

def test_mult_operator_euler_matrix():
    field = solve(euler_seed(BlockShape((3,)))).field
    op = mult_operator(field)
    expect = [['u1', '0', '0'], ['u2', 'u1', '0'], ['u3', 'u2', 'u1']]
    for i in range(3):
        for j in range(3):
            assert op.matrix[i][j] == poly(expect[i][j], 3)


def test_mult_operator_columns_are_products():
    rng = random.Random(43)
    shape = BlockShape((3, 2))
    field = random_field(rng, shape)
    op = mult_operator(field)
    for p in range(1, shape.n + 1):
        assert op.column(p) == circ(field, coordinate_field(shape, p))


def test_mult_operator_of_unit_is_identity():
    shape = BlockShape((2, 2))
    op = mult_operator(unit_field(shape))
    for i in range(4):
        for j in range(4):
            expect = Poly.const(4, 1 if i == j else 0)
            assert op.matrix[i][j] == expect


# ---- invariance law and triangular law agree ----

def perturb(field):
    '''Break one entry: a lead gaining a forbidden dependency.'''
    shape = field.shape
    comps = list(field.components)
    alpha = shape.r
    m = shape.sizes[alpha - 1]
    lead = shape.flat(alpha, 1)
    if m >= 2:
        comps[lead - 1] = comps[lead - 1] + Poly.var(shape.flat(alpha, 2), shape.n)
    else:
        comps[lead - 1] = comps[lead - 1] + Poly.var(shape.flat(1, 1), shape.n)
    return VectorField(shape, comps)


def test_invariance_iff_triangular():
    rng = random.Random(47)
    shapes = [BlockShape(s) for s in ((3,), (2, 2), (3, 2), (2, 1), (4,))]
    for k in range(15):
        shape = shapes[k % len(shapes)]
        field = solve(random_seed(rng, shape)).field
        assert ei_residual(field).is_zero(0)
        assert atlas_residual(field).is_zero(0)
        broken = perturb(field) if shape.r > 1 or shape.sizes[0] >= 2 else field
        assert not ei_residual(broken).is_zero(0)
        assert not atlas_residual(broken).is_zero(0)


def test_invariance_counterexample_entry_value():
    field = VectorField(BlockShape((2,)), [poly('u2', 2), poly('0', 2)])
    res = ei_residual(field)
    by_label = {e.label: e.value for e in res.entries}
    assert by_label[(('block', 1), ('i', 2), ('j', 2), ('k', 2))] == poly('2', 2)
    atlas = atlas_residual(field)
    by_label = {e.label: e.value for e in atlas.entries}
    assert by_label[(('block', 1), ('m', 1), ('l', 2))] == poly('1', 2)


def test_triangular_law_flags_out_of_block_dependence():
    # component three gaining a fourth-coordinate term trips entry (l=4, m=3)
    field = solve(euler_seed(BlockShape((4,)))).field
    comps = list(field.components)
    comps[2] = comps[2] + Poly.var(4, 4)
    res = atlas_residual(VectorField(field.shape, comps))
    by_label = {e.label: e.value for e in res.entries}
    assert by_label[(('block', 1), ('m', 3), ('l', 4))] == poly('1', 4)


# ---- product invariance ----

def test_canonical_product_passes_invariance():
    shape = BlockShape((3,))
    assert hm_residual(circ, shape).is_zero(0)
    shape = BlockShape((2, 1))
    assert hm_residual(circ, shape).is_zero(0)


def test_dual_of_non_solution_fails_invariance():
    shape = BlockShape((3,))
    field = VectorField(shape, [poly(t, 3).to_rational() for t in ('u2', '0', '0')])
    inv = invert(field)
    res = hm_residual(lambda x, y: dual_product(x, y, inv), shape,
                      like=field.components[0])
    assert not res.is_zero(0)


# ---- Nijenhuis torsion ----

def torsion_oracle(op):
    '''Coordinate formula, expanded without reusing the bracket helper:

    N^k_pq = L^s_p d_s L^k_q - L^s_q d_s L^k_p + L^k_s (d_q L^s_p - d_p L^s_q)
    '''
    shape = op.shape
    n = shape.n
    out = {}
    for p in range(1, n + 1):
        for q in range(p + 1, n + 1):
            for k in range(1, n + 1):
                acc = op.matrix[0][0].zero_like()
                for s in range(1, n + 1):
                    acc = acc + op.matrix[s - 1][p - 1] * op.matrix[k - 1][q - 1].partial(s)
                    acc = acc - op.matrix[s - 1][q - 1] * op.matrix[k - 1][p - 1].partial(s)
                    acc = acc + op.matrix[k - 1][s - 1] * (
                        op.matrix[s - 1][p - 1].partial(q)
                        - op.matrix[s - 1][q - 1].partial(p))
                out[(p, q, k)] = acc
    return out


def test_torsion_matches_component_oracle():
    rng = random.Random(53)
    shape = BlockShape((2,))
    for _ in range(5):
        matrix = [[random_poly(rng, 2, [1, 2], degree=2) for _ in range(2)]
                  for _ in range(2)]
        op = OperatorField(shape, matrix)
        got = {tuple(v for _, v in e.label): e.value
               for e in nijenhuis_torsion(op).entries}
        expect = torsion_oracle(op)
        assert got == expect


def test_solver_outputs_have_torsion_free_multiplication():
    rng = random.Random(59)
    for sizes in ((3,), (2, 2)):
        field = solve(random_seed(rng, BlockShape(sizes))).field
        assert nijenhuis_torsion(mult_operator(field)).is_zero(0)


def test_torsion_of_nilpotent_upper_shift_vanishes():
    # entries (0, u1; 0, 0): all four bracket terms cancel identically
    shape = BlockShape((2,))
    op = OperatorField(shape, [[poly('0', 2), poly('u1', 2)],
                               [poly('0', 2), poly('0', 2)]])
    assert nijenhuis_torsion(op).is_zero(0)


def test_torsion_detects_non_nijenhuis_operator():
    shape = BlockShape((2,))
    op = OperatorField(shape, [[poly('0', 2), poly('1', 2)],
                               [poly('u1', 2), poly('0', 2)]])
    res = nijenhuis_torsion(op)
    by_label = {e.label: e.value for e in res.entries}
    # N(d_1, d_2) = -d_2
    assert by_label[(('i', 1), ('j', 2), ('k', 1))].is_zero()
    assert by_label[(('i', 1), ('j', 2), ('k', 2))] == poly('-1', 2)
    assert res.max_abs() >= Fraction(1, 10)


# ---- weak-identity bracket reduction ----

def test_bracket_reduction_trivial_orders():
    shape = BlockShape((2,))
    field = solve(euler_seed(shape)).field
    assert weak_ei_bracket_check(field, field, field, 0, 0).is_zero(0)


def test_bracket_reduction_euler():
    shape = BlockShape((3,))
    field = solve(euler_seed(shape)).field
    assert weak_ei_bracket_check(field, field, field, 3, 3).is_zero(0)


def test_bracket_reduction_rejects_non_invariant_fields():
    shape = BlockShape((2,))
    good = solve(euler_seed(shape)).field
    bad = VectorField(shape, [poly('u2', 2), poly('0', 2)])
    with pytest.raises(PreconditionFailed):
        weak_ei_bracket_check(bad, good, good, 1, 1)


def test_bracket_reduction_weak_triples():
    rng = random.Random(61)
    shape = BlockShape((3,))
    for _ in range(3):
        fields = [solve(random_seed(rng, shape, weak=True)).field
                  for _ in range(3)]
        res = weak_ei_bracket_check(fields[0], fields[1], fields[2], 2, 2)
        assert res.is_zero(0)


# ---- report shape ----

def test_residual_report_exact_and_sampled():
    field = solve(euler_seed(BlockShape((3,)))).field
    exact = ei_residual(field).to_report()
    assert exact['max_abs'] == '0(exact)'
    assert 'worst_entry' not in exact

    bad = VectorField(BlockShape((2,)), [poly('u2', 2), poly('0', 2)])
    jet_res = ei_residual(bad.to_jet((1.0, 2.0), 3))
    report = jet_res.to_report(1e-9)
    assert report['backend'] == 'jet'
    assert report['max_abs'] == 2.0
    assert report['worst_entry']['point'] == [1.0, 2.0]
    assert report['worst_entry']['indices'] == {'block': 1, 'i': 2, 'j': 2, 'k': 2}
