'''Shared helpers: deterministic random inputs and closed-form oracles.'''

from fractions import Fraction

from fmanifold import BlockShape, Poly, parse_scalar
from fmanifold.solver import EISeed


def poly(text, n):
    return parse_scalar(text, 'poly', n)


def rational(text, n):
    return parse_scalar(text, 'rational', n)


def random_poly(rng, n, variables, degree=3, terms=3, nonzero=False):
    '''Sparse random polynomial with small rational coefficients.'''
    p = Poly.zero(n)
    for _ in range(terms):
        c = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        if c == 0:
            continue
        exps = [0] * n
        for _ in range(rng.randint(0, degree)):
            exps[rng.choice(variables) - 1] += 1
        p = p + Poly(n, {tuple(exps): c})
    if nonzero and p.is_zero():
        p = p + Poly.const(n, Fraction(1, 2))
    return p


def random_seed(rng, shape, degree=3, weak=False):
    '''Seed with f_1 in the block's u1 and the rest in its (u1, u2).

    weak seeds set every f_1 to zero, producing fields that satisfy the
    invariance law without being invertible.
    '''
    fs = []
    for alpha, m in shape.blocks():
        u1 = shape.flat(alpha, 1)
        if weak:
            block = [Poly.zero(shape.n)]
        else:
            block = [random_poly(rng, shape.n, [u1], degree)]
        if m >= 2:
            u2 = shape.flat(alpha, 2)
            for _ in range(2, m + 1):
                block.append(random_poly(rng, shape.n, [u1, u2], degree))
        fs.append(block)
    return EISeed(shape, fs)


def invertible_random_seed(rng, shape, degree=3):
    '''Random seed whose solution has nonvanishing leading components.'''
    fs = []
    for alpha, m in shape.blocks():
        u1 = shape.flat(alpha, 1)
        f1 = random_poly(rng, shape.n, [u1], degree)
        # keep the lead bounded away from zero near the sample box
        f1 = f1 + Poly.const(shape.n, Fraction(rng.randint(5, 9)))
        block = [f1]
        if m >= 2:
            u2 = shape.flat(alpha, 2)
            for _ in range(2, m + 1):
                block.append(random_poly(rng, shape.n, [u1, u2], degree))
        fs.append(block)
    return EISeed(shape, fs)


def low_level_formulas(f1, f2, f3, f4, f5):
    '''Closed forms of components three to five on a single block of five.

    Independent of the solver: spelled out term by term exactly as the
    triangular system unrolls by hand.
    '''
    n = 5
    u3, u4, u5 = (Poly.var(i, n) for i in (3, 4, 5))
    d1 = lambda p: p.partial(1)
    d2 = lambda p: p.partial(2)
    e3 = (d2(f2) * 2 - d1(f1)) * u3 + f3
    e4 = ((d2(f2) * 3 - d1(f1) * 2) * u4
          + d2(d2(f2)) * 2 * u3 ** 2
          + (d2(f3) * 2 - d1(f2)) * u3 + f4)
    e5 = ((d2(f2) * 4 - d1(f1) * 3) * u5
          + (d2(f3) * 3 - d1(f2) * 2) * u4
          + d2(d2(f2)) * 6 * u3 * u4
          + d2(d2(d2(f2))) * Fraction(4, 3) * u3 ** 3
          + (d2(d2(f3)) * 4 - d1(d2(f2)) * 4 + d1(d1(f1))) * Fraction(1, 2) * u3 ** 2
          + (d2(f4) * 2 - d1(f3)) * u3 + f5)
    return e3, e4, e5


def shape_of(*sizes):
    return BlockShape(sizes)
