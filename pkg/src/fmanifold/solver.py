'''Construction of invariance-law solutions from free seed functions.

Inside a block of size m the triangular derivative law determines every
component from the seeds

    f_1(u1),  f_i(u1, u2)  for i = 2..m,

all in block-local coordinates.  Component m is recovered by
integrating the one-form whose l-th coefficient (l = 3..m) is

    (l-1) d2 E^{m-l+2} - (l-2) d1 E^{m-l+1},

a combination of components already built, then adding the free seed.
The form is closed by construction; the integration runs through the
scaling homotopy so the integral carries no monomial free of the
integrated variables, and distinct seeds change the solution only
through the seed terms themselves.
'''

from .blocks import BlockShape, VectorField
from .calculus import atlas_residual
from .errors import SeedSupportViolation, ShapeMismatch
from .scalar import Poly, homotopy_integrate, parse_scalar


class EISeed:
    '''Free data for one solution: per block, polynomials f_1..f_m.

    Stored in the flat variables of the full shape; f_1 may involve
    only the block's first coordinate, the rest only the first two.
    Support is verified by differentiation.
    '''

    __slots__ = ('shape', 'fs')

    def __init__(self, shape, fs):
        fs = [list(block) for block in fs]
        if len(fs) != shape.r:
            raise ShapeMismatch('one seed list per block required')
        for alpha, m in shape.blocks():
            if len(fs[alpha - 1]) != m:
                raise ShapeMismatch(
                    f'block {alpha} needs {m} seed functions, got {len(fs[alpha - 1])}')
        self.shape = shape
        self.fs = fs
        self._check_support()

    def _check_support(self):
        shape = self.shape
        for alpha, m in shape.blocks():
            allowed1 = {shape.flat(alpha, 1)}
            allowed2 = allowed1 | ({shape.flat(alpha, 2)} if m >= 2 else set())
            for i, f in enumerate(self.fs[alpha - 1], start=1):
                allowed = allowed1 if i == 1 else allowed2
                for v in range(1, shape.n + 1):
                    if v not in allowed and not f.partial(v).is_zero():
                        raise SeedSupportViolation(
                            f'seed f_{i} of block {alpha} depends on u{v}')

    def f(self, alpha, i):
        return self.fs[alpha - 1][i - 1]

    @classmethod
    def from_json(cls, data):
        '''Seed file layout:

        {"shape": [m1, ...],
         "seeds": [{"block": a, "f": ["expr(u1)", "expr(u1,u2)", ...]}, ...]}

        Expressions use block-local names u1, u2 and are re-embedded
        into the flat coordinates here.
        '''
        shape = BlockShape(data['shape'])
        by_block = {}
        for item in data.get('seeds', []):
            by_block[int(item['block'])] = item['f']
        fs = []
        for alpha, m in shape.blocks():
            if alpha not in by_block:
                raise ShapeMismatch(f'seed file missing block {alpha}')
            texts = by_block[alpha]
            if len(texts) != m:
                raise ShapeMismatch(f'block {alpha} needs {m} seed expressions')
            mapping = {1: shape.flat(alpha, 1)}
            if m >= 2:
                mapping[2] = shape.flat(alpha, 2)
            block = []
            for text in texts:
                local = parse_scalar(text, 'poly', 2)
                block.append(local.remap(shape.n, mapping))
            fs.append(block)
        return cls(shape, fs)

    def to_json(self):
        shape = self.shape
        seeds = []
        for alpha, m in shape.blocks():
            back = {shape.flat(alpha, 1): 1}
            if m >= 2:
                back[shape.flat(alpha, 2)] = 2
            block = []
            for f in self.fs[alpha - 1]:
                block.append(f.remap(2, back).to_expr())
            seeds.append({'block': alpha, 'f': block})
        return {'shape': list(shape.sizes), 'seeds': seeds}

    def __eq__(self, other):
        return (isinstance(other, EISeed) and other.shape == self.shape
                and all(fa == fb for ba, bb in zip(self.fs, other.fs)
                        for fa, fb in zip(ba, bb)))


class SolvedEI:
    '''A solved field together with its seed and integral parts.

    parts[(alpha, m)] is the integrated portion of component m of block
    alpha: the component minus its seed.  It vanishes whenever the
    block coordinates beyond the second are set to zero.
    '''

    __slots__ = ('field', 'seed', 'parts')

    def __init__(self, field, seed, parts):
        self.field = field
        self.seed = seed
        self.parts = parts

    @property
    def shape(self):
        return self.field.shape


def solve(seed):
    '''Build the unique solution with the given seed data.'''
    shape = seed.shape
    n = shape.n
    comps = [None] * n
    parts = {}
    for alpha, m in shape.blocks():
        block = [None] * (m + 1)
        block[1] = seed.f(alpha, 1)
        parts[(alpha, 1)] = Poly.zero(n)
        if m >= 2:
            block[2] = seed.f(alpha, 2)
            parts[(alpha, 2)] = Poly.zero(n)
        for mm in range(3, m + 1):
            form = {}
            for l in range(3, mm + 1):
                g = Poly.zero(n)
                upper = block[mm - l + 2]
                if upper is not None:
                    g = g + upper.partial(shape.flat(alpha, 2)) * (l - 1)
                lower = block[mm - l + 1]
                if lower is not None:
                    g = g - lower.partial(shape.flat(alpha, 1)) * (l - 2)
                form[shape.flat(alpha, l)] = g
            part = homotopy_integrate(form, sorted(form))
            parts[(alpha, mm)] = part
            block[mm] = part + seed.f(alpha, mm)
        for i in range(1, m + 1):
            comps[shape.flat(alpha, i) - 1] = block[i]
    field = VectorField(shape, comps)
    solved = SolvedEI(field, seed, parts)
    check = atlas_residual(field)
    if not check.is_zero():
        raise AssertionError(f'internal solver error: {check.worst()!r}')
    return solved


def euler_seed(shape):
    '''Seed whose solution is the coordinate-scaling field u^i d_i.'''
    fs = []
    for alpha, m in shape.blocks():
        block = [Poly.var(shape.flat(alpha, 1), shape.n)]
        if m >= 2:
            block.append(Poly.var(shape.flat(alpha, 2), shape.n))
        for _ in range(3, m + 1):
            block.append(Poly.zero(shape.n))
        fs.append(block)
    return EISeed(shape, fs)


def verify_seed_freeness(seed_a, seed_b):
    '''Check that two solutions differ only through their seeds.

    Whenever the first m-1 seed functions of a block agree, the
    integrated part of component m must agree as well.  Returns True
    when every applicable comparison holds.
    '''
    if seed_a.shape != seed_b.shape:
        raise ShapeMismatch('seeds live on different shapes')
    sol_a = solve(seed_a)
    sol_b = solve(seed_b)
    for alpha, m in seed_a.shape.blocks():
        for mm in range(1, m + 1):
            prefix_equal = all(seed_a.f(alpha, i) == seed_b.f(alpha, i)
                               for i in range(1, mm))
            if prefix_equal and sol_a.parts[(alpha, mm)] != sol_b.parts[(alpha, mm)]:
                return False
    return True
