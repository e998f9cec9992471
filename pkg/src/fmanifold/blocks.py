'''Block multiplication of tangent fields in generalized canonical
coordinates.

A shape (m_1, ..., m_r) fixes one coordinate block per irreducible
factor.  Within block alpha the coordinate fields multiply by index
shift,

    d_{j(a)} o d_{k(b)} = delta_ab d_{(j+k-1)(a)},   j + k - 1 <= m_a,

and the product vanishes when the shifted index overflows the block.
Componentwise that makes the product of two fields a truncated Cauchy
convolution per block, the unit the first coordinate field of every
block, and inversion a forward substitution against the leading
component.
'''

from .errors import DivisionByZeroFunction, NotInvertible, ShapeMismatch
from .scalar import Poly, parse_scalar
from .scalar.base import same_backend


class BlockShape:
    '''Jordan-type block sizes with 1-based flat indexing.

    flat(alpha, j) enumerates block 1 first: shape (3, 2) sends
    (1,1),(1,2),(1,3),(2,1),(2,2) to 1..5.
    '''

    __slots__ = ('sizes', 'n', '_offsets')

    def __init__(self, sizes):
        sizes = tuple(int(m) for m in sizes)
        if not sizes or any(m < 1 for m in sizes):
            raise ShapeMismatch(f'invalid block sizes {sizes}')
        self.sizes = sizes
        self.n = sum(sizes)
        offs = [0]
        for m in sizes:
            offs.append(offs[-1] + m)
        self._offsets = tuple(offs)

    @property
    def r(self):
        return len(self.sizes)

    def flat(self, alpha, j):
        if not 1 <= alpha <= self.r or not 1 <= j <= self.sizes[alpha - 1]:
            raise ShapeMismatch(f'index ({alpha},{j}) outside shape {self.sizes}')
        return self._offsets[alpha - 1] + j

    def block_of(self, flat):
        if not 1 <= flat <= self.n:
            raise ShapeMismatch(f'flat index {flat} outside 1..{self.n}')
        for alpha in range(1, self.r + 1):
            if flat <= self._offsets[alpha]:
                return alpha, flat - self._offsets[alpha - 1]
        raise AssertionError

    def blocks(self):
        '''Iterate (alpha, m_alpha).'''
        return enumerate(self.sizes, start=1)

    def __eq__(self, other):
        return isinstance(other, BlockShape) and self.sizes == other.sizes

    def __hash__(self):
        return hash(self.sizes)

    def __repr__(self):
        return f'BlockShape{self.sizes}'

    @classmethod
    def parse(cls, text):
        return cls(int(part) for part in str(text).split(','))


class VectorField:
    '''A tangent field: one scalar component per flat coordinate index.'''

    __slots__ = ('shape', 'components')

    def __init__(self, shape, components):
        components = list(components)
        if len(components) != shape.n:
            raise ShapeMismatch(f'{len(components)} components for shape {shape.sizes}')
        first = components[0]
        for c in components[1:]:
            same_backend(first, c)
        self.shape = shape
        self.components = components

    @property
    def backend(self):
        return self.components[0].backend

    def comp(self, alpha, j):
        '''Block-local component, zero scalar when j overflows the block.'''
        if 1 <= j <= self.shape.sizes[alpha - 1]:
            return self.components[self.shape.flat(alpha, j) - 1]
        return self.components[0].zero_like()

    def _wrap(self, components):
        return VectorField(self.shape, components)

    def __add__(self, other):
        self._check(other)
        return self._wrap([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        self._check(other)
        return self._wrap([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return self._wrap([-a for a in self.components])

    def scale(self, f):
        '''Multiply every component by a scalar function or number.'''
        return self._wrap([a * f for a in self.components])

    def _check(self, other):
        if not isinstance(other, VectorField) or other.shape != self.shape:
            raise ShapeMismatch('vector fields live on different shapes')

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other):
        if not isinstance(other, VectorField) or other.shape != self.shape:
            return NotImplemented
        return all((a - b).is_zero() for a, b in zip(self.components, other.components))

    def restrict_block(self, alpha):
        '''Zero out every component outside the given block.'''
        zero = self.components[0].zero_like()
        comps = [zero] * self.shape.n
        for j in range(1, self.shape.sizes[alpha - 1] + 1):
            idx = self.shape.flat(alpha, j) - 1
            comps[idx] = self.components[idx]
        return self._wrap(comps)

    def map(self, fn):
        return self._wrap([fn(c) for c in self.components])

    def to_rational(self):
        return self._wrap([c.to_rational() if isinstance(c, Poly) else c
                           for c in self.components])

    def to_jet(self, point, order):
        return self._wrap([c.to_jet(point, order) for c in self.components])

    def evaluate(self, point):
        return [c.evaluate(point) for c in self.components]

    # ---- serialization ----

    def to_json(self):
        return {'shape': list(self.shape.sizes),
                'components': [c.to_expr() for c in self.components]}

    @classmethod
    def from_json(cls, data, backend='poly', point=None, order=3):
        shape = BlockShape(data['shape'])
        comps = data['components']
        if len(comps) != shape.n:
            raise ShapeMismatch('component count does not match the shape')
        return cls(shape, [parse_scalar(src, backend, shape.n, point=point, order=order)
                           for src in comps])

    def __repr__(self):
        comps = ', '.join(c.to_expr() for c in self.components)
        return f'VectorField[{self.shape.sizes}]({comps})'


def zero_field(shape, like):
    z = like.zero_like()
    return VectorField(shape, [z] * shape.n)


def unit_field(shape, like=None):
    '''The global unit: first coordinate field of every block.'''
    if like is None:
        like = Poly.zero(shape.n)
    zero = like.zero_like()
    one = like.one_like()
    comps = [zero] * shape.n
    for alpha, _ in shape.blocks():
        comps[shape.flat(alpha, 1) - 1] = one
    return VectorField(shape, comps)


def coordinate_field(shape, flat, like=None):
    if like is None:
        like = Poly.zero(shape.n)
    comps = [like.zero_like()] * shape.n
    comps[flat - 1] = like.one_like()
    return VectorField(shape, comps)


def circ(x, y):
    '''Blockwise truncated convolution product.'''
    x._check(y)
    shape = x.shape
    zero = x.components[0].zero_like()
    comps = [zero] * shape.n
    for alpha, m in shape.blocks():
        for i in range(1, m + 1):
            acc = zero
            for j in range(1, i + 1):
                k = i + 1 - j
                acc = acc + x.comp(alpha, j) * y.comp(alpha, k)
            comps[shape.flat(alpha, i) - 1] = acc
    return VectorField(shape, comps)


def power(x, k):
    '''k-th product power; the zeroth power is the unit field.'''
    if k < 0:
        raise ValueError('negative powers need invert()')
    out = unit_field(x.shape, like=x.components[0])
    for _ in range(k):
        out = circ(out, x)
    return out


def invert(x):
    '''Product inverse, block by block.

    Forward substitution: the leading component divides everything, so
    the inverse exists wherever each leading component is invertible on
    the scalar backend.
    '''
    shape = x.shape
    zero = x.components[0].zero_like()
    comps = [zero] * shape.n
    for alpha, m in shape.blocks():
        lead = x.comp(alpha, 1)
        if lead.is_zero():
            raise NotInvertible(alpha)
        try:
            inv = [None, lead.one_like() / lead]
            for i in range(2, m + 1):
                acc = zero
                for j in range(2, i + 1):
                    acc = acc + x.comp(alpha, j) * inv[i - j + 1]
                inv.append(-acc / lead)
        except DivisionByZeroFunction:
            raise NotInvertible(alpha) from None
        for i in range(1, m + 1):
            comps[shape.flat(alpha, i) - 1] = inv[i]
    return VectorField(shape, comps)


def dual_product(x, y, e_inv):
    '''The product twisted by an invertible field: e_inv o x o y.'''
    return circ(e_inv, circ(x, y))


def structure_tensor(product, shape, like=None):
    '''Structure functions of a bilinear product on coordinate fields.

    Returns {(i, j, k): scalar} with product(d_j, d_k) = sum_i c^i_jk d_i.
    Intended for debugging and report inspection.
    '''
    out = {}
    for j in range(1, shape.n + 1):
        for k in range(j, shape.n + 1):
            field = product(coordinate_field(shape, j, like=like),
                            coordinate_field(shape, k, like=like))
            for i, c in enumerate(field.components, start=1):
                if not c.is_zero():
                    out[(i, j, k)] = c
                    if j != k:
                        out[(i, k, j)] = c
    return out
