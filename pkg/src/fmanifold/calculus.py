'''Lie calculus on block fields and the identities that are checked.

Every check returns a Residual: a labeled list of scalar entries that
must vanish.  On the exact backends an entry is a polynomial or a
quotient and vanishing is literal; on the jet backend an entry is a jet
anchored at a sample point and the caller inspects its value.  The same
evaluators run on both backends, so exact and sampled verification
share one code path.
'''

from fractions import Fraction

from .blocks import VectorField, coordinate_field, zero_field
from .errors import PreconditionFailed, ShapeMismatch
from .scalar import Jet


class ResidualEntry:

    __slots__ = ('label', 'value', 'point')

    def __init__(self, label, value, point=None):
        self.label = label
        self.value = value
        if point is None and isinstance(value, Jet):
            point = tuple(value.base)
        self.point = point

    def magnitude(self):
        '''|value| as a comparable number.

        Jets report the absolute value at their base point.  Exact
        entries report the largest absolute coefficient, which is zero
        exactly when the function is zero.
        '''
        v = self.value
        if isinstance(v, Jet):
            return abs(v.value())
        if isinstance(v, (int, float, Fraction)):
            return abs(v)
        num = v.num if hasattr(v, 'num') else v
        return float(max((abs(c) for c in num.coeffs.values()), default=0))

    def is_zero(self, tol=0):
        v = self.value
        if isinstance(v, Jet):
            return abs(v.value()) <= tol
        if isinstance(v, (int, float, Fraction)):
            return abs(v) <= tol
        return v.is_zero()

    def __repr__(self):
        return f'ResidualEntry({self.label}, magnitude={self.magnitude()})'


class Residual:
    '''Outcome of one identity check.'''

    def __init__(self, identity, backend, entries, seed=None):
        self.identity = identity
        self.backend = backend
        self.entries = list(entries)
        self.seed = seed

    def is_zero(self, tol=0):
        return all(e.is_zero(tol) for e in self.entries)

    def max_abs(self):
        return max((e.magnitude() for e in self.entries), default=0.0)

    def worst(self):
        if not self.entries:
            return None
        return max(self.entries, key=lambda e: e.magnitude())

    def merge(self, other):
        if other.identity != self.identity:
            raise ValueError('cannot merge residuals of different identities')
        return Residual(self.identity, self.backend,
                        self.entries + other.entries, seed=self.seed)

    def to_report(self, tol=0):
        exact = self.backend in ('poly', 'rational')
        zero = self.is_zero(0 if exact else tol)
        if exact and zero:
            max_abs = '0(exact)'
        else:
            max_abs = float(self.max_abs())
        report = {'identity': self.identity, 'backend': self.backend, 'max_abs': max_abs}
        worst = self.worst()
        if worst is not None and not zero:
            report['worst_entry'] = {
                'indices': dict(worst.label),
                'point': None if worst.point is None else [float(x) for x in worst.point],
            }
        if self.seed is not None:
            report['seed'] = self.seed
        return report

    def __repr__(self):
        return (f'Residual({self.identity}, backend={self.backend}, '
                f'entries={len(self.entries)}, max={self.max_abs()})')


class OperatorField:
    '''An endomorphism of the tangent bundle in coordinate frame.

    matrix[i][j] is the i-th component of the image of d_{j+1}; both
    indices are 0-based internally, 1-based in the public helpers.
    '''

    __slots__ = ('shape', 'matrix')

    def __init__(self, shape, matrix):
        matrix = [list(row) for row in matrix]
        if len(matrix) != shape.n or any(len(row) != shape.n for row in matrix):
            raise ShapeMismatch('operator matrix must be n by n')
        self.shape = shape
        self.matrix = matrix

    @property
    def backend(self):
        return self.matrix[0][0].backend

    def column(self, j):
        '''Image of the j-th coordinate field (1-based).'''
        return VectorField(self.shape, [row[j - 1] for row in self.matrix])

    def apply(self, field):
        comps = []
        for i in range(self.shape.n):
            acc = self.matrix[0][0].zero_like()
            for j in range(self.shape.n):
                entry = self.matrix[i][j]
                if not entry.is_zero():
                    acc = acc + entry * field.components[j]
            comps.append(acc)
        return VectorField(self.shape, comps)

    def to_jet(self, point, order):
        return OperatorField(self.shape,
                             [[e.to_jet(point, order) for e in row] for row in self.matrix])


def lie_bracket(x, y):
    '''[X, Y]^k = sum_i X^i d_i Y^k - Y^i d_i X^k.'''
    x._check(y)
    n = x.shape.n
    comps = []
    for k in range(n):
        acc = x.components[0].zero_like()
        for i in range(n):
            xi = x.components[i]
            yi = y.components[i]
            if not xi.is_zero():
                acc = acc + xi * y.components[k].partial(i + 1)
            if not yi.is_zero():
                acc = acc - yi * x.components[k].partial(i + 1)
        comps.append(acc)
    return VectorField(x.shape, comps)


def mult_operator(field):
    '''Multiplication by the field, as an operator in coordinate frame.

    Block diagonal; block alpha is lower triangular Toeplitz with the
    block components of the field down the first column.
    '''
    shape = field.shape
    zero = field.components[0].zero_like()
    matrix = [[zero] * shape.n for _ in range(shape.n)]
    for alpha, m in shape.blocks():
        for i in range(1, m + 1):
            for j in range(1, i + 1):
                matrix[shape.flat(alpha, i) - 1][shape.flat(alpha, j) - 1] = \
                    field.comp(alpha, i - j + 1)
    return OperatorField(shape, matrix)


def nijenhuis_torsion(op):
    '''Torsion of an operator field on all coordinate pairs.

    N(X,Y) = [LX, LY] - L[X, LY] - L[LX, Y] + L L [X, Y]; coordinate
    fields make the last term vanish but it is kept for fidelity.
    '''
    shape = op.shape
    like = op.matrix[0][0]
    entries = []
    for p in range(1, shape.n + 1):
        dp = coordinate_field(shape, p, like=like)
        lp = op.column(p)
        for q in range(p + 1, shape.n + 1):
            dq = coordinate_field(shape, q, like=like)
            lq = op.column(q)
            tors = (lie_bracket(lp, lq)
                    - op.apply(lie_bracket(dp, lq))
                    - op.apply(lie_bracket(lp, dq))
                    + op.apply(op.apply(lie_bracket(dp, dq))))
            for k, c in enumerate(tors.components, start=1):
                entries.append(ResidualEntry((('i', p), ('j', q), ('k', k)), c))
    return Residual('nijenhuis', op.backend, entries)


def _guarded(field, alpha, j):
    '''Block component with out-of-range indices reading as zero.'''
    if j < 1 or j > field.shape.sizes[alpha - 1]:
        return field.components[0].zero_like()
    return field.components[field.shape.flat(alpha, j) - 1]


def ei_residual(candidate):
    '''Pointwise form of the invariance law for a candidate field.

    Same-block entries cover index pairs j, k >= 2; pairs with a unit
    index vanish identically inside one block and are skipped.  Between
    blocks the law collapses to locality, one derivative per entry:
    components of block alpha may not depend on coordinates of block
    beta.
    '''
    shape = candidate.shape
    zero = candidate.components[0].zero_like()
    entries = []
    for alpha, m in shape.blocks():
        for i in range(1, m + 1):
            for j in range(2, m + 1):
                for k in range(j, m + 1):
                    r = zero
                    if j + k - 1 <= m:
                        r = r - _guarded(candidate, alpha, i).partial(shape.flat(alpha, j + k - 1))
                    g = _guarded(candidate, alpha, i - k + 1)
                    if not g.is_zero():
                        r = r + g.partial(shape.flat(alpha, j))
                    g = _guarded(candidate, alpha, i - j + 1)
                    if not g.is_zero():
                        r = r + g.partial(shape.flat(alpha, k))
                    g = _guarded(candidate, alpha, i - j - k + 2)
                    if not g.is_zero():
                        for sigma, _ in shape.blocks():
                            r = r - g.partial(shape.flat(sigma, 1))
                    entries.append(ResidualEntry(
                        (('block', alpha), ('i', i), ('j', j), ('k', k)), r))
        for beta, mb in shape.blocks():
            if beta == alpha:
                continue
            for i in range(1, m + 1):
                comp = _guarded(candidate, alpha, i)
                for s in range(1, mb + 1):
                    entries.append(ResidualEntry(
                        (('block', alpha), ('i', i), ('cross', beta), ('s', s)),
                        comp.partial(shape.flat(beta, s))))
    return Residual('eventual-identity', candidate.backend, entries)


def atlas_residual(candidate):
    '''Triangular derivative law for a candidate field.

    Inside block alpha, for l <= m:
        d_l E^m = (l-1) d_2 E^{m-l+2} - (l-2) d_1 E^{m-l+1},
    for l > m the derivative vanishes, and across blocks every
    derivative vanishes.  Indices overflowing the block read as zero.
    '''
    shape = candidate.shape
    entries = []
    for alpha, ma in shape.blocks():
        for m in range(1, ma + 1):
            em = _guarded(candidate, alpha, m)
            for l in range(1, ma + 1):
                r = em.partial(shape.flat(alpha, l))
                if l <= m:
                    g = _guarded(candidate, alpha, m - l + 2)
                    if l != 1 and not g.is_zero():
                        r = r - g.partial(shape.flat(alpha, 2)) * (l - 1)
                    g = _guarded(candidate, alpha, m - l + 1)
                    if l != 2 and not g.is_zero():
                        r = r + g.partial(shape.flat(alpha, 1)) * (l - 2)
                entries.append(ResidualEntry(
                    (('block', alpha), ('m', m), ('l', l)), r))
            for beta, mb in shape.blocks():
                if beta == alpha:
                    continue
                for l in range(1, mb + 1):
                    entries.append(ResidualEntry(
                        (('block', alpha), ('m', m), ('cross', beta), ('l', l)),
                        em.partial(shape.flat(beta, l))))
    return Residual('triangular-system', candidate.backend, entries)


def _lie_derivative_of_product(product, a, z, w):
    # (L_A prod)(Z, W) = [A, Z prod W] - [A, Z] prod W - Z prod [A, W]
    return (lie_bracket(a, product(z, w))
            - product(lie_bracket(a, z), w)
            - product(z, lie_bracket(a, w)))


def hm_residual(product, shape, like=None):
    '''Multiplicativity of Lie derivatives for a commutative product.

    Checks L_{X o Y}(o) = X o L_Y(o) + Y o L_X(o) on coordinate fields,
    exploiting symmetry in (X, Y) and in the argument pair.
    '''
    coords = [coordinate_field(shape, i, like=like) for i in range(1, shape.n + 1)]
    backend = coords[0].backend
    entries = []
    for a in range(shape.n):
        for b in range(a, shape.n):
            xy = product(coords[a], coords[b])
            for c in range(shape.n):
                for d in range(c, shape.n):
                    lhs = _lie_derivative_of_product(product, xy, coords[c], coords[d])
                    rhs = (product(coords[a], _lie_derivative_of_product(
                               product, coords[b], coords[c], coords[d]))
                           + product(coords[b], _lie_derivative_of_product(
                               product, coords[a], coords[c], coords[d])))
                    resid = lhs - rhs
                    for k, comp in enumerate(resid.components, start=1):
                        if comp.is_zero():
                            continue
                        entries.append(ResidualEntry(
                            (('X', a + 1), ('Y', b + 1), ('Z', c + 1), ('W', d + 1), ('k', k)),
                            comp))
    if not entries:
        zero = coords[0].components[0].zero_like()
        entries.append(ResidualEntry((('all', 0),), zero))
    return Residual('product-invariance', backend, entries)


def weak_ei_bracket_check(alpha_field, beta0, beta1, nmax, mmax, tol=0):
    '''Bracket reduction for products with a shared invariant field.

    For fields passing ei_residual the brackets of beta0 o alpha^n with
    beta1 o alpha^m reduce to first powers:

        [b0 o a^n, b1 o a^m] = a^(n+m-1) o (m [b0, b1 o a] + n [b0 o a, b1])
                               - (n+m-1) a^(n+m) o [b0, b1].

    When n = m = 0 the middle term carries a vanishing coefficient and
    is read as zero, so no negative power is ever formed.
    '''
    from .blocks import circ, power

    for name, f in (('alpha', alpha_field), ('beta0', beta0), ('beta1', beta1)):
        if not ei_residual(f).is_zero(tol):
            raise PreconditionFailed(f'{name} fails the invariance law')

    shape = alpha_field.shape
    zero = zero_field(shape, alpha_field.components[0])
    entries = []
    b0b1 = lie_bracket(beta0, beta1)
    b0_b1a = lie_bracket(beta0, circ(beta1, alpha_field))
    b0a_b1 = lie_bracket(circ(beta0, alpha_field), beta1)
    powers = [power(alpha_field, k) for k in range(nmax + mmax + 1)]
    for n in range(nmax + 1):
        for m in range(mmax + 1):
            lhs = lie_bracket(circ(beta0, powers[n]), circ(beta1, powers[m]))
            if n + m >= 1:
                braces = b0_b1a.scale(m) + b0a_b1.scale(n)
                mid = circ(powers[n + m - 1], braces)
            else:
                mid = zero
            last = circ(powers[n + m], b0b1).scale(n + m - 1)
            resid = lhs - mid + last
            for k, comp in enumerate(resid.components, start=1):
                entries.append(ResidualEntry((('n', n), ('m', m), ('k', k)), comp))
    return Residual('bracket-reduction', alpha_field.backend, entries)


def scalar_entry_value(entry):
    '''Float value of an entry for report tables.'''
    v = entry.value
    if isinstance(v, Jet):
        return float(v.value())
    return entry.magnitude()
