'''Dual frames generated by an invertible field and a second generator.

Given an invertible solution E and per-block generators a_{2..m}, the
frame is

    v_1 = E,   v_{i+1} = E^{-1} o v_i o v_2,

so v_i = E o alpha^(i-1) for alpha = E^{-1} o v_2.  Under the twisted
product the frame multiplies by pure index shift, which is what the
product and recursion checks verify.  The generator components beyond
a_2 are not free: they satisfy the same triangular law as the field
itself, with the integration "constants" C_m(u1, u2) pinned by a
first-order linear PDE.  construct_a completes a_2 to a full generator
either exactly (polynomial ansatz) or numerically along characteristic
curves.
'''

from fractions import Fraction

from .blocks import VectorField, circ, dual_product, invert, power, zero_field
from .calculus import Residual, ResidualEntry, atlas_residual, lie_bracket
from .errors import (
    NoPolynomialSolution, QViolated, SeedSupportViolation, ZeroGenerator,
)
from .scalar import Jet, Poly, homotopy_integrate


class DualFrame:
    '''Frame fields v_1..v_K, K the largest block size, zero padded.'''

    __slots__ = ('shape', 'field', 'field_inv', 'a', 'fields')

    def __init__(self, shape, field, field_inv, a, fields):
        self.shape = shape
        self.field = field
        self.field_inv = field_inv
        self.a = a
        self.fields = fields

    @property
    def backend(self):
        return self.field.backend

    @property
    def depth(self):
        return len(self.fields)

    def v(self, i):
        '''Frame field i (1-based); zero field beyond the largest block.'''
        if 1 <= i <= len(self.fields):
            return self.fields[i - 1]
        return zero_field(self.shape, self.field.components[0])

    def star(self, x, y):
        return dual_product(x, y, self.field_inv)

    def to_json(self):
        a_blocks = []
        for alpha, m in self.shape.blocks():
            comps = [self.a[(alpha, i)].to_expr() for i in range(2, m + 1)]
            a_blocks.append({'block': alpha, 'components': comps})
        return {'shape': list(self.shape.sizes),
                'E': self.field.to_json(),
                'a': a_blocks,
                'v': [f.to_json() for f in self.fields]}


def generator_field(shape, a, like):
    '''Assemble the v_2 field from generator components.'''
    zero = like.zero_like()
    comps = [zero] * shape.n
    for alpha, m in shape.blocks():
        for i in range(2, m + 1):
            comps[shape.flat(alpha, i) - 1] = a[(alpha, i)]
    return VectorField(shape, comps)


def build_frame(field, a, tol=Fraction(0)):
    '''Build the dual frame from an invertible field and generators.

    a maps (block, i) to the generator components, i = 2..m_alpha.  On
    exact backends the closed form v_j^j = a_2^(j-1) / E_1^(j-2) is
    verified literally; on jets it is verified within tol.  The leading
    generator of every block of size at least 2 must be nonzero.
    '''
    if field.backend == 'poly':
        field = field.to_rational()
        a = {k: (v.to_rational() if isinstance(v, Poly) else v) for k, v in a.items()}
    shape = field.shape
    like = field.components[0]
    for alpha, m in shape.blocks():
        if m >= 2:
            a2 = a.get((alpha, 2))
            if a2 is None or a2.is_zero():
                raise ZeroGenerator(f'block {alpha} generator vanishes')
            if isinstance(a2, Jet) and a2.value() == 0:
                raise ZeroGenerator(f'block {alpha} generator vanishes at the base point')
    field_inv = invert(field)
    v2 = generator_field(shape, a, like)
    depth = max(shape.sizes)
    fields = [field]
    if depth >= 2:
        fields.append(v2)
    for _ in range(3, depth + 1):
        fields.append(circ(field_inv, circ(fields[-1], v2)))
    frame = DualFrame(shape, field, field_inv, a, fields)
    _verify_diagonal(frame, tol)
    return frame


def _verify_diagonal(frame, tol):
    # v_j^j = a_2^(j-1) / E_1^(j-2), nonzero; guards the construction
    shape = frame.shape
    for alpha, m in shape.blocks():
        for j in range(2, m + 1):
            lead = frame.field.comp(alpha, 1)
            a2 = frame.a[(alpha, 2)]
            expect = (a2 ** (j - 1)) / (lead ** (j - 2))
            got = frame.v(j).comp(alpha, j)
            diff = got - expect
            bad = (not diff.is_zero(tol)) if isinstance(diff, Jet) else (not diff.is_zero())
            if bad:
                raise AssertionError(
                    f'frame diagonal mismatch in block {alpha} at level {j}')


def frame_product_check(frame):
    '''Shift law of the twisted product on the frame.

    v_i * v_j must be v_{i+j-1} with overflow truncated per block, and
    restrictions to different blocks must annihilate each other.
    '''
    shape = frame.shape
    entries = []
    for i in range(1, frame.depth + 1):
        for j in range(i, frame.depth + 1):
            resid = frame.star(frame.v(i), frame.v(j)) - frame.v(i + j - 1)
            for k, comp in enumerate(resid.components, start=1):
                entries.append(ResidualEntry((('i', i), ('j', j), ('k', k)), comp))
    for alpha, _ in shape.blocks():
        for beta, _ in shape.blocks():
            if beta <= alpha:
                continue
            for i in range(1, frame.depth + 1):
                for j in range(1, frame.depth + 1):
                    cross = frame.star(frame.v(i).restrict_block(alpha),
                                       frame.v(j).restrict_block(beta))
                    for k, comp in enumerate(cross.components, start=1):
                        if comp.is_zero():
                            continue
                        entries.append(ResidualEntry(
                            (('i', i), ('j', j), ('k', k),
                             ('blocks', (alpha, beta))), comp))
    return Residual('frame-product', frame.backend, entries)


def recursion_check(frame):
    '''Componentwise recursions and the support bound for frame fields.

    Two independent component recursions are verified for every
    admissible (j, J) inside each block,

      sim:  v_j^J = -(1/E^1) sum_s v_j^{J-s} E^{s+1}
                    + (1/E^1) sum_s v_{j-1}^s v_2^{J-s+1}
      hat:  v_j^J = (a_2/E^1) v_{j-1}^{J-1}
                    - (1/E^1) sum_s (v_j^{J-s} E^{s+1} - v_{j-1}^{J-s-1} a_{s+2})

    plus the support property: v_j^J may only involve the block's first
    J - j + 2 coordinates and nothing from other blocks.
    '''
    shape = frame.shape
    entries = []
    for alpha, m in shape.blocks():
        lead = frame.field.comp(alpha, 1)
        a2 = frame.a.get((alpha, 2))
        for j in range(3, m + 1):
            vj = frame.v(j)
            vjm1 = frame.v(j - 1)
            for J in range(j, m + 1):
                target = vj.comp(alpha, J)
                acc = target.zero_like()
                for s in range(1, J - j + 1):
                    acc = acc + vj.comp(alpha, J - s) * frame.field.comp(alpha, s + 1)
                sim = -(acc / lead)
                acc = target.zero_like()
                for s in range(1, J):
                    acc = acc + vjm1.comp(alpha, s) * frame.v(2).comp(alpha, J - s + 1)
                sim = sim + acc / lead
                entries.append(ResidualEntry(
                    (('law', 'sim'), ('block', alpha), ('j', j), ('J', J)),
                    target - sim))
                hat = (a2 / lead) * vjm1.comp(alpha, J - 1)
                acc = target.zero_like()
                for s in range(1, J - j + 1):
                    acc = acc + vj.comp(alpha, J - s) * frame.field.comp(alpha, s + 1)
                    acc = acc - vjm1.comp(alpha, J - s - 1) * frame.v(2).comp(alpha, s + 2)
                hat = hat - acc / lead
                entries.append(ResidualEntry(
                    (('law', 'hat'), ('block', alpha), ('j', j), ('J', J)),
                    target - hat))
        for j in range(2, m + 1):
            vj = frame.v(j)
            for J in range(1, m + 1):
                comp = vj.comp(alpha, J)
                for k in range(max(1, J - j + 3), m + 1):
                    entries.append(ResidualEntry(
                        (('law', 'support'), ('block', alpha), ('j', j), ('J', J), ('k', k)),
                        comp.partial(shape.flat(alpha, k))))
                for beta, mb in shape.blocks():
                    if beta == alpha:
                        continue
                    for l in range(1, mb + 1):
                        entries.append(ResidualEntry(
                            (('law', 'support'), ('block', alpha), ('j', j), ('J', J),
                             ('cross', beta), ('l', l)),
                            comp.partial(shape.flat(beta, l))))
    return Residual('frame-recursion', frame.backend, entries)


def v2_conditions(frame):
    '''Requirements on the generator for a commuting frame.

    Three groups: the generator field obeys the triangular law, the
    leading components solve the first-order compatibility equation

        E^1 d1 a_2 + E^2 d2 a_2 - a_2 d2 E^2 = 0,

    and the full commutator [v_1, v_2] vanishes.
    '''
    shape = frame.shape
    v2 = frame.v(2)
    entries = []
    for e in atlas_residual(v2).entries:
        entries.append(ResidualEntry((('law', 'triangular'),) + e.label, e.value, e.point))
    for alpha, m in shape.blocks():
        if m < 2:
            continue
        f1 = shape.flat(alpha, 1)
        f2 = shape.flat(alpha, 2)
        e1 = frame.field.comp(alpha, 1)
        e2 = frame.field.comp(alpha, 2)
        a2 = frame.a[(alpha, 2)]
        q = e1 * a2.partial(f1) + e2 * a2.partial(f2) - a2 * e2.partial(f2)
        entries.append(ResidualEntry((('law', 'compat'), ('block', alpha)), q))
    for k, comp in enumerate(lie_bracket(frame.v(1), frame.v(2)).components, start=1):
        entries.append(ResidualEntry((('law', 'commute'), ('k', k)), comp))
    return Residual('generator-conditions', frame.backend, entries)


def commutation_check(frame):
    '''Pairwise commutators of the frame fields.'''
    entries = []
    for i in range(1, frame.depth + 1):
        for j in range(i + 1, frame.depth + 1):
            br = lie_bracket(frame.v(i), frame.v(j))
            for k, comp in enumerate(br.components, start=1):
                entries.append(ResidualEntry((('i', i), ('j', j), ('k', k)), comp))
    return Residual('frame-commutation', frame.backend, entries)


def corollary_check(frame):
    '''Reduce every commutator to the base one.

    [v_i, v_j] = (j - i) alpha^(i+j-3) o [v_1, v_2], alpha = E^{-1} o v_2.
    The reduction holds whether or not the frame commutes, so it tests
    the frame algebra independently of the generator conditions.
    '''
    entries = []
    if frame.depth < 2:
        return Residual('commutator-reduction', frame.backend, entries)
    alpha_field = circ(frame.field_inv, frame.v(2))
    base = lie_bracket(frame.v(1), frame.v(2))
    for i in range(1, frame.depth + 1):
        for j in range(i + 1, frame.depth + 1):
            br = lie_bracket(frame.v(i), frame.v(j))
            expect = circ(power(alpha_field, i + j - 3), base)
            scale = j - i
            for k in range(1, frame.shape.n + 1):
                comp = br.components[k - 1] - expect.components[k - 1] * scale
                entries.append(ResidualEntry((('i', i), ('j', j), ('k', k)), comp))
    return Residual('commutator-reduction', frame.backend, entries)


# ---- generator completion ----

def _block_tail_vars(shape, alpha):
    m = shape.sizes[alpha - 1]
    return [shape.flat(alpha, l) for l in range(3, m + 1)]


def q_residual(field, alpha, a2):
    '''Left side of the compatibility equation for one block.'''
    shape = field.shape
    f1 = shape.flat(alpha, 1)
    f2 = shape.flat(alpha, 2)
    e1 = field.comp(alpha, 1)
    e2 = field.comp(alpha, 2)
    return e1 * a2.partial(f1) + e2 * a2.partial(f2) - a2 * e2.partial(f2)


def _check_generator_support(shape, alpha, a2):
    allowed = {shape.flat(alpha, 1), shape.flat(alpha, 2)}
    for v in a2.vars_used():
        if v not in allowed:
            raise SeedSupportViolation(
                f'generator of block {alpha} depends on u{v}')


def _rref_solve(rows, rhs, ncols):
    '''Exact Gaussian elimination; particular solution or None.

    rows is a list of dense Fraction lists.  Free columns are set to
    zero, so a homogeneous right side returns the zero vector.
    '''
    m = len(rows)
    mat = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, m) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = Fraction(1) / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(m):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [x - factor * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if mat[i][ncols] != 0:
            return None
    sol = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        sol[c] = mat[i][ncols]
    return sol


def _solve_completion_pde(e1, e2, q, source, f1, f2, n):
    '''Polynomial C(u_{f1}, u_{f2}) with e1 d1 C + e2 d2 C - q C = -source.

    Tries ascending total degree, so a vanishing source returns the
    zero polynomial; afterwards any part constant in the first variable
    that happens to solve the homogeneous equation is subtracted, fixing
    C to vanish on the u_{f1} = 0 slice whenever that is possible.
    '''
    def operator(c):
        return e1 * c.partial(f1) + e2 * c.partial(f2) - q * c

    cap = source.degree() + 4
    for d in range(cap + 1):
        monos = [(a, b) for a in range(d + 1) for b in range(d + 1 - a)]
        monos.sort(key=lambda ab: (ab[0] + ab[1], ab))
        images = []
        support = set(source.coeffs)
        for a, b in monos:
            e = [0] * n
            e[f1 - 1] = a
            e[f2 - 1] = b
            img = operator(Poly(n, {tuple(e): Fraction(1)}))
            images.append(img)
            support |= set(img.coeffs)
        support = sorted(support, key=lambda e: (sum(e), e))
        rows = [[img.coeffs.get(s, Fraction(0)) for img in images] for s in support]
        rhs = [-source.coeffs.get(s, Fraction(0)) for s in support]
        sol = _rref_solve(rows, rhs, len(monos))
        if sol is None:
            continue
        coeffs = {}
        for (a, b), c in zip(monos, sol):
            if c:
                e = [0] * n
                e[f1 - 1] = a
                e[f2 - 1] = b
                coeffs[tuple(e)] = c
        c_poly = Poly(n, coeffs)
        slice_part = c_poly.substitute_zero({f1})
        if not slice_part.is_zero() and operator(slice_part).is_zero():
            c_poly = c_poly - slice_part
        return c_poly
    return None


def completion_sources(field, alpha, a_block, part, mm):
    '''Restricted source of the completion PDE at level mm.

    a_block maps levels to the generator components known so far, part
    is the homotopy integral at level mm.  Everything is restricted to
    the block's tail coordinates set to zero, where the integral and
    its first two derivatives drop out.
    '''
    shape = field.shape
    tail = set(_block_tail_vars(shape, alpha))
    f1 = shape.flat(alpha, 1)
    em = field.comp(alpha, mm)
    src = field.comp(alpha, 1) * part.partial(f1)
    for t in range(2, mm + 1):
        src = src + field.comp(alpha, t) * part.partial(shape.flat(alpha, t))
    for t in range(2, mm):
        src = src - a_block[t] * em.partial(shape.flat(alpha, t))
    src = src - part * em.partial(shape.flat(alpha, mm))
    return src.substitute_zero(tail) if tail else src


def construct_a(solved, a2_by_block, mode='exact', u1_0=1.0, step=1e-3, order=3):
    '''Complete leading generators a_2 to full generator data.

    Exact mode returns {(block, i): Poly}; it raises QViolated when an
    a_2 fails the compatibility equation and NoPolynomialSolution when
    a completion level has no polynomial solution (numeric mode still
    applies there).  Numeric mode returns a CharacteristicGenerators
    object producing jets of the generators at query points.
    '''
    field = solved.field
    shape = solved.shape
    a2s = {}
    for alpha, m in shape.blocks():
        if m < 2:
            continue
        a2 = a2_by_block[alpha - 1]
        if a2 is None or a2.is_zero():
            raise ZeroGenerator(f'block {alpha} generator vanishes')
        _check_generator_support(shape, alpha, a2)
        qr = q_residual(field, alpha, a2)
        if not qr.is_zero():
            raise QViolated(alpha, qr)
        a2s[alpha] = a2

    if mode == 'numeric':
        from .characteristics import CharacteristicGenerators
        return CharacteristicGenerators(solved, a2s, u1_0=u1_0, step=step, order=order)
    if mode != 'exact':
        raise ValueError(f'unknown mode {mode!r}')

    n = shape.n
    out = {}
    for alpha, m in shape.blocks():
        if m < 2:
            continue
        f1 = shape.flat(alpha, 1)
        f2 = shape.flat(alpha, 2)
        e1 = field.comp(alpha, 1)
        e2 = field.comp(alpha, 2)
        a_block = {2: a2s[alpha]}
        for mm in range(3, m + 1):
            form = {}
            for l in range(3, mm + 1):
                g = a_block[mm - l + 2].partial(f2) * (l - 1)
                if mm - l + 1 >= 2:
                    g = g - a_block[mm - l + 1].partial(f1) * (l - 2)
                form[shape.flat(alpha, l)] = g
            part = homotopy_integrate(form, sorted(form))
            source = completion_sources(field, alpha, a_block, part, mm)
            q = e2.partial(f2) * (mm - 1) - e1.partial(f1) * (mm - 2)
            c_poly = _solve_completion_pde(e1, e2, q, source, f1, f2, n)
            if c_poly is None:
                raise NoPolynomialSolution(
                    f'level {mm} of block {alpha} admits no polynomial completion')
            a_block[mm] = part + c_poly
        for i in range(2, m + 1):
            out[(alpha, i)] = a_block[i]
    frame = build_frame(field, out)
    check = v2_conditions(frame)
    if not check.is_zero():
        raise AssertionError(f'completion postcondition failed: {check.worst()!r}')
    return out
