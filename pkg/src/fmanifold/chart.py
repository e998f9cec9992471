'''Coordinate charts adapted to a commuting dual frame.

Once the frame fields commute, coordinates w exist in which they are
the coordinate fields.  This module realizes the chart numerically as
a composition of flows: starting from a base point, flow along each
frame field for its w-parameter, one block after the other in a fixed
canonical order.  Commutativity makes the order irrelevant, which is
checked rather than assumed by re-running the composition in reverse.
Flows use the classical fourth-order Runge-Kutta step with a fixed
step size and one remainder step.

The chart is validated two ways: the finite-difference Jacobian column
for w^{i(a)} must match the frame field at the image point, and the
structure constants of the twisted product, conjugated back through
the Jacobian, must come out in canonical shift form.
'''

from fractions import Fraction

import numpy

from .blocks import VectorField
from .calculus import Residual, ResidualEntry
from .errors import (
    BackendMismatch, NonCommutingFrame, PreconditionFailed, SingularEncounter,
)
from .frame import v2_conditions, build_frame


class ChartSpec:
    '''Where and how to integrate a chart.

    points is the w-grid, a list of n-tuples; step is both the flow
    step and the finite-difference offset, so Jacobian errors shrink
    like its square.  floor bounds |E^1| and |a_2| away from zero at
    the base point and |E^1| along every trajectory.
    '''

    __slots__ = ('p0', 'points', 'step', 'tol', 'floor', 'check_commutation')

    def __init__(self, p0, points, step=1e-3, tol=1e-9, floor=0.5,
                 check_commutation=True):
        self.p0 = tuple(float(x) for x in p0)
        self.points = [tuple(float(x) for x in w) for w in points]
        self.step = float(step)
        self.tol = float(tol)
        self.floor = float(floor)
        self.check_commutation = check_commutation
        if self.step <= 0:
            raise ValueError('step must be positive')


class ChartResult:

    __slots__ = ('shape', 'p0', 'step', 'tol', 'samples')

    def __init__(self, shape, p0, step, tol, samples):
        self.shape = shape
        self.p0 = p0
        self.step = step
        self.tol = tol
        self.samples = samples

    def max_jac_err(self):
        return max((s['jac_err'] for s in self.samples), default=0.0)

    def max_push_err(self):
        vals = [s['push_err'] for s in self.samples if s['push_err'] is not None]
        return max(vals, default=0.0)

    def max_commute_gap(self):
        vals = [s.get('commute_gap') for s in self.samples]
        return max((v for v in vals if v is not None), default=0.0)

    def to_report(self):
        return {
            'p0': list(self.p0),
            'samples': [{'w': list(s['w']),
                         'u': list(s['u']),
                         'jac_err': s['jac_err'],
                         'push_err': s['push_err']} for s in self.samples],
            'h': self.step,
            'tol': self.tol,
        }


class _FlowTable:
    '''Compiled per-block frame fields and leading components.'''

    def __init__(self, frame):
        shape = frame.shape
        self.shape = shape
        self.fields = {}
        self.leads = {}
        self.e_comps = {}
        self.a2 = {}
        for alpha, m in shape.blocks():
            self.leads[alpha] = frame.field.comp(alpha, 1).compile_eval()
            self.e_comps[alpha] = [frame.field.comp(alpha, j).compile_eval()
                                   for j in range(1, m + 1)]
            if m >= 2:
                self.a2[alpha] = frame.a[(alpha, 2)].compile_eval()
            for i in range(1, m + 1):
                entries = []
                for j in range(i, m + 1):
                    comp = frame.v(i).comp(alpha, j)
                    if not comp.is_zero():
                        entries.append((shape.flat(alpha, j) - 1, comp.compile_eval()))
                self.fields[(alpha, i)] = entries

    def guard(self, u, floor):
        for alpha in self.leads:
            if abs(self.leads[alpha](u)) < floor:
                raise SingularEncounter(
                    f'trajectory of block {alpha} entered the non-invertible '
                    f'region: |E^1| < {floor!r}')


def _flow(table, entries, u, t, spec):
    '''Flow u along one sparse field for parameter t.'''
    if t == 0.0 or not entries:
        return u

    def rhs(p):
        out = [0.0] * len(p)
        for idx, fn in entries:
            out[idx] = fn(p)
        return out

    def step(p, dt):
        k1 = rhs(p)
        k2 = rhs([x + dt / 2 * k for x, k in zip(p, k1)])
        k3 = rhs([x + dt / 2 * k for x, k in zip(p, k2)])
        k4 = rhs([x + dt * k for x, k in zip(p, k3)])
        return [x + dt / 6 * (a + 2 * b + 2 * c + d)
                for x, a, b, c, d in zip(p, k1, k2, k3, k4)]

    h = spec.step
    whole = int(abs(t) / h)
    rem = abs(t) - whole * h
    sgn = 1.0 if t > 0 else -1.0
    for _ in range(whole):
        u = step(u, sgn * h)
        table.guard(u, spec.floor)
    if rem > 1e-15:
        u = step(u, sgn * rem)
        table.guard(u, spec.floor)
    return u


def _chart_map(table, w, spec, reverse=False):
    shape = table.shape
    order = [(alpha, i) for alpha, m in shape.blocks() for i in range(1, m + 1)]
    if reverse:
        order = order[::-1]
    u = list(spec.p0)
    for alpha, i in order:
        u = _flow(table, table.fields[(alpha, i)], u,
                  w[shape.flat(alpha, i) - 1], spec)
    return u


def _precondition(frame, tol):
    if frame.backend == 'jet':
        raise BackendMismatch('chart integration needs an exact frame')
    return frame


def integrate_chart(frame, spec):
    '''Map the w-grid through the composed frame flows.

    The frame's generator conditions are first verified on jets at the
    base point; a frame that fails them has no common chart and is
    rejected.  Each grid point is integrated twice when commutation
    checking is on, once in canonical block order and once reversed,
    and the disagreement must stay within ten times the tolerance.
    '''
    _precondition(frame, spec.tol)
    shape = frame.shape
    if len(spec.p0) != shape.n:
        raise ValueError(f'base point has {len(spec.p0)} coordinates, expected {shape.n}')
    jet_field = frame.field.to_jet(spec.p0, 2)
    jet_a = {k: v.to_jet(spec.p0, 2) for k, v in frame.a.items()}
    jet_frame = build_frame(jet_field, jet_a, tol=1e-7)
    vc = v2_conditions(jet_frame)
    if not vc.is_zero(max(spec.tol, 1e-10)):
        raise PreconditionFailed(
            f'frame fails the commuting-generator conditions at the base '
            f'point: {vc.worst()!r}')

    table = _FlowTable(frame)
    for alpha, m in shape.blocks():
        if abs(table.leads[alpha](list(spec.p0))) < spec.floor:
            raise SingularEncounter(
                f'base point too close to the non-invertible locus in block {alpha}')
        if m >= 2 and abs(table.a2[alpha](list(spec.p0))) < spec.floor:
            raise SingularEncounter(
                f'generator of block {alpha} below the floor at the base point')

    samples = []
    for w in spec.points:
        if len(w) != shape.n:
            raise ValueError(f'grid point has {len(w)} coordinates, expected {shape.n}')
        u = _chart_map(table, w, spec)
        sample = {'w': w, 'u': tuple(u), 'jac_err': None, 'push_err': None}
        if spec.check_commutation:
            u_rev = _chart_map(table, w, spec, reverse=True)
            gap = max(abs(a - b) for a, b in zip(u, u_rev))
            sample['commute_gap'] = gap
            if gap > 10 * spec.tol:
                raise NonCommutingFrame(
                    f'flow orderings disagree by {gap!r} at w = {w!r}')
        jac = _jacobian(table, w, spec)
        sample['jacobian'] = jac
        err = 0.0
        for alpha, m in shape.blocks():
            for i in range(1, m + 1):
                col = jac[:, shape.flat(alpha, i) - 1]
                expect = numpy.zeros(shape.n)
                for idx, fn in table.fields[(alpha, i)]:
                    expect[idx] = fn(u)
                err = max(err, float(numpy.max(numpy.abs(col - expect))))
        sample['jac_err'] = err
        samples.append(sample)
    return ChartResult(shape, spec.p0, spec.step, spec.tol, samples)


def _jacobian(table, w, spec):
    n = table.shape.n
    delta = spec.step
    jac = numpy.zeros((n, n))
    for k in range(n):
        hi = list(w)
        lo = list(w)
        hi[k] += delta
        lo[k] -= delta
        up = _chart_map(table, hi, spec)
        dn = _chart_map(table, lo, spec)
        jac[:, k] = [(a - b) / (2 * delta) for a, b in zip(up, dn)]
    return jac


def _star_columns(table, u, x, y):
    '''Twisted product of two tangent vectors at u, all floats.'''
    shape = table.shape
    e = [fn(u) for alpha, _ in shape.blocks() for fn in table.e_comps[alpha]]
    out = [0.0] * shape.n
    for alpha, m in shape.blocks():
        base = shape.flat(alpha, 1) - 1
        lead = e[base]
        inv = [1.0 / lead]
        for i in range(2, m + 1):
            acc = sum(e[base + j - 1] * inv[i - j] for j in range(2, i + 1))
            inv.append(-acc / lead)
        conv = [sum(x[base + a - 1] * y[base + k - a] for a in range(1, k + 1))
                for k in range(1, m + 1)]
        for k in range(1, m + 1):
            out[base + k - 1] = sum(inv[a - 1] * conv[k - a] for a in range(1, k + 1))
    return out


def pushforward_check(frame, result):
    '''Structure constants of the twisted product in the w-chart.

    At each sample the Jacobian conjugates the product of pushed
    coordinate fields back to w-components; the outcome must be the
    canonical shift pattern: e_{(i+j-1)(a)} inside a block while the
    product fits, zero on overflow and across blocks.  Updates each
    sample's push_err and returns the residual.
    '''
    table = _FlowTable(frame)
    shape = frame.shape
    entries = []
    for sample in result.samples:
        jac = sample.get('jacobian')
        if jac is None:
            raise PreconditionFailed('chart result carries no Jacobian data')
        u = list(sample['u'])
        worst = 0.0
        pairs = [(alpha, i) for alpha, m in shape.blocks() for i in range(1, m + 1)]
        for ai, (alpha, i) in enumerate(pairs):
            for beta, j in pairs[ai:]:
                x = jac[:, shape.flat(alpha, i) - 1]
                y = jac[:, shape.flat(beta, j) - 1]
                prod = _star_columns(table, u, list(x), list(y))
                coeffs = numpy.linalg.solve(jac, numpy.array(prod))
                expect = numpy.zeros(shape.n)
                if alpha == beta and i + j - 1 <= shape.sizes[alpha - 1]:
                    expect[shape.flat(alpha, i + j - 1) - 1] = 1.0
                dev = float(numpy.max(numpy.abs(coeffs - expect)))
                worst = max(worst, dev)
                entries.append(ResidualEntry(
                    (('i', i), ('j', j), ('blocks', (alpha, beta))),
                    dev, point=tuple(sample['w'])))
        sample['push_err'] = worst
    return Residual('dual-pushforward', 'numeric', entries)
