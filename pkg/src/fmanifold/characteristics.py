'''Numeric generator completion along characteristic curves.

The exact completion in frame.construct_a needs every integration
"constant" C_m(u1, u2) to be polynomial.  When it is not, the defining
first-order PDE

    E^1 d1 C + E^2 d2 C - q C + S = 0

is still perfectly usable numerically: all levels of one block share
the characteristic flow du/dt = (E^1, E^2), so we anchor C on the slice
u1 = u1_0 (C vanishes there, which fixes the free function), solve a
small linear system for the transverse Taylor coefficients on the
slice, and transport complete Taylor tables of every level along the
characteristic through a query point with a classical Runge-Kutta
scheme.  The portion of each generator component that involves the
block's tail coordinates is polynomial and kept exactly; only the
C-levels and their u1/u2 derivatives are numeric.

Generator components are held in a separated form: a map from
(tail monomial, symbol) to a polynomial coefficient in u1 and u2,
where symbol None marks a plain polynomial term and (t, d1, d2) marks
d1+d2 derivatives of the level-t constant.  Every operation the level
recursion needs (tail and leading partials, scaling homotopy) is linear
in the symbols, so the representation is closed.
'''

from fractions import Fraction
from functools import lru_cache
from math import ceil, comb

import numpy

from .errors import JetOrderExhausted, NotClosed, SingularEncounter
from .scalar import Jet, Poly, multi_indices

_REFINE_TOL = 1e-12
_LEAD_FLOOR = 1e-9


# ---- separated components ----

def _sep_add(a, b):
    out = dict(a)
    for key, c in b.items():
        cur = out.get(key)
        out[key] = c if cur is None else cur + c
    return {k: v for k, v in out.items() if not v.is_zero()}


def _sep_scale(sep, factor):
    return {k: v * factor for k, v in sep.items()}


def _sep_partial(sep, var, f1, f2):
    '''Partial derivative of a separated component, 1-based flat var.'''
    out = {}

    def acc(key, c):
        cur = out.get(key)
        out[key] = c if cur is None else cur + c

    if var in (f1, f2):
        for (mono, sym), c in sep.items():
            acc((mono, sym), c.partial(var))
            if sym is not None:
                t, d1, d2 = sym
                lifted = (t, d1 + 1, d2) if var == f1 else (t, d1, d2 + 1)
                acc((mono, lifted), c)
    else:
        iv = var - 1
        for (mono, sym), c in sep.items():
            k = mono[iv]
            if k:
                lowered = mono[:iv] + (k - 1,) + mono[iv + 1:]
                acc((lowered, sym), c * k)
    return {k: v for k, v in out.items() if not v.is_zero()}


def _sep_homotopy(form, variables):
    '''Scaling homotopy for a closed one-form of separated components.'''
    for a in variables:
        for b in variables:
            if b <= a:
                continue
            diff = _sep_add(_sep_partial(form[a], b, 0, 0),
                            _sep_scale(_sep_partial(form[b], a, 0, 0), Fraction(-1)))
            if diff:
                worst = max(diff.values(), key=lambda p: p.degree())
                raise NotClosed(a, b, worst)
    out = {}
    for var in variables:
        iv = var - 1
        for (mono, sym), c in form[var].items():
            scale = Fraction(1, sum(mono) + 1)
            lifted = mono[:iv] + (mono[iv] + 1,) + mono[iv + 1:]
            key = (lifted, sym)
            cur = out.get(key)
            term = c * scale
            out[key] = term if cur is None else cur + term
    return {k: v for k, v in out.items() if not v.is_zero()}


def _sep_restrict(sep):
    '''Drop every term carrying a tail monomial; returns {symbol: poly}.'''
    out = {}
    for (mono, sym), c in sep.items():
        if not any(mono):
            out[sym] = out.get(sym, c.zero_like()) + c
    return {k: v for k, v in out.items() if not v.is_zero()}


# ---- float Taylor tables, two variables ----

@lru_cache(maxsize=None)
def _conv_pairs(order):
    idxs = multi_indices(2, order)
    out = []
    for ea in idxs:
        room = order - ea[0] - ea[1]
        for eb in multi_indices(2, room):
            out.append((ea, eb, (ea[0] + eb[0], ea[1] + eb[1])))
    return tuple(out)


def _tab_zero(order):
    return {e: 0.0 for e in multi_indices(2, order)}


def _tab_mul(a, b, order):
    out = _tab_zero(order)
    for ea, eb, e in _conv_pairs(order):
        ca = a[ea]
        if ca:
            cb = b[eb]
            if cb:
                out[e] += ca * cb
    return out


def _tab_combine(tabs, weights, order):
    out = {}
    for e in multi_indices(2, order):
        out[e] = sum(t[e] * w for t, w in zip(tabs, weights))
    return out


def _tab_partial(tab, order, i):
    '''True derivative table, one order lower.'''
    j = i - 1
    out = {}
    for e in multi_indices(2, order - 1):
        up = (e[0] + 1, e[1]) if j == 0 else (e[0], e[1] + 1)
        out[e] = tab[up] * (e[j] + 1)
    return out


def _tab_partial_padded(tab, order, i):
    '''Derivative padded back to the same order with zero top entries.

    Only valid as a factor against tables whose constant term vanishes,
    which is exactly how the advection term of the transport uses it.
    '''
    j = i - 1
    out = {}
    for e in multi_indices(2, order):
        up = (e[0] + 1, e[1]) if j == 0 else (e[0], e[1] + 1)
        out[e] = tab.get(up, 0.0) * (e[j] + 1)
    return out


def _tab_truncate(tab, order):
    return {e: tab[e] for e in multi_indices(2, order)}


def _poly_table(poly2, point, order):
    '''Taylor table of a two-variable polynomial at a float point.'''
    out = _tab_zero(order)
    p1, p2 = point
    for (a, b), c in poly2.coeffs.items():
        fc = float(c)
        for i in range(min(a, order) + 1):
            left = fc * comb(a, i) * p1 ** (a - i)
            for j in range(min(b, order - i) + 1):
                out[(i, j)] += left * comb(b, j) * p2 ** (b - j)
    return out


def _sym_table(sym, tables, orders, order):
    if sym is None:
        out = _tab_zero(order)
        out[(0, 0)] = 1.0
        return out
    t, d1, d2 = sym
    tab = tables[t]
    k = orders[t]
    for _ in range(d1):
        tab = _tab_partial(tab, k, 1)
        k -= 1
    for _ in range(d2):
        tab = _tab_partial(tab, k, 2)
        k -= 1
    return _tab_truncate(tab, order)


# ---- per-block symbolic preparation ----

class _BlockPlan:

    def __init__(self, shape, alpha, field, a2, order):
        self.alpha = alpha
        self.m = shape.sizes[alpha - 1]
        self.f1 = shape.flat(alpha, 1)
        self.f2 = shape.flat(alpha, 2)
        self.n = shape.n
        self.order = order
        self.a2 = a2
        squash = {self.f1: 1, self.f2: 2}
        tail = [shape.flat(alpha, l) for l in range(3, self.m + 1)]
        self.levels = list(range(3, self.m + 1))
        self.korder = {t: order + (self.m - t) for t in self.levels}

        e1 = field.comp(alpha, 1)
        e2 = field.comp(alpha, 2)
        self.e1_2 = e1.remap(2, squash)
        self.e2_2 = e2.remap(2, squash)
        self.e1_fn = self.e1_2.compile_eval()
        self.e2_fn = self.e2_2.compile_eval()

        zero_mono = (0,) * self.n
        a_sep = {2: {(zero_mono, None): a2}}
        self.q2 = {}
        self.sbar2 = {}
        for mm in self.levels:
            form = {}
            for l in range(3, mm + 1):
                g = _sep_scale(_sep_partial(a_sep[mm - l + 2], self.f2, self.f1, self.f2),
                               Fraction(l - 1))
                if mm - l + 1 >= 2:
                    g = _sep_add(g, _sep_scale(
                        _sep_partial(a_sep[mm - l + 1], self.f1, self.f1, self.f2),
                        Fraction(2 - l)))
                form[shape.flat(alpha, l)] = g
            part = _sep_homotopy(form, sorted(form))

            em = field.comp(alpha, mm)
            src = {}
            for t in range(1, mm + 1):
                et = field.comp(alpha, t).substitute_zero(set(tail))
                dpart = _sep_restrict(_sep_partial(part, shape.flat(alpha, t),
                                                   self.f1, self.f2))
                src = _lin_add(src, _lin_scale(dpart, et))
            for t in range(2, mm):
                det = em.partial(shape.flat(alpha, t)).substitute_zero(set(tail))
                if det.is_zero():
                    continue
                a_bar = _sep_restrict(a_sep[t])
                src = _lin_add(src, _lin_scale(a_bar, -det))
            self.sbar2[mm] = {sym: c.remap(2, squash) for sym, c in src.items()}
            self.q2[mm] = (e2.partial(self.f2) * (mm - 1)
                           - e1.partial(self.f1) * (mm - 2)).remap(2, squash)
            a_sep[mm] = _sep_add(part, {(zero_mono, (mm, 0, 0)): Poly.const(self.n, 1)})
        self.a_sep = a_sep


def _lin_add(a, b):
    out = dict(a)
    for sym, c in b.items():
        cur = out.get(sym)
        out[sym] = c if cur is None else cur + c
    return {k: v for k, v in out.items() if not v.is_zero()}


def _lin_scale(lin, poly):
    return {sym: c * poly for sym, c in lin.items()}


# ---- transport ----

def _rk4_step(deriv, state, dt):
    k1 = deriv(state)
    k2 = deriv(_state_add(state, k1, dt / 2))
    k3 = deriv(_state_add(state, k2, dt / 2))
    k4 = deriv(_state_add(state, k3, dt))
    u1, u2, tabs = state
    du1 = (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) * (dt / 6)
    du2 = (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) * (dt / 6)
    out = {}
    for t, tab in tabs.items():
        out[t] = _tab_combine(
            [tab, k1[2][t], k2[2][t], k3[2][t], k4[2][t]],
            [1.0, dt / 6, dt / 3, dt / 3, dt / 6],
            len_order(tab))
    return (u1 + du1, u2 + du2, out)


def len_order(tab):
    # complete two-variable table of order K has (K+1)(K+2)/2 entries
    size = len(tab)
    k = int((8 * size + 1) ** 0.5 - 3) // 2
    while (k + 1) * (k + 2) // 2 < size:
        k += 1
    return k


def _state_add(state, dstate, factor):
    u1, u2, tabs = state
    du1, du2, dtabs = dstate
    out = {t: _tab_combine([tab, dtabs[t]], [1.0, factor], len_order(tab))
           for t, tab in tabs.items()}
    return (u1 + du1 * factor, u2 + du2 * factor, out)


class CharacteristicGenerators:
    '''Numeric completion of frame generators, one flow per block.

    Produces truncated Taylor data of the generator components at query
    points.  Construction is exact and cheap; each query shoots the
    block's characteristic back to the anchor slice u1 = u1_0, solves
    for the slice Taylor coefficients of every integration constant and
    transports them forward to the query point.  Results are cached per
    point.
    '''

    def __init__(self, solved, a2s, u1_0=1.0, step=1e-3, order=3):
        if order < 1:
            raise ValueError('jet order must be at least 1')
        self.solved = solved
        self.shape = solved.shape
        self.u1_0 = float(u1_0)
        self.step = float(step)
        self.order = order
        self.plans = {}
        for alpha, m in self.shape.blocks():
            if m >= 2:
                self.plans[alpha] = _BlockPlan(self.shape, alpha, solved.field,
                                               a2s[alpha], order)
        self._cache = {}

    # -- flow plumbing --

    def _velocity(self, plan, u):
        v1 = plan.e1_fn(u)
        if abs(v1) < _LEAD_FLOOR:
            raise SingularEncounter(
                f'characteristic of block {plan.alpha} stalls near u1 = {u[0]!r}')
        return v1, plan.e2_fn(u)

    def _point_step(self, plan, u, dt):
        def vel(state):
            return self._velocity(plan, state)
        k1 = vel(u)
        k2 = vel((u[0] + k1[0] * dt / 2, u[1] + k1[1] * dt / 2))
        k3 = vel((u[0] + k2[0] * dt / 2, u[1] + k2[1] * dt / 2))
        k4 = vel((u[0] + k3[0] * dt, u[1] + k3[1] * dt))
        return (u[0] + (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) * dt / 6,
                u[1] + (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) * dt / 6)

    def _shoot_back(self, plan, point):
        '''Follow the characteristic from point to the anchor slice.

        Returns (landing point, forward flow time), the time the
        transport needs to replay from the slice back to the point; it
        is the negative of the time accumulated while shooting.
        '''
        u = (float(point[0]), float(point[1]))
        total = 0.0
        gap = u[0] - self.u1_0
        if gap != 0.0:
            limit = ceil(100.0 / self.step)
            for _ in range(limit):
                v1, _v2 = self._velocity(plan, u)
                dt = -self.step if gap * v1 > 0 else self.step
                nxt = self._point_step(plan, u, dt)
                if (nxt[0] - self.u1_0) * gap <= 0:
                    break
                u = nxt
                total += dt
            else:
                raise SingularEncounter(
                    f'characteristic of block {plan.alpha} never reaches the '
                    f'slice u1 = {self.u1_0!r}')
        for _ in range(60):
            err = u[0] - self.u1_0
            if abs(err) <= _REFINE_TOL * max(1.0, abs(self.u1_0)):
                break
            v1, _v2 = self._velocity(plan, u)
            dt = -err / v1
            dt = max(-self.step, min(self.step, dt))
            u = self._point_step(plan, u, dt)
            total += dt
        return u, -total

    def _slice_tables(self, plan, anchor):
        tables = {}
        for t in plan.levels:
            k = plan.korder[t]
            eqs = multi_indices(2, k - 1)
            unknowns = [e for e in multi_indices(2, k) if e[0] >= 1]
            e1t = _poly_table(plan.e1_2, anchor, k - 1)
            e2t = _poly_table(plan.e2_2, anchor, k - 1)
            qt = _poly_table(plan.q2[t], anchor, k - 1)
            cols = []
            for idx in unknowns:
                basis = _tab_zero(k)
                basis[idx] = 1.0
                img = _tab_mul(e1t, _tab_partial(basis, k, 1), k - 1)
                img = _tab_combine([img, _tab_mul(e2t, _tab_partial(basis, k, 2), k - 1)],
                                   [1.0, 1.0], k - 1)
                img = _tab_combine([img, _tab_mul(qt, _tab_truncate(basis, k - 1), k - 1)],
                                   [1.0, -1.0], k - 1)
                cols.append([img[g] for g in eqs])
            stab = _tab_zero(k - 1)
            for sym, poly in plan.sbar2[t].items():
                ptab = _poly_table(poly, anchor, k - 1)
                stab = _tab_combine(
                    [stab, _tab_mul(ptab, _sym_table(sym, tables, plan.korder, k - 1), k - 1)],
                    [1.0, 1.0], k - 1)
            matrix = numpy.array(cols, dtype=float).T
            rhs = numpy.array([-stab[g] for g in eqs], dtype=float)
            try:
                sol = numpy.linalg.solve(matrix, rhs)
            except numpy.linalg.LinAlgError as exc:
                raise SingularEncounter(
                    f'slice system of block {plan.alpha} level {t} is singular') from exc
            tab = _tab_zero(k)
            for idx, val in zip(unknowns, sol):
                tab[idx] = float(val)
            tables[t] = tab
        return tables

    def _transport_deriv(self, plan, state):
        u1, u2, tabs = state
        u = (u1, u2)
        v1, v2 = self._velocity(plan, u)
        dtabs = {}
        for t in plan.levels:
            k = plan.korder[t]
            dc = _tab_mul(_poly_table(plan.q2[t], u, k), tabs[t], k)
            for sym, poly in plan.sbar2[t].items():
                ptab = _poly_table(poly, u, k)
                dc = _tab_combine(
                    [dc, _tab_mul(ptab, _sym_table(sym, tabs, plan.korder, k), k)],
                    [1.0, -1.0], k)
            for i, (poly2, val) in ((1, (plan.e1_2, v1)), (2, (plan.e2_2, v2))):
                drift = _poly_table(poly2, u, k)
                drift[(0, 0)] -= val
                dc = _tab_combine(
                    [dc, _tab_mul(drift, _tab_partial_padded(tabs[t], k, i), k)],
                    [1.0, -1.0], k)
            dtabs[t] = dc
        return (v1, v2, dtabs)

    def _tables_at(self, alpha, point2):
        key = (alpha, point2)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        plan = self.plans[alpha]
        anchor, total = self._shoot_back(plan, point2)
        tabs = self._slice_tables(plan, anchor)
        state = (anchor[0], anchor[1], tabs)
        if total != 0.0:
            steps = max(1, ceil(abs(total) / self.step))
            dt = total / steps
            for _ in range(steps):
                state = _rk4_step(lambda s: self._transport_deriv(plan, s), state, dt)
        self._cache[key] = state
        return state

    # -- queries --

    def constant_table(self, alpha, level, point2):
        '''Taylor table of C_level anchored (approximately) at point2.'''
        state = self._tables_at(alpha, tuple(float(x) for x in point2))
        return dict(state[2][level])

    def pde_residual(self, alpha, level, point2):
        '''Pointwise residual of the defining PDE at a query point.'''
        plan = self.plans[alpha]
        point2 = tuple(float(x) for x in point2)
        u1, u2, tabs = self._tables_at(alpha, point2)
        u = (u1, u2)
        tab = tabs[level]
        value = tab[(0, 0)]
        d1 = tab[(1, 0)]
        d2 = tab[(0, 1)]
        res = (plan.e1_fn(u) * d1 + plan.e2_fn(u) * d2
               - plan.q2[level].evaluate(u) * value)
        for sym, poly in plan.sbar2[level].items():
            if sym is None:
                res += poly.evaluate(u)
            else:
                t, a, b = sym
                scale = 1.0
                for j in range(2, a + 1):
                    scale *= j
                for j in range(2, b + 1):
                    scale *= j
                res += poly.evaluate(u) * tabs[t][(a, b)] * scale
        return res

    def a_jet(self, alpha, i, point, order=None):
        '''Jet of the generator component a_{i} of one block at point.'''
        order = self.order if order is None else order
        if order > self.order:
            raise JetOrderExhausted(
                f'transported tables carry order {self.order}, not {order}')
        plan = self.plans[alpha]
        n = self.shape.n
        point = tuple(point)
        if i == 2:
            return plan.a2.to_jet(point, order)
        point2 = (float(point[plan.f1 - 1]), float(point[plan.f2 - 1]))
        _u1, _u2, tabs = self._tables_at(alpha, point2)
        out = Jet.constant(n, point, order, 0)
        for (mono, sym), coef in plan.a_sep[i].items():
            term = coef.to_jet(point, order)
            if any(mono):
                term = term * Poly(n, {mono: Fraction(1)}).to_jet(point, order)
            if sym is not None:
                tab2 = _sym_table(sym, tabs, plan.korder, order)
                coeffs = {}
                for (a, b), val in tab2.items():
                    idx = [0] * n
                    idx[plan.f1 - 1] = a
                    idx[plan.f2 - 1] = b
                    coeffs[tuple(idx)] = val
                term = term * Jet(n, point, order, coeffs)
            out = out + term
        return out

    def generator_jets(self, point, order=None):
        '''All generator components as jets at one point.'''
        out = {}
        for alpha, m in self.shape.blocks():
            if m < 2:
                continue
            for i in range(2, m + 1):
                out[(alpha, i)] = self.a_jet(alpha, i, point, order)
        return out
