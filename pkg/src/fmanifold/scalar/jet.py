'''Truncated Taylor tables at a fixed base point.

A jet of order K in n variables stores every Taylor coefficient up to
total degree K (coefficient, not raw derivative: entry g equals the
g-th partial divided by g factorial).  Multiplication is truncated
convolution, division runs the usual graded power-series reciprocal.
Coefficients are Fractions when the base point is rational and floats
otherwise; mixed arithmetic follows Python's own promotion.
'''

from fractions import Fraction
from functools import lru_cache

from ..errors import BackendMismatch, DivisionByZeroFunction, JetOrderExhausted
from .base import ScalarFn, check_var

_NUM = (int, float, Fraction)


@lru_cache(maxsize=None)
def multi_indices(n, order):
    '''All exponent tuples of length n with total degree <= order.'''
    if n == 0:
        return ((),)
    out = []
    for head in range(order + 1):
        for tail in multi_indices(n - 1, order - head):
            out.append((head,) + tail)
    return tuple(sorted(out, key=lambda e: (sum(e), e)))


class Jet(ScalarFn):

    backend = 'jet'
    __slots__ = ('n', 'base', 'order', 'coeffs')

    def __init__(self, n, base, order, coeffs):
        self.n = n
        self.base = tuple(base)
        self.order = order
        # complete table: every index up to the order is present
        self.coeffs = {e: coeffs.get(e, 0) for e in multi_indices(n, order)}

    @classmethod
    def constant(cls, n, base, order, c):
        c = Fraction(c) if isinstance(c, (int, Fraction)) else c
        return cls(n, base, order, {(0,) * n: c})

    @classmethod
    def coordinate(cls, i, n, base, order):
        check_var(i, n)
        base = tuple(base)
        table = {(0,) * n: base[i - 1]}
        if order >= 1:
            e = [0] * n
            e[i - 1] = 1
            table[tuple(e)] = Fraction(1) if isinstance(base[i - 1], (int, Fraction)) else 1.0
        return cls(n, base, order, table)

    def zero_like(self):
        return Jet.constant(self.n, self.base, self.order, 0)

    def one_like(self):
        return Jet.constant(self.n, self.base, self.order, 1)

    def const_like(self, c):
        return Jet.constant(self.n, self.base, self.order, c)

    # ---- arithmetic ----

    def _align(self, other):
        if isinstance(other, _NUM):
            return self.const_like(other), self.order
        if not isinstance(other, Jet) or other.n != self.n:
            raise BackendMismatch('jet arithmetic requires jets in the same variables')
        if tuple(other.base) != self.base:
            raise BackendMismatch('jets anchored at different base points')
        return other, min(self.order, other.order)

    def __add__(self, other):
        other, order = self._align(other)
        out = {}
        for e in multi_indices(self.n, order):
            out[e] = self.coeffs[e] + other.coeffs[e]
        return Jet(self.n, self.base, order, out)

    def __neg__(self):
        return Jet(self.n, self.base, self.order, {e: -c for e, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, _NUM):
            return Jet(self.n, self.base, self.order,
                       {e: c * other for e, c in self.coeffs.items()})
        other, order = self._align(other)
        out = {e: 0 for e in multi_indices(self.n, order)}
        for ea, ca in self.coeffs.items():
            if ca == 0 or sum(ea) > order:
                continue
            room = order - sum(ea)
            for eb in multi_indices(self.n, room):
                cb = other.coeffs[eb]
                if cb == 0:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] += ca * cb
        return Jet(self.n, self.base, order, out)

    def reciprocal(self):
        b0 = self.value()
        if b0 == 0:
            raise DivisionByZeroFunction('jet has vanishing value; no reciprocal')
        inv0 = Fraction(1, 1) / b0 if isinstance(b0, (int, Fraction)) else 1.0 / b0
        out = {(0,) * self.n: inv0}
        for e in multi_indices(self.n, self.order):
            if sum(e) == 0:
                continue
            acc = 0
            # sum over strictly smaller indices delta < e of b_{e-delta} r_delta
            for d in multi_indices(self.n, sum(e)):
                if d == e or any(x > y for x, y in zip(d, e)):
                    continue
                diff = tuple(y - x for x, y in zip(d, e))
                acc += self.coeffs[diff] * out[d]
            out[e] = -acc * inv0
        return Jet(self.n, self.base, self.order, out)

    def __truediv__(self, other):
        if isinstance(other, _NUM):
            if other == 0:
                raise DivisionByZeroFunction('division by zero constant')
            inv = Fraction(1, 1) / other if isinstance(other, (int, Fraction)) else 1.0 / other
            return self * inv
        other, _ = self._align(other)
        return self * other.reciprocal()

    # ---- structure ----

    def value(self):
        return self.coeffs[(0,) * self.n]

    def partial_coefficient(self, idx):
        '''Raw partial derivative for the multi-index (not Taylor-scaled).'''
        scale = 1
        for k in idx:
            for j in range(2, k + 1):
                scale *= j
        return self.coeffs[tuple(idx)] * scale

    def is_zero(self, tol=0):
        return all(abs(c) <= tol for c in self.coeffs.values())

    def max_abs(self):
        return max(abs(c) for c in self.coeffs.values())

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return (self.n == other.n and self.base == other.base
                and self.order == other.order and self.coeffs == other.coeffs)

    def __hash__(self):
        raise TypeError('Jet is unhashable; compare with ==')

    def close_to(self, other, tol):
        other, order = self._align(other)
        return all(abs(self.coeffs[e] - other.coeffs[e]) <= tol
                   for e in multi_indices(self.n, order))

    # ---- calculus ----

    def partial(self, i):
        check_var(i, self.n)
        if self.order == 0:
            raise JetOrderExhausted('cannot differentiate an order-0 jet')
        j = i - 1
        out = {}
        for e in multi_indices(self.n, self.order - 1):
            up = list(e)
            up[j] += 1
            out[e] = self.coeffs[tuple(up)] * (e[j] + 1)
        return Jet(self.n, self.base, self.order - 1, out)

    def evaluate(self, point):
        if tuple(point) != self.base:
            raise ValueError('jets only evaluate at their base point')
        return self.value()

    def to_expr(self):
        terms = ', '.join(f'{e}: {c}' for e, c in sorted(self.coeffs.items(),
                                                         key=lambda ec: (sum(ec[0]), ec[0])))
        return f'jet[{self.base}; K={self.order}]{{{terms}}}'

    def __repr__(self):
        return f'Jet(base={self.base}, order={self.order}, value={self.value()})'
