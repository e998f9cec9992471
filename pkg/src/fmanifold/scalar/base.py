'''Common protocol for the three scalar function backends.'''

from fractions import Fraction

from ..errors import BackendMismatch

#: scalar types that coerce into any backend
NUMERIC = (int, Fraction)


class ScalarFn:
    '''A function of n coordinates u1..un under one of three backends.

    poly      exact sparse polynomials over rationals
    rational  quotients of polynomials, denominators kept factored
    jet       truncated derivative tables at a base point

    Subclasses implement ring arithmetic, partial derivatives and
    evaluation.  Arithmetic never mixes backends; lift explicitly with
    the provided conversion helpers instead.
    '''

    backend = None
    n = 0

    # subclasses provide: __add__, __neg__, __mul__, __truediv__,
    # partial, is_zero, evaluate, to_expr, zero_like, one_like, const_like

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __radd__(self, other):
        return self + other

    def __rmul__(self, other):
        return self * other

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise TypeError('exponent must be a non-negative integer')
        out = self.one_like()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def partial(self, i):
        raise NotImplementedError

    def is_zero(self):
        raise NotImplementedError


def same_backend(a, b):
    '''Raise BackendMismatch unless a and b can be combined.'''
    if a.backend != b.backend or a.n != b.n:
        raise BackendMismatch(f'cannot combine {a.backend}({a.n}) with {b.backend}({b.n})')


def check_var(i, n):
    if not 1 <= i <= n:
        from ..errors import IndexOutOfRange
        raise IndexOutOfRange(f'variable index {i} outside 1..{n}')
