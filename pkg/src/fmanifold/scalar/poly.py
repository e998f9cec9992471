'''Sparse multivariate polynomials with exact rational coefficients.

A polynomial in n variables is a dict mapping exponent tuples to nonzero
Fraction coefficients.  Instances are treated as immutable; every
operation builds a fresh dict and drops zero coefficients on the way.

Example
-------
>>> p = Poly.var(1, 2) * Poly.var(2, 2) + Poly.const(2, Fraction(1, 2))
>>> p.partial(1).to_expr()
'u2'
'''

from fractions import Fraction
from math import gcd

from ..errors import DivisionByZeroFunction, UnsupportedDivision
from .base import NUMERIC, ScalarFn, check_var, same_backend


def _grlex(exp):
    # graded ordering key; ties broken lexicographically
    return (sum(exp), exp)


class Poly(ScalarFn):

    backend = 'poly'
    __slots__ = ('n', 'coeffs', '_hash')

    def __init__(self, n, coeffs):
        self.n = n
        # do not store zero coefficients
        self.coeffs = {e: c for e, c in coeffs.items() if c != 0}
        self._hash = None

    # ---- constructors ----

    @classmethod
    def zero(cls, n):
        return cls(n, {})

    @classmethod
    def const(cls, n, c):
        c = Fraction(c)
        return cls(n, {(0,) * n: c} if c else {})

    @classmethod
    def var(cls, i, n):
        check_var(i, n)
        e = [0] * n
        e[i - 1] = 1
        return cls(n, {tuple(e): Fraction(1)})

    def zero_like(self):
        return Poly.zero(self.n)

    def one_like(self):
        return Poly.const(self.n, 1)

    def const_like(self, c):
        return Poly.const(self.n, c)

    # ---- ring operations ----

    def __add__(self, other):
        if isinstance(other, NUMERIC):
            other = Poly.const(self.n, other)
        same_backend(self, other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly(self.n, out)

    def __neg__(self):
        return Poly(self.n, {e: -c for e, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, NUMERIC):
            if other == 0:
                return Poly.zero(self.n)
            other = Fraction(other)
            return Poly(self.n, {e: c * other for e, c in self.coeffs.items()})
        same_backend(self, other)
        out = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(e, 0) + ca * cb
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return Poly(self.n, out)

    def __truediv__(self, other):
        if isinstance(other, NUMERIC):
            if other == 0:
                raise DivisionByZeroFunction('division by zero constant')
            return self * (Fraction(1) / Fraction(other))
        same_backend(self, other)
        return self.divide_exact(other)

    # ---- structure ----

    def is_zero(self):
        return not self.coeffs

    def is_constant(self):
        return all(sum(e) == 0 for e in self.coeffs)

    def constant_value(self):
        return self.coeffs.get((0,) * self.n, Fraction(0))

    def degree(self):
        return max((sum(e) for e in self.coeffs), default=0)

    def vars_used(self):
        '''1-based indices of variables with a nonzero exponent somewhere.'''
        used = set()
        for e in self.coeffs:
            for i, k in enumerate(e):
                if k:
                    used.add(i + 1)
        return used

    def leading(self):
        e = max(self.coeffs, key=_grlex)
        return e, self.coeffs[e]

    def __eq__(self, other):
        if isinstance(other, NUMERIC):
            other = Poly.const(self.n, other)
        if not isinstance(other, Poly) or other.n != self.n:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.coeffs.items())))
        return self._hash

    def sort_key(self):
        # deterministic total order used when canonicalizing factor lists
        return tuple(sorted(self.coeffs.items()))

    # ---- calculus ----

    def partial(self, i):
        check_var(i, self.n)
        j = i - 1
        out = {}
        for e, c in self.coeffs.items():
            if e[j]:
                f = list(e)
                f[j] -= 1
                out[tuple(f)] = c * e[j]
        return Poly(self.n, out)

    def evaluate(self, point):
        if len(point) != self.n:
            raise ValueError(f'point has {len(point)} coordinates, expected {self.n}')
        total = 0
        for e, c in self.coeffs.items():
            term = c
            for p, k in zip(point, e):
                if k:
                    term = term * p ** k
            total = total + term
        return total

    def substitute_zero(self, vars):
        '''Set the given 1-based variables to zero.'''
        out = {e: c for e, c in self.coeffs.items() if not any(e[i - 1] for i in vars)}
        return Poly(self.n, out)

    def remap(self, n, mapping):
        '''Re-embed into n variables, sending old index i to mapping[i].'''
        out = {}
        for e, c in self.coeffs.items():
            f = [0] * n
            for i, k in enumerate(e):
                if k:
                    f[mapping[i + 1] - 1] = k
            out[tuple(f)] = c
        return Poly(n, out)

    # ---- division ----

    def divide_exact(self, other):
        '''Exact quotient self/other, or raise.

        Greedy reduction of the graded-lex leading term.  For an exact
        quotient the leading term of the remainder is always divisible
        by the leading term of the divisor, so a single failed step
        already proves the quotient is not polynomial.
        '''
        if other.is_zero():
            raise DivisionByZeroFunction('division by the zero polynomial')
        if other.is_constant():
            return self * (Fraction(1) / other.constant_value())
        rem = dict(self.coeffs)
        le, lc = other.leading()
        quot = {}
        while rem:
            re = max(rem, key=_grlex)
            qe = tuple(a - b for a, b in zip(re, le))
            if any(k < 0 for k in qe):
                raise UnsupportedDivision('quotient is not a polynomial')
            qc = rem[re] / lc
            quot[qe] = qc
            for e, c in other.coeffs.items():
                t = tuple(a + b for a, b in zip(qe, e))
                s = rem.get(t, 0) - qc * c
                if s:
                    rem[t] = s
                else:
                    rem.pop(t, None)
        return Poly(self.n, quot)

    def divides(self, other):
        try:
            other.divide_exact(self)
            return True
        except (UnsupportedDivision, DivisionByZeroFunction):
            return False

    def content_and_primitive(self):
        '''Split into (content, primitive part).

        The primitive part has integer coefficients with gcd 1 and a
        positive leading coefficient.
        '''
        if self.is_zero():
            return Fraction(0), self
        num = 0
        den = 1
        for c in self.coeffs.values():
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        content = Fraction(num, den)
        if self.leading()[1] < 0:
            content = -content
        return content, self * (1 / content)

    # ---- conversions ----

    def to_rational(self):
        from .rational import RationalFn
        return RationalFn.from_poly(self)

    def to_jet(self, point, order):
        from .jet import Jet
        vs = [Jet.coordinate(i, self.n, point, order) for i in range(1, self.n + 1)]
        out = Jet.constant(self.n, point, order, 0)
        for e, c in self.coeffs.items():
            term = Jet.constant(self.n, point, order, c)
            for v, k in zip(vs, e):
                for _ in range(k):
                    term = term * v
            out = out + term
        return out

    def to_expr(self):
        if self.is_zero():
            return '0'
        parts = []
        for e in sorted(self.coeffs, key=_grlex, reverse=True):
            c = self.coeffs[e]
            factors = [f'u{i + 1}' + (f'^{k}' if k > 1 else '')
                       for i, k in enumerate(e) if k]
            if not factors:
                body = str(abs(c))
            elif abs(c) == 1:
                body = '*'.join(factors)
            else:
                body = '*'.join([str(abs(c))] + factors)
            parts.append(('- ' if c < 0 else '+ ') + body)
        text = ' '.join(parts)
        return text[2:] if text.startswith('+ ') else text[0] + text[2:]

    def compile_eval(self):
        '''Build a fast float evaluator point -> float.'''
        if self.is_zero():
            return lambda p: 0.0
        terms = []
        for e, c in self.coeffs.items():
            fs = [repr(float(c))]
            for i, k in enumerate(e):
                if k == 1:
                    fs.append(f'p[{i}]')
                elif k:
                    fs.append(f'p[{i}]**{k}')
            terms.append('*'.join(fs))
        return eval('lambda p: ' + ' + '.join(terms))  # noqa: S307 - source built above

    def __repr__(self):
        return f'Poly({self.to_expr()!r})'
