'''Quotients of polynomials with the denominator kept in factored form.

In this package denominators are almost always products of powers of a
few small polynomials (leading field components, frame generators), so a
factor multiset {poly: exponent} keeps arithmetic from snowballing: each
construction tries to cancel whole factors out of the numerator by exact
division.  No polynomial gcd is ever needed; equality falls back to
cross-multiplication, which is exact regardless of how quotients are
factored.
'''

from fractions import Fraction

from ..errors import DivisionByZeroFunction, UnsupportedDivision
from .base import NUMERIC, ScalarFn, check_var, same_backend
from .poly import Poly


class RationalFn(ScalarFn):

    backend = 'rational'
    __slots__ = ('n', 'num', 'den')

    def __init__(self, num, den):
        # den: canonical tuple of (primitive Poly, positive exponent)
        self.n = num.n
        self.num = num
        self.den = den

    @classmethod
    def _make(cls, num, factors):
        '''Normalize: fold constants, make factors primitive, cancel.'''
        if num.is_zero():
            return cls(num, ())
        scale = Fraction(1)
        clean = {}
        for f, e in factors.items():
            if e == 0:
                continue
            if e < 0:
                raise ValueError('factor exponents must be non-negative')
            if f.is_zero():
                raise DivisionByZeroFunction('zero factor in denominator')
            if f.is_constant():
                scale *= f.constant_value() ** e
                continue
            content, prim = f.content_and_primitive()
            scale *= content ** e
            clean[prim] = clean.get(prim, 0) + e
        num = num * (1 / scale)
        # cancel whole factors into the numerator where possible
        reduced = {}
        for f, e in clean.items():
            while e > 0:
                try:
                    num = num.divide_exact(f)
                    e -= 1
                except UnsupportedDivision:
                    break
            if e:
                reduced[f] = e
        den = tuple(sorted(reduced.items(), key=lambda fe: fe[0].sort_key()))
        return cls(num, den)

    @classmethod
    def from_poly(cls, p):
        return cls._make(p, {})

    @classmethod
    def zero(cls, n):
        return cls.from_poly(Poly.zero(n))

    @classmethod
    def const(cls, n, c):
        return cls.from_poly(Poly.const(n, c))

    @classmethod
    def var(cls, i, n):
        return cls.from_poly(Poly.var(i, n))

    def zero_like(self):
        return RationalFn.zero(self.n)

    def one_like(self):
        return RationalFn.const(self.n, 1)

    def const_like(self, c):
        return RationalFn.const(self.n, c)

    # ---- arithmetic ----

    def _coerce(self, other):
        if isinstance(other, NUMERIC):
            return RationalFn.const(self.n, other)
        if isinstance(other, Poly):
            # polynomials embed; this is a lift, not a backend mix
            if other.n != self.n:
                same_backend(self, other)
            return other.to_rational()
        same_backend(self, other)
        return other

    def __add__(self, other):
        other = self._coerce(other)
        da, db = dict(self.den), dict(other.den)
        union = {f: max(da.get(f, 0), db.get(f, 0)) for f in {*da, *db}}
        pa, pb = self.num, other.num
        for f, e in union.items():
            for _ in range(e - da.get(f, 0)):
                pa = pa * f
            for _ in range(e - db.get(f, 0)):
                pb = pb * f
        return RationalFn._make(pa + pb, union)

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __mul__(self, other):
        if isinstance(other, NUMERIC):
            if other == 0:
                return self.zero_like()
            return RationalFn(self.num * other, self.den)
        other = self._coerce(other)
        merged = dict(self.den)
        for f, e in other.den:
            merged[f] = merged.get(f, 0) + e
        return RationalFn._make(self.num * other.num, merged)

    def __truediv__(self, other):
        if isinstance(other, NUMERIC):
            if other == 0:
                raise DivisionByZeroFunction('division by zero constant')
            return RationalFn(self.num / Fraction(other), self.den)
        other = self._coerce(other)
        if other.num.is_zero():
            raise DivisionByZeroFunction('division by the zero function')
        num = self.num
        for f, e in other.den:
            for _ in range(e):
                num = num * f
        merged = dict(self.den)
        merged[other.num] = merged.get(other.num, 0) + 1
        return RationalFn._make(num, merged)

    # ---- structure ----

    def is_zero(self):
        return self.num.is_zero()

    def __eq__(self, other):
        if isinstance(other, (Poly, *NUMERIC)):
            other = self._coerce(other)
        if not isinstance(other, RationalFn) or other.n != self.n:
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError('RationalFn is unhashable; compare with ==')

    # ---- calculus ----

    def partial(self, i):
        check_var(i, self.n)
        if not self.den:
            return RationalFn._make(self.num.partial(i), {})
        # d(a / prod f^e) over the common denominator prod f^(e+1):
        #   da * prod f  -  a * sum_f e_f df * prod_{g != f} g
        prod_all = Poly.const(self.n, 1)
        for f, _ in self.den:
            prod_all = prod_all * f
        num = self.num.partial(i) * prod_all
        for k, (f, e) in enumerate(self.den):
            df = f.partial(i)
            if df.is_zero():
                continue
            rest = Poly.const(self.n, 1)
            for j, (g, _) in enumerate(self.den):
                if j != k:
                    rest = rest * g
            num = num - self.num * df * rest * e
        bumped = {f: e + 1 for f, e in self.den}
        return RationalFn._make(num, bumped)

    def evaluate(self, point):
        den = 1
        for f, e in self.den:
            v = f.evaluate(point)
            den = den * v ** e
        if den == 0:
            raise DivisionByZeroFunction('denominator vanishes at the point')
        return self.num.evaluate(point) / den

    # ---- conversions ----

    def den_poly(self):
        out = Poly.const(self.n, 1)
        for f, e in self.den:
            for _ in range(e):
                out = out * f
        return out

    def to_jet(self, point, order):
        out = self.num.to_jet(point, order)
        for f, e in self.den:
            fj = f.to_jet(point, order)
            for _ in range(e):
                out = out / fj
        return out

    def to_poly(self):
        '''Strict narrowing; only valid when the denominator is trivial.'''
        if self.den:
            raise UnsupportedDivision('rational function is not a polynomial')
        return self.num

    def to_expr(self):
        if not self.den:
            return self.num.to_expr()
        dens = []
        for f, e in self.den:
            base = f'({f.to_expr()})'
            dens.append(base + (f'^{e}' if e > 1 else ''))
        return f'({self.num.to_expr()})/({"*".join(dens)})'

    def compile_eval(self):
        fn = self.num.compile_eval()
        fden = [(f.compile_eval(), e) for f, e in self.den]
        if not fden:
            return fn

        def ev(p):
            d = 1.0
            for f, e in fden:
                d *= f(p) ** e
            return fn(p) / d
        return ev

    def __repr__(self):
        return f'RationalFn({self.to_expr()!r})'
