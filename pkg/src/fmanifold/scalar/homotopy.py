'''Closed one-form integration by the scaling homotopy.

Given components g_l of a one-form sum_l g_l du^l over a subset of the
variables, this produces the potential

    F(u) = int_0^1 sum_l g_l(sigma * u_vars, u_rest) u^l dsigma,

which for a monomial c u^a u^l amounts to dividing by one plus the total
degree of u^a in the scaled variables.  F satisfies dF/du^l = g_l for
every l in the set once the form is closed, and F carries no monomial
free of the scaled variables, so F vanishes when they are all set to 0.
'''

from fractions import Fraction

from ..errors import NotClosed
from .poly import Poly


def homotopy_integrate(components, vars):
    '''Integrate {var_index: Poly} into a single potential polynomial.

    components maps each 1-based variable index in vars to the matching
    one-form coefficient.  Closedness over the given variable set is
    checked first; the failing pair is reported if it breaks.
    '''
    vars = sorted(vars)
    if set(components) != set(vars):
        raise ValueError('one-form components must cover exactly the scaled variables')
    if not vars:
        raise ValueError('empty variable set')
    some = components[vars[0]]
    n = some.n

    for a in range(len(vars)):
        for b in range(a + 1, len(vars)):
            k, l = vars[a], vars[b]
            resid = components[l].partial(k) - components[k].partial(l)
            if not resid.is_zero():
                raise NotClosed(k, l, resid)

    out = Poly.zero(n)
    for l in vars:
        for e, c in components[l].coeffs.items():
            scaled_degree = sum(e[v - 1] for v in vars)
            f = list(e)
            f[l - 1] += 1
            out = out + Poly(n, {tuple(f): c * Fraction(1, scaled_degree + 1)})
    return out
