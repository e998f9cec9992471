'''Scalar coordinate functions: exact polynomials, factored quotients,
truncated jets, plus the expression parser and one-form integration.'''

from .base import ScalarFn, same_backend
from .homotopy import homotopy_integrate
from .jet import Jet, multi_indices
from .parser import lower, parse, parse_scalar, tree_vars
from .poly import Poly
from .rational import RationalFn

__all__ = [
    'Jet', 'Poly', 'RationalFn', 'ScalarFn',
    'homotopy_integrate', 'lower', 'multi_indices',
    'parse', 'parse_scalar', 'same_backend', 'tree_vars',
]
