'''Regular F-manifold kernels: block multiplication in generalized
canonical coordinates, eventual identity construction and verification,
dual products and frames, and dual coordinate charts.'''

__version__ = '0.1.0'

from . import errors
from .blocks import (
    BlockShape, VectorField, circ, coordinate_field, dual_product,
    invert, power, structure_tensor, unit_field,
)
from .calculus import (
    Residual, atlas_residual, ei_residual, hm_residual, lie_bracket,
    mult_operator, nijenhuis_torsion, weak_ei_bracket_check,
)
from .chart import ChartSpec, integrate_chart, pushforward_check
from .characteristics import CharacteristicGenerators
from .frame import (
    DualFrame, build_frame, commutation_check, construct_a,
    corollary_check, frame_product_check, recursion_check, v2_conditions,
)
from .sampling import sample_points
from .scalar import Jet, Poly, RationalFn, homotopy_integrate, parse_scalar
from .solver import EISeed, SolvedEI, euler_seed, solve, verify_seed_freeness

__all__ = [
    'BlockShape', 'ChartSpec', 'CharacteristicGenerators', 'DualFrame',
    'EISeed', 'Jet', 'Poly', 'RationalFn', 'Residual', 'SolvedEI',
    'VectorField', 'atlas_residual', 'build_frame', 'circ',
    'commutation_check', 'construct_a', 'coordinate_field',
    'corollary_check', 'dual_product', 'ei_residual', 'errors',
    'euler_seed', 'frame_product_check', 'hm_residual',
    'homotopy_integrate', 'integrate_chart', 'invert', 'lie_bracket',
    'mult_operator', 'nijenhuis_torsion', 'parse_scalar', 'power',
    'pushforward_check', 'recursion_check', 'sample_points', 'solve',
    'structure_tensor', 'unit_field', 'v2_conditions',
    'verify_seed_freeness', 'weak_ei_bracket_check',
]
