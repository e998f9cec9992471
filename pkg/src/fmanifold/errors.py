'''Exception hierarchy shared across the package.

Everything raised on purpose derives from FManifoldError so callers can
catch one type at the boundary.  Mathematical failures (residuals that do
not vanish, singular loci) and usage failures (bad input, wrong backend)
are kept as distinct subtrees because the command line maps them to
different exit codes.
'''


class FManifoldError(Exception):
    '''Base class for all package errors.'''


class UsageError(FManifoldError):
    '''Malformed input: bad expressions, shapes, files or arguments.'''


class MathError(FManifoldError):
    '''A mathematical requirement failed on well-formed input.'''


# ---- scalar backends ----

class BackendMismatch(UsageError):
    '''Operands live on different scalar backends or incompatible jets.'''


class DivisionByZeroFunction(MathError):
    '''Division by the zero function, or by a jet with vanishing value.'''


class UnsupportedDivision(UsageError):
    '''Quotient does not exist on the polynomial backend.'''


class IndexOutOfRange(UsageError):
    '''Variable index outside 1..n.'''


class JetOrderExhausted(UsageError):
    '''Derivative requested of an order-0 jet.'''


class ExprSyntaxError(UsageError):
    '''Expression failed to tokenize or parse.  Carries the offset.'''

    def __init__(self, message, position):
        super().__init__(f'{message} (at position {position})')
        self.position = position


class UnknownVariable(UsageError):
    '''Expression references a variable the context does not define.'''


class NotClosed(MathError):
    '''One-form failed the closedness test.  Carries the failing pair.'''

    def __init__(self, i, j, residual):
        super().__init__(f'one-form is not closed: d(g_{i})/du{j} != d(g_{j})/du{i}')
        self.pair = (i, j)
        self.residual = residual


# ---- block algebra ----

class ShapeMismatch(UsageError):
    '''Operands disagree on the block shape or component count.'''


class NotInvertible(MathError):
    '''Leading block component is the zero function; no inverse exists.'''

    def __init__(self, block):
        super().__init__(f'field is not invertible: leading component of block {block} vanishes')
        self.block = block


# ---- solver ----

class SeedSupportViolation(UsageError):
    '''Seed function depends on variables outside its allowed support.'''


class PreconditionFailed(MathError):
    '''An operation's mathematical precondition does not hold.'''


# ---- dual frames ----

class QViolated(MathError):
    '''Generator fails the first-order compatibility equation.'''

    def __init__(self, block, residual):
        super().__init__(f'generator for block {block} violates the compatibility equation')
        self.block = block
        self.residual = residual


class NoPolynomialSolution(MathError):
    '''Exact completion has no polynomial solution; try numeric mode.'''


class ZeroGenerator(UsageError):
    '''Frame generator has a vanishing leading coefficient.'''


# ---- charts ----

class SingularEncounter(MathError):
    '''Trajectory or base point too close to the non-invertibility locus.'''


class NonCommutingFrame(MathError):
    '''Flow compositions in different orders disagree beyond tolerance.'''
