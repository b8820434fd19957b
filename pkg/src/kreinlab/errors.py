"""Exception hierarchy.

Two families map onto the CLI exit codes: :class:`InputError` (bad or
inconsistent input, exit 1) and :class:`NumericalError` (a computation hit a
singular point, exit 2).
"""

from __future__ import annotations


class KreinLabError(Exception):
    """Base class for all library errors."""


class InputError(KreinLabError, ValueError):
    pass


class NumericalError(KreinLabError, ArithmeticError):
    pass


# -- input validation -------------------------------------------------------

class ShapeMismatch(InputError):
    pass


class NonFiniteEntry(InputError):
    pass


class NotHermitian(InputError):
    pass


class NotInvertible(InputError):
    pass


class RankDeficient(InputError):
    pass


class DegeneratePair(InputError):
    pass


class InsufficientSamples(InputError):
    pass


class NonRealCoupling(InputError):
    pass


class CoincidentPoints(InputError):
    pass


class NonpositiveRadius(InputError):
    pass


class InvalidBracket(InputError):
    pass


class InvalidRectangle(InputError):
    pass


# -- numerical failures -----------------------------------------------------

class Singular(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class AtSpectrum(NumericalError):
    pass


class SingularBoundaryOperator(NumericalError):
    pass


class ResolventSingular(NumericalError):
    pass


class SingularLambda(NumericalError):
    pass


class SingularPiBPi(NumericalError):
    pass


class SingularShift(NumericalError):
    pass


class SingularPencil(NumericalError):
    pass


class OnBranchCut(NumericalError):
    pass


class NotARoot(NumericalError):
    pass


class NonFiniteSample(NumericalError):
    pass


class LostBracket(NumericalError):
    pass


class ZeroOnContour(NumericalError):
    pass


class NoPhaseConvergence(NumericalError):
    pass
