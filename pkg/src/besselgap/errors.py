"""Exception hierarchy.

Every error carries the name of the module that raised it and, where it
applies, the invariant that failed, so the CLI can report both.
"""


class BesselGapError(Exception):
    module = "besselgap"
    invariant = None

    def __init__(self, message, *, invariant=None):
        super().__init__(message)
        if invariant is not None:
            self.invariant = invariant

    def describe(self):
        inv = f" [invariant: {self.invariant}]" if self.invariant else ""
        return f"{self.module}: {type(self).__name__}: {self}{inv}"


class InvalidConfiguration(BesselGapError, ValueError):
    module = "surface"


class NonIncreasingEndpoints(InvalidConfiguration):
    invariant = "0 < x_1 < ... < x_{2g+1}"


class NonPositiveEndpoint(InvalidConfiguration):
    invariant = "x_1 > 0"


class AlphaOutOfRange(InvalidConfiguration):
    invariant = "alpha > -1"


class EvenEndpointCount(InvalidConfiguration):
    invariant = "len(x) odd"


class NegativeR(BesselGapError, ValueError):
    invariant = "r >= 0"


class NumericalError(BesselGapError, ArithmeticError):
    """Non-convergence or a violated mathematical invariant."""


# surface
class PointOnCut(BesselGapError, ValueError):
    module = "surface"


class QuadratureNotConverged(NumericalError):
    module = "quadrature"


class SingularPeriodMatrix(NumericalError):
    module = "surface"
    invariant = "A invertible"


class NonPositiveOmega(NumericalError):
    module = "surface"
    invariant = "Omega_j > 0"


class AsymmetricTau(NumericalError):
    module = "surface"
    invariant = "tau symmetric"


class NonPositiveDefiniteTau(NumericalError):
    module = "surface"
    invariant = "Im tau positive definite"


# theta
class ImaginaryPartTooLarge(BesselGapError, ValueError):
    module = "theta"
    invariant = "|Im z| <= z_im_max"


# flow
class ThetaDenominatorVanishes(NumericalError):
    module = "flow"


class RootOutsideInterval(NumericalError):
    module = "flow"
    invariant = "b_k in [-x_{2k+1}, -x_{2k}]"


class EvaluationAtRootOfQ(BesselGapError, ValueError):
    module = "flow"


class SearchBoundTooLarge(BesselGapError, ValueError):
    module = "flow"


# asym
class RegimeRequiresErgodic(BesselGapError, ValueError):
    module = "asym"
    invariant = "Omega rationally independent"


class InsufficientPoints(BesselGapError, ValueError):
    module = "asym"


# bessel
class NegativeArgument(BesselGapError, ValueError):
    module = "bessel"


class NonPositiveArgument(BesselGapError, ValueError):
    module = "bessel"


class AccuracyLoss(NumericalError):
    module = "bessel"


# fredholm
class NotConverged(NumericalError):
    module = "fredholm"


class MatrixNotContractive(NumericalError):
    module = "fredholm"
    invariant = "spectrum of the kernel matrix inside [0, 1)"
