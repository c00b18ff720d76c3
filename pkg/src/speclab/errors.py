"""Exception hierarchy shared by every speclab module."""


class SpeclabError(Exception):
    """Base class for all errors raised by speclab."""


class ShapeMismatch(SpeclabError, ValueError):
    pass


class NonFiniteEntries(SpeclabError, ValueError):
    pass


class NotHermitian(SpeclabError, ValueError):
    pass


class NoConvergence(SpeclabError, RuntimeError):
    pass


class NegativeEigenvalue(SpeclabError, ValueError):
    pass


class NotUnitVector(SpeclabError, ValueError):
    pass


class ZeroVector(SpeclabError, ValueError):
    pass


class EigenvalueOnContour(SpeclabError, ValueError):
    pass


class SingularResolvent(SpeclabError, ArithmeticError):
    pass


class QuadratureNotConverged(NoConvergence):
    pass


class TruncationTooSmall(SpeclabError, ValueError):
    pass


class NormBoundViolated(SpeclabError, ValueError):
    pass


class NonCompactOperator(SpeclabError, ValueError):
    """A theorem check was asked to run on a generator outside its hypotheses."""


class DegreeCap(NoConvergence):
    pass


class SpectrumEscapesInterval(SpeclabError, ValueError):
    pass


class BadRadii(SpeclabError, ValueError):
    pass


class ConfigInvalid(SpeclabError, ValueError):
    """Raised for malformed experiment configs; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
