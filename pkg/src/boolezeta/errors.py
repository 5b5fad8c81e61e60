"""Exception hierarchy shared by all modules."""


class BoolezetaError(Exception):
    """Base class for every error raised by the package."""


class NumericFailure(BoolezetaError):
    """A computation produced or would produce an unusable number (CLI exit code 2)."""


class NonFiniteError(NumericFailure):
    pass


class NonConvergence(NumericFailure):
    pass


class DomainViolation(BoolezetaError, ValueError):
    pass


class PoleError(DomainViolation):
    """Evaluation requested exactly at a pole."""

    def __init__(self, s0, message=None):
        self.s0 = s0
        super().__init__(message or f"function has a pole at s = {s0}")


class PoleAt1(PoleError):
    def __init__(self):
        super().__init__(1.0, "pole at s = 1")


class OutOfSupportedRegion(DomainViolation):
    pass


class TooCloseToPole(DomainViolation):
    pass


class NotFundamentalDiscriminant(BoolezetaError, ValueError):
    pass


class LineCaseUnsupported(DomainViolation):
    """Re(s) lies on the pole line but the pole has order m > 1."""


class PoleOrderTooHigh(LineCaseUnsupported):
    pass


class OnPoleLine(DomainViolation):
    """Ordinary quadrature requested on the pole line; use the principal-value variant."""


class SpecialPoint(DomainViolation):
    pass


class MissingCoefficients(BoolezetaError, ValueError):
    pass
