"""Exception hierarchy shared by all modules."""


class LiesymError(Exception):
    pass


# expression engine

class MalformedExpression(LiesymError, ValueError):
    pass


class DerivativeOrderExceeded(LiesymError):
    pass


class NonPolynomialInJet(LiesymError):
    pass


class ProbableZero(LiesymError):
    """Canonical form is nonzero but every random probe vanished.

    This flags a simplification gap, never a silent pass.
    """

    def __init__(self, expr, message=None):
        self.expr = expr
        super().__init__(message or f"expression vanishes at all probes but is not canonically zero: {expr}")


class DomainError(LiesymError, ValueError):
    pass


class UnboundSymbol(LiesymError, KeyError):
    pass


# symbolic pipeline

class UncoveredJetVariable(LiesymError):
    pass


class InvalidCoefficient(LiesymError, ValueError):
    pass


class NonzeroRemainder(LiesymError):
    pass


class ParameterConstraintViolated(LiesymError, ValueError):
    pass


class DegenerateDiffusion(LiesymError, ValueError):
    pass


class NonRationalExponent(LiesymError, ValueError):
    pass


class VerificationFailed(LiesymError):
    pass


class NegativeBesselArgument(LiesymError, ValueError):
    pass


# numerics

class NumericFailure(LiesymError):
    """Base for failures that map to CLI exit code 3."""


class StepSizeUnderflow(NumericFailure):
    pass


class NonFiniteState(NumericFailure):
    pass


class SingularityApproached(NumericFailure):
    pass


class CoverageGap(NumericFailure):
    pass


class NonPositiveH(NumericFailure):
    pass


class NonFiniteSample(NumericFailure):
    pass


class StabilityViolation(NumericFailure):
    pass


class DomainEscape(NumericFailure):
    pass
