"""Exception types raised across the package."""


class PosmapsError(Exception):
    """Base class for all package errors."""


class NonConvergence(PosmapsError, ArithmeticError):
    pass


class DimMismatch(PosmapsError, ValueError):
    pass


class NotPsd(PosmapsError, ValueError):
    pass


class Singular(PosmapsError, ValueError):
    pass


class NotInvertible(Singular):
    pass


class DomainViolation(PosmapsError, ValueError):
    pass


class DegeneratePoints(PosmapsError, ValueError):
    pass


class NegativeJump(PosmapsError, ValueError):
    pass


class NoLimit(PosmapsError, ValueError):
    pass


class LengthMismatch(PosmapsError, ValueError):
    pass


class NegativeInput(PosmapsError, ValueError):
    pass


class NonMonotone(PosmapsError, ValueError):
    pass


class SpectrumOutOfRange(PosmapsError, ValueError):
    pass


class EvaluatorError(PosmapsError, RuntimeError):
    """A map evaluator raised; ``inputs`` holds the offending matrices."""

    def __init__(self, name, inputs, cause):
        super().__init__(f"evaluator {name!r} failed: {cause!r}")
        self.name = name
        self.inputs = inputs
        self.cause = cause


class NonMonotoneInteraction(UserWarning):
    """A custom interaction operator failed the sampled monotonicity check."""
