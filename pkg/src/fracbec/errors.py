"""Exception types raised across the package."""


class FracBECError(Exception):
    pass


class GridMismatch(FracBECError):
    pass


class ImaginaryResidueTooLarge(FracBECError):
    pass


class ZeroDenominator(FracBECError):
    pass


class NonpositiveDenominator(FracBECError):
    pass


class NegativeValues(FracBECError):
    pass


class NoConvergence(FracBECError):
    def __init__(self, iterations, last_residual, message=None):
        self.iterations = iterations
        self.last_residual = last_residual
        super().__init__(
            message
            or f"no convergence after {iterations} iterations (residual {last_residual:.3e})"
        )


class NoInteriorMinimum(FracBECError):
    """kappa has no interior minimum; ``limit`` holds the boundary infimum."""

    def __init__(self, side, limit):
        self.side = side
        self.limit = limit
        super().__init__(f"infimum approached at t -> {side} (limit {limit:.6g})")


class SingularCouplings(FracBECError):
    pass


class SupportTooWide(FracBECError):
    pass


class ResolutionTooCoarse(FracBECError):
    pass


class PreconditionError(FracBECError, ValueError):
    pass


class BudgetExceeded(FracBECError):
    pass


class ConfigError(FracBECError, ValueError):
    pass


class FieldFormatError(FracBECError, ValueError):
    pass
