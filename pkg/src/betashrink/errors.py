"""Exception hierarchy shared across the package."""


class BetaShrinkError(Exception):
    """Base class for all package errors."""


class ShapeError(BetaShrinkError, ValueError):
    """Array length or layout does not fit the requested operation."""


class LevelError(BetaShrinkError, ValueError):
    """A resolution level is out of range."""


class UnsupportedFilterError(BetaShrinkError, ValueError):
    pass


class ArgumentError(BetaShrinkError, ValueError):
    pass


class DegenerateSignalError(BetaShrinkError, ValueError):
    pass


class DegenerateConstraintError(BetaShrinkError, ValueError):
    """A percentile constraint is satisfied by every shape parameter."""


class NoSolutionError(BetaShrinkError, ValueError):
    """No root exists inside the search bracket."""


class NumericalFailure(BetaShrinkError, ArithmeticError):
    """Quadrature did not converge within its node budget.

    ``residual`` is the last difference between the two refinement
    estimates; ``context`` carries location info (level, index, ...)
    added by callers as the error propagates.
    """

    def __init__(self, message, residual=float("nan"), context=None):
        super().__init__(message)
        self.residual = residual
        self.context = dict(context or {})

    def with_context(self, **kw):
        ctx = {**self.context, **kw}
        return NumericalFailure(str(self.args[0]), self.residual, ctx)

    def __str__(self):
        msg = f"{self.args[0]} (residual={self.residual:.3g})"
        if self.context:
            where = ", ".join(f"{k}={v}" for k, v in self.context.items())
            msg += f" [{where}]"
        return msg


class ConfigError(BetaShrinkError, ValueError):
    """Invalid study/CLI configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ParseError(BetaShrinkError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
