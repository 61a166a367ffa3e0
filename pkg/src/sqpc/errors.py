"""Exception hierarchy shared by all solver modules."""


class SQPCError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SQPCError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ConfigurationError(SQPCError, ValueError):
    """A configuration is inconsistent or physically invalid."""


class ValidationError(ConfigurationError):
    """A configuration value violates a field constraint.

    ``field`` names the offending key and ``constraint`` the violated rule,
    e.g. ``ValidationError("W_c", "W_c > 0", -10)``.
    """

    def __init__(self, field, constraint, value=None):
        self.field = field
        self.constraint = constraint
        self.value = value
        msg = f"{field}: constraint {constraint!r} violated"
        if value is not None:
            msg += f" (got {value!r})"
        super().__init__(msg)


class NumericError(SQPCError, ArithmeticError):
    """A linear-algebra step failed or produced an untrustworthy result."""

    def __init__(self, message, residual=None, condition=None):
        self.residual = residual
        self.condition = condition
        extra = []
        if residual is not None:
            extra.append(f"residual={residual:.3e}")
        if condition is not None:
            extra.append(f"condition={condition:.3e}")
        if extra:
            message = f"{message} ({', '.join(extra)})"
        super().__init__(message)


class ConvergenceError(SQPCError, RuntimeError):
    """An iterative solve hit its iteration cap."""

    def __init__(self, message, history=()):
        self.history = list(history)
        super().__init__(f"{message}; last residuals: {self.history[-5:]}")


class NotFoundError(SQPCError, LookupError):
    """A requested feature (e.g. a threshold crossing) is absent from the data."""


class SweepError(SQPCError):
    """A solver failure inside a sweep, tagged with the failing gate voltage."""

    def __init__(self, V_g, B, cause):
        self.V_g = V_g
        self.B = B
        self.cause = cause
        super().__init__(f"sweep failed at V_g={V_g!r} V, B={B!r} T: {cause}")
