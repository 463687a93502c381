"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain where a function is defined."""


class DivergenceError(ArithmeticError):
    """Quantity diverges at the requested point (critical line, pole)."""


class ToleranceError(ArithmeticError):
    """Adaptive routine stopped before reaching the requested tolerance.

    The best available estimate and its error are kept on the exception so
    callers can decide whether it is good enough.
    """

    def __init__(self, message, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
