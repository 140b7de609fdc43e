"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """An object or option combination is structurally invalid."""


class QuadratureError(RuntimeError):
    """Numerical integration failed to converge.

    Carries the best available estimate in ``estimate``.
    """

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate
