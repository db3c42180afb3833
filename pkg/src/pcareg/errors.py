"""Semantic exception types shared across the library."""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """Evaluation requested at (or inside the guard band of) a pole."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its target tolerance.

    ``achieved_tol`` carries the error estimate actually reached, when the
    failing routine can report one.
    """

    def __init__(self, message: str, achieved_tol: float | None = None):
        super().__init__(message)
        self.achieved_tol = achieved_tol


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""
