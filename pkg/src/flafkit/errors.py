"""Exception types shared across the package.

Three failure classes are kept distinct so callers can tell apart a corrupted
input stream, a bad configuration, and an adaptive run that blew up.
"""


class FlafError(Exception):
    """Base class for all package errors."""


class DomainError(FlafError, ValueError):
    """An input sample is outside the valid domain (NaN/inf in the stream)."""


class ConfigurationError(FlafError, ValueError):
    """Inconsistent or invalid construction parameters."""


class DivergenceError(FlafError, ArithmeticError):
    """Adaptive weights became non-finite (step size too large).

    Carries enough context for a harness to report which run died where.
    """

    def __init__(self, message, algorithm=None, iteration=None, run=None):
        super().__init__(message)
        self.algorithm = algorithm
        self.iteration = iteration
        self.run = run

    def __str__(self):
        base = super().__str__()
        where = []
        if self.algorithm is not None:
            where.append(f"algorithm={self.algorithm}")
        if self.run is not None:
            where.append(f"run={self.run}")
        if self.iteration is not None:
            where.append(f"iteration={self.iteration}")
        return f"{base} ({', '.join(where)})" if where else base
