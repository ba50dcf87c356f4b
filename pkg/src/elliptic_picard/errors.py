"""Exception types shared across the package."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid problem description or inconsistent declared constants."""


class CertificateError(RuntimeError):
    """The contraction certificate rho < 1 does not hold, so iteration is refused."""

    def __init__(self, message: str, rho: float):
        super().__init__(message)
        self.rho = rho


class NumericalError(RuntimeError):
    """A numerical kernel failed to reach its tolerance."""


class LinearSolveError(NumericalError):
    pass


class EigenSolveError(NumericalError):
    pass
