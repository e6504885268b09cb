"""Exception types shared across the package."""

from __future__ import annotations


class DiracWaveError(Exception):
    """Base class for all package errors."""


class DomainError(DiracWaveError, ValueError):
    """Argument outside the supported domain (poles, branch cuts, bad ranges)."""


class RangeError(DiracWaveError, OverflowError):
    """Result not representable in double precision."""


class AccuracyError(DiracWaveError, ArithmeticError):
    """An iterative or adaptive method failed to reach its tolerance.

    ``achieved`` carries the best error bound reached before giving up.
    """

    def __init__(self, message: str, achieved: float = float("nan")):
        super().__init__(f"{message} (achieved error bound {achieved:.3e})")
        self.achieved = achieved


class ConstructionError(DiracWaveError, RuntimeError):
    """A contour failed its construction-time descent checks."""


class VerificationError(DiracWaveError, RuntimeError):
    """A numerical verification found no admissible constants.

    ``worst`` holds the offending sample as a plain dict.
    """

    def __init__(self, message: str, worst: dict | None = None):
        super().__init__(message)
        self.worst = worst or {}


class DivergenceError(DiracWaveError, ArithmeticError):
    """A dyadic sum diverges because a summability condition fails."""

    def __init__(self, message: str, inequality: str):
        super().__init__(f"{message}: {inequality}")
        self.inequality = inequality
