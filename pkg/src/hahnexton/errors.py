"""Exception hierarchy shared by every numeric routine."""

from __future__ import annotations


class QBesselError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QBesselError, ValueError):
    """An input lies outside the region where the quantity is defined."""


class PoleError(DomainError):
    """A lower parameter makes a denominator factor (b;q)_n vanish."""


class ConvergenceError(QBesselError, ArithmeticError):
    """A summation hit ``max_terms`` without meeting its stopping rule."""


class WindowTooSmallError(ConvergenceError):
    """A bilateral sum still had non-negligible terms at a window edge."""

    def __init__(self, edge: int, side: str, last_term: float, partial: float) -> None:
        self.edge = edge
        self.side = side
        self.last_term = last_term
        self.partial = partial
        super().__init__(
            f"window too small: {side} edge at exponent {edge} "
            f"(last term {last_term:.3e}, partial sum {partial:.3e})"
        )


class NoSignChangeError(QBesselError, ValueError):
    """Root bracketing failed: the function has no sign change on the bracket."""
