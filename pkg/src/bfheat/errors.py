"""Exception types raised across the package."""


class BFHeatError(Exception):
    """Base class for all package errors."""


class InvalidEpsilon(BFHeatError, ValueError):
    """Raised when the diffusion parameter lies outside (0, 2)."""

    def __init__(self, eps):
        self.eps = eps
        super().__init__(
            f"epsilon={eps!r} is outside (0, 2); the factorization L = M S and the "
            "bounded invertibility of M require 0 < epsilon < 2 "
            "(pass allow_out_of_range=True to override)"
        )


class InvalidOrder(BFHeatError, ValueError):
    """Raised for a truncation order N < 1."""


class DimensionMismatch(BFHeatError, ValueError):
    pass


class NoConvergence(BFHeatError, RuntimeError):
    """QR iteration exceeded its sweep budget.

    Attributes
    ----------
    sweeps : int
        Sweeps performed before giving up.
    deflated : int
        Number of eigenvalues already split off.
    undeflated : int
        Size of the active block that failed to converge.
    """

    def __init__(self, sweeps, deflated, undeflated):
        self.sweeps = sweeps
        self.deflated = deflated
        self.undeflated = undeflated
        super().__init__(
            f"QR iteration did not converge after {sweeps} sweeps "
            f"({deflated} eigenvalues deflated, {undeflated} undeflated)"
        )


class Singular(BFHeatError, ArithmeticError):
    """Matrix is numerically singular at this truncation."""


class Unsolvable(BFHeatError, ValueError):
    """Right-hand side has a nonzero mean and is outside the range of L."""


class QuadratureFailure(BFHeatError, RuntimeError):
    """A posteriori residual of the quadrature resolvent exceeded tolerance."""


class EigendecompositionIllConditioned(BFHeatError, RuntimeWarning):
    """Eigenvector matrix too ill-conditioned for the eigen propagator."""
