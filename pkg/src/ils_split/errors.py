"""Exception types raised across the package."""

import numpy as np


class DimensionError(ValueError):
    """Operand shapes are inconsistent."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky factorization met a non-positive pivot.

    ``pivot`` is the 1-based index of the offending pivot.
    """

    def __init__(self, pivot, value=None):
        self.pivot = pivot
        self.value = value
        msg = f"matrix not positive definite at pivot {pivot}"
        if value is not None:
            msg += f" (pivot value {value:.3e})"
        super().__init__(msg)


class NonUniqueSolutionError(ValueError):
    """A^T J A is not SPD, so the ILS problem has no unique minimizer."""


class HomogeneousRHSError(ValueError):
    """The normal-equation right-hand side is zero; RES is undefined."""

    def __init__(self, msg="homogeneous RHS; RES undefined"):
        super().__init__(msg)


class ParameterError(ValueError):
    """Invalid iteration parameters (for example ADI with beta <= alpha)."""


class DivergenceError(ArithmeticError):
    """An iterate became non-finite."""

    def __init__(self, step):
        self.step = step
        super().__init__(f"divergence (non-finite iterate) at step {step}")


class CapacityError(ValueError):
    """A dense eigen-analysis was requested above the configured size cap."""


class ProblemFormatError(ValueError):
    """A stored problem directory is malformed."""
