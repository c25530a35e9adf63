"""Exception types.

Every error carries a machine-readable ``code`` so the CLI can report it
without parsing messages.
"""

from __future__ import annotations


class UnicritError(Exception):
    code = "ERROR"


class NonDivisibleError(UnicritError, ArithmeticError):
    """Exact polynomial division left a remainder."""

    code = "NON_DIVISIBLE"

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"non-zero remainder coefficient at index {index}")


class DegreeCapExceeded(UnicritError):
    code = "DEGREE_CAP_EXCEEDED"


class CapExceeded(UnicritError):
    code = "CAP_EXCEEDED"


class OverflowDetected(UnicritError, OverflowError):
    code = "OVERFLOW"


class NoConvergence(UnicritError):
    code = "NO_CONVERGENCE"

    def __init__(self, iterations: int, worst: float, message: str | None = None):
        self.iterations = iterations
        self.worst = worst
        super().__init__(message or f"no convergence after {iterations} iterations "
                                    f"(worst correction {worst:.3e})")


class DegenerateParameter(UnicritError):
    """The parameter sits inside a tolerance band; the caller should resample."""

    code = "DEGENERATE_PARAMETER"


class BisectionFailed(UnicritError):
    code = "BISECTION_FAILED"


class NotInH1(UnicritError):
    code = "NOT_IN_H1"


class NonfiniteNode(UnicritError):
    code = "NONFINITE_NODE"

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"integrand is not finite at node {index}")


class NonfiniteStencil(UnicritError):
    code = "NONFINITE_STENCIL"

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"Laplacian stencil is not finite at node {index}")
