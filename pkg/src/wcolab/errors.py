"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): bad input
(:class:`ValidationError`, exit 1) and numerical failure
(:class:`NumericFailure`, exit 2).
"""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class NumericFailure(RuntimeError):
    """A computation could not be completed reliably."""


class NotSelfMapError(NumericFailure):
    """The map sends a sample point outside the open unit disc."""


class DivergenceError(NumericFailure):
    """A pointwise product blew past the overflow guard."""


class NewtonFailure(NumericFailure):
    pass


class BranchError(NumericFailure):
    """No continuous square-root branch on the sampled grid."""


class EllipticAutomorphismError(ValidationError):
    """Denjoy-Wolff machinery does not apply to elliptic automorphisms."""
