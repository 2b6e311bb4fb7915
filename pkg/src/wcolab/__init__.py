"""Numerical laboratory for weighted composition operators on spaces of analytic functions."""

__version__ = "0.1.0"

from .errors import NumericFailure, ValidationError  # noqa: E402
from .holofunc import CoeffSeries, GridSpec, WeightSequence  # noqa: E402
from .wco import Space, WeightedCompositionOp  # noqa: E402

__all__ = ["CoeffSeries", "GridSpec", "NumericFailure", "Space", "ValidationError",
           "WeightSequence", "WeightedCompositionOp", "__version__"]
