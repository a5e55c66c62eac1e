"""Data reduction and bounds for minimum-flip supertree and consensus problems."""

__version__ = "0.1.0"

from .matrix import FlipMatrix, MatrixError, parse_matrix, write_matrix  # noqa: E402
from .reduction import ReductionOptions, ReductionState, Status, reduce  # noqa: E402

__all__ = [
    "FlipMatrix",
    "MatrixError",
    "ReductionOptions",
    "ReductionState",
    "Status",
    "parse_matrix",
    "reduce",
    "write_matrix",
]
