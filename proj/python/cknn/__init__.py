"""Session-based nearest-neighbor recommendation.

Items and sessions are addressed by their names in the input data.
"""

from ._core import (
    CknnError,
    Dataset,
    Index,
    bench,
    evaluate,
    preset,
    sweep,
)

__all__ = ["CknnError", "Dataset", "Index", "bench", "evaluate", "preset", "sweep"]
