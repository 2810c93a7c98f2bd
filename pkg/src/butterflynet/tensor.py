"""Array validation at external boundaries.

Internally everything is a plain C-contiguous float64 ndarray; these helpers
enforce that plus finiteness when data crosses a public boundary (user input,
file loads, the public conv primitive).
"""

import numpy as np

from .errors import DimensionError, ValidationError


def as_tensor(x, name: str = "array") -> np.ndarray:
    """Coerce to float64 ndarray, rejecting non-finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise ValidationError(f"{name} contains NaN or Inf")
    return np.ascontiguousarray(arr)


def require_axis(arr: np.ndarray, axis: int, extent: int, name: str) -> None:
    if arr.shape[axis] != extent:
        raise DimensionError(name, extent, arr.shape[axis])
