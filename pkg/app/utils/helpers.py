# ===========================================================================
# File: app/utils/helpers.py
# ===========================================================================
from collections import OrderedDict
from typing import Any, Callable, Dict, Hashable, Iterable, List, TypeVar
import numpy as np

from app.core.config import settings

T = TypeVar("T")


def format_number(value: Any) -> str:
    """Text form used in every output file: floats with CSV_DIGITS significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return settings.float_format.format(float(value))
    return str(value)


def sample_grid(R: float, H: float, nx: int, ny: int) -> np.ndarray:
    """nx x ny uniform sampling points of [-R, R] x [0, H], x fastest."""
    if nx < 2 or ny < 2:
        raise ValueError(f"sampling grid needs at least 2 x 2 points, got {nx} x {ny}")
    X, Y = np.meshgrid(np.linspace(-R, R, nx), np.linspace(0.0, H, ny), indexing="xy")
    return np.column_stack([X.ravel(), Y.ravel()])


def group_by(items: Iterable[T], key: Callable[[T], Hashable]) -> Dict[Hashable, List[T]]:
    """Group preserving first-seen key order."""
    groups: Dict[Hashable, List[T]] = OrderedDict()
    for item in items:
        groups.setdefault(key(item), []).append(item)
    return groups
