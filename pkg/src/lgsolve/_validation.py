"""Input checks shared by the estimators and the CLI."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import ConfigError


def check_points(X, name="X"):
    """Finite float array of shape ``(n, 2)``."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True, input_name=name)
    if X.shape[1] != 2:
        raise ValueError(f"{name} must have two columns (x, y), got shape {X.shape}")
    return X


def check_values(y, n, name="y"):
    y = check_array(np.asarray(y).reshape(-1, 1), dtype=np.float64, input_name=name).ravel()
    if len(y) != n:
        raise ValueError(f"{name} has {len(y)} entries, expected {n}")
    return y


def check_positive(value, name, integer=False):
    kind = numbers.Integral if integer else numbers.Real
    if not isinstance(value, kind) or isinstance(value, bool) or not value > 0:
        raise ConfigError(f"{name} must be a positive {'integer' if integer else 'number'}, got {value!r}")
    return value


def check_box(box, name="window"):
    try:
        b = tuple(float(v) for v in box)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be four numbers x0,y0,x1,y1") from None
    if len(b) != 4 or not (b[0] < b[2] and b[1] < b[3]):
        raise ConfigError(f"{name} must satisfy x0 < x1 and y0 < y1, got {box!r}")
    return b
