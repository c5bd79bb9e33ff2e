"""Central differences with one level of Richardson extrapolation."""
from __future__ import annotations

import numpy as np

from .errors import UsageError

DEFAULT_STEP = 1e-4
MIN_STEP, MAX_STEP = 1e-6, 1e-3


def check_step(step: float) -> float:
    step = float(step)
    if not (MIN_STEP <= step <= MAX_STEP):
        raise UsageError(f"finite-difference step {step!r} outside [{MIN_STEP}, {MAX_STEP}]")
    return step


def directional(fn, x, v, step: float = DEFAULT_STEP):
    """d/dt fn(x + t v) at t = 0, O(step^4) accurate."""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)

    def central(h):
        return (np.asarray(fn(x + h * v)) - np.asarray(fn(x - h * v))) / (2.0 * h)

    return (4.0 * central(0.5 * step) - central(step)) / 3.0


def partials(fn, x, step: float = DEFAULT_STEP) -> np.ndarray:
    """Stack of coordinate partials; axis 0 indexes the coordinate."""
    x = np.asarray(x, dtype=np.float64)
    eye = np.eye(x.shape[0])
    return np.stack([directional(fn, x, eye[m], step) for m in range(x.shape[0])])
