"""Small dense linear algebra with an explicit metric.

Every routine takes the metric as a symmetric positive definite matrix ``g``
in the working basis; vectors are 1-d float64 arrays.
"""
from __future__ import annotations

import numpy as np

from .errors import DegeneracyError, UsageError

__all__ = [
    "as_vector",
    "check_metric",
    "inner",
    "norm",
    "wedge_apply",
    "gram_schmidt",
    "op_distance",
    "rel_err",
]


def as_vector(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise UsageError(f"expected a 1-d vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise UsageError(f"expected dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise UsageError("vector has non-finite components")
    return v


def check_metric(g, atol: float = 1e-12) -> np.ndarray:
    """Validate symmetry and positive definiteness (via Cholesky)."""
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise UsageError(f"metric must be square, got shape {g.shape}")
    scale = max(1.0, float(np.abs(g).max()))
    if np.abs(g - g.T).max() > atol * scale:
        raise UsageError("metric is not symmetric")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise UsageError("metric is not positive definite") from exc
    return g


def inner(x, y, g) -> float:
    return float(x @ (g @ y))


def norm(x, g) -> float:
    return float(np.sqrt(max(inner(x, x, g), 0.0)))


def wedge_apply(X, Y, Z, g) -> np.ndarray:
    """Return ``(X ^ Y) Z = g(Y, Z) X - g(X, Z) Y``."""
    g = np.asarray(g, dtype=np.float64)
    d = g.shape[0]
    X, Y, Z = (as_vector(v, d) for v in (X, Y, Z))
    return inner(Y, Z, g) * X - inner(X, Z, g) * Y


def gram_schmidt(basis, g, rtol: float = 1e-10) -> list[np.ndarray]:
    """Modified Gram-Schmidt with respect to ``g``.

    The k-th output lies in the span of the first k inputs and has a positive
    coefficient on the k-th input. Raises DegeneracyError when a residual
    falls below ``rtol`` times the norm of the input it came from.
    """
    g = np.asarray(g, dtype=np.float64)
    d = g.shape[0]
    out: list[np.ndarray] = []
    for v in basis:
        v = as_vector(v, d).copy()
        n0 = norm(v, g)
        if n0 == 0.0:
            raise DegeneracyError("zero vector in basis")
        # two passes keep the output orthonormal to roundoff for ill-conditioned g
        for _ in range(2):
            for e in out:
                v -= inner(e, v, g) * e
        nv = norm(v, g)
        if nv < rtol * n0:
            raise DegeneracyError(f"basis is numerically dependent (pivot {nv:.3e} vs norm {n0:.3e})")
        out.append(v / nv)
    return out


def op_distance(P, Q, g) -> float:
    """g-Frobenius norm of ``P - Q``: sqrt(tr((P-Q)^* (P-Q))) with ^* the g-adjoint."""
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if P.shape != Q.shape or P.shape != g.shape:
        raise UsageError(f"shape mismatch: {P.shape}, {Q.shape}, metric {g.shape}")
    D = P - Q
    adj = np.linalg.solve(g, D.T @ g)
    return float(np.sqrt(max(np.trace(adj @ D), 0.0)))


def rel_err(a, b, scale: float = 0.0) -> float:
    """``|a - b| / max(|a|, |b|, scale)``; zero when every magnitude vanishes.

    ``scale`` is the natural size of the compared quantity. It stops
    quantities that vanish identically from being compared by pure roundoff.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    diff = float(np.linalg.norm(a - b))
    den = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), scale)
    if den == 0.0:
        return 0.0
    return diff / den
