"""Chart models of the complex space forms C^n, CP^n and CH^n.

The metrics are normalized so that the holomorphic sectional curvature is
``16 c``: the reference metrics of curvature +4 (Fubini-Study, inhomogeneous
chart) and -4 (unit-ball model) are scaled by ``1 / (4 |c|)``.

Sign conventions, fixed across the package:
    (X ^ Y) Z = <Y, Z> X - <X, Z> Y
    R(X, Y) Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
    K(X, JX)  = <R(X, JX) JX, X> / (|X|^2 |JX|^2 - <X, JX>^2)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, fd
from .errors import DegeneracyError, DomainError, UsageError
from .linalg import as_vector, inner, wedge_apply

KINDS = ("euclidean", "projective", "hyperbolic")
SHORT_NAMES = {"eu": "euclidean", "cp": "projective", "ch": "hyperbolic"}

# sampling regions used by the verification suites
PROJECTIVE_BOX = 2.0
HYPERBOLIC_RADIUS = 0.8


@dataclass(frozen=True)
class SpaceFormSpec:
    kind: str
    n: int
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown space form kind {self.kind!r}")
        if int(self.n) != self.n or self.n < 1:
            raise UsageError(f"complex dimension must be a positive integer, got {self.n!r}")
        c = float(self.c)
        if not math.isfinite(c):
            raise UsageError("curvature parameter must be finite")
        expected = {"euclidean": c == 0.0, "projective": c > 0.0, "hyperbolic": c < 0.0}
        if not expected[self.kind]:
            raise UsageError(f"kind {self.kind} is incompatible with c = {c}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "n", int(self.n))

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def sigma(self) -> float:
        return {"euclidean": 0.0, "projective": 1.0, "hyperbolic": -1.0}[self.kind]

    @property
    def scale(self) -> float:
        return 1.0 if self.c == 0.0 else 1.0 / (4.0 * abs(self.c))

    @property
    def label(self) -> str:
        short = {v: k for k, v in SHORT_NAMES.items()}[self.kind]
        if self.kind == "euclidean":
            return f"{short}({self.n})"
        return f"{short}({self.n},c={self.c!r})"


@dataclass(frozen=True)
class FactorStructure:
    g: np.ndarray
    J: np.ndarray
    gamma: np.ndarray
    dg: np.ndarray


def check_point(spec: SpaceFormSpec, p, margin: float = 0.0) -> np.ndarray:
    """Validate a chart point; ``margin`` is the distance kept from the boundary."""
    p = as_vector(p, spec.dim)
    if spec.kind == "hyperbolic" and float(np.linalg.norm(p)) + margin >= 1.0:
        raise DomainError(f"point at radius {np.linalg.norm(p):.6g} (margin {margin:g}) leaves the unit-ball chart")
    return p


def metric_at(spec: SpaceFormSpec, p) -> tuple[np.ndarray, np.ndarray]:
    """Metric matrix and its coordinate derivatives ``dg[k, i, j]``."""
    p = check_point(spec, p)
    if spec.kind == "euclidean":
        d = spec.dim
        return np.eye(d), np.zeros((d, d, d))
    return _kernels.space_form_metric(p, spec.sigma, spec.scale)


def christoffel_at(spec: SpaceFormSpec, p) -> np.ndarray:
    g, dg = metric_at(spec, p)
    return _kernels.christoffel(np.linalg.inv(g), dg)


def factor_structure_at(spec: SpaceFormSpec, p) -> FactorStructure:
    g, dg = metric_at(spec, p)
    gamma = _kernels.christoffel(np.linalg.inv(g), dg)
    return FactorStructure(g=g, J=_kernels.complex_structure(spec.n), gamma=gamma, dg=dg)


def sample_point(spec: SpaceFormSpec, rng: np.random.Generator) -> np.ndarray:
    d = spec.dim
    if spec.kind == "hyperbolic":
        v = rng.normal(size=d)
        v /= np.linalg.norm(v)
        return HYPERBOLIC_RADIUS * rng.random() ** (1.0 / d) * v
    return rng.uniform(-PROJECTIVE_BOX, PROJECTIVE_BOX, size=d)


def _vectors(spec, *vs):
    return [as_vector(v, spec.dim) for v in vs]


def curvature_formula(spec: SpaceFormSpec, p, X, Y, Z) -> np.ndarray:
    """``R(X,Y)Z = 4c (X^Y + JX^JY + 2<X,JY> J) Z`` in chart components."""
    X, Y, Z = _vectors(spec, X, Y, Z)
    fs = factor_structure_at(spec, p)
    g, J = fs.g, fs.J
    if spec.c == 0.0:
        return np.zeros(spec.dim)
    out = wedge_apply(X, Y, Z, g) + wedge_apply(J @ X, J @ Y, Z, g) + 2.0 * inner(X, J @ Y, g) * (J @ Z)
    return 4.0 * spec.c * out


def riemann_tensor_fd(gamma_fn, x, step: float = fd.DEFAULT_STEP) -> np.ndarray:
    """Riemann tensor ``riem[l, k, i, j]`` from numerically differentiated Christoffel symbols."""
    dgamma = fd.partials(gamma_fn, x, step)
    return _kernels.riemann(gamma_fn(x), dgamma)


def contract(riem, X, Y, Z) -> np.ndarray:
    return np.einsum("lkij,i,j,k->l", riem, X, Y, Z)


def curvature_fd(spec: SpaceFormSpec, p, X, Y, Z, step: float = fd.DEFAULT_STEP) -> np.ndarray:
    """Independent curvature evaluation from the chart connection."""
    step = fd.check_step(step)
    X, Y, Z = _vectors(spec, X, Y, Z)
    p = check_point(spec, p, margin=2.0 * step)
    riem = riemann_tensor_fd(lambda x: christoffel_at(spec, x), p, step)
    return contract(riem, X, Y, Z)


def kahler_residual(spec: SpaceFormSpec, p, step: float = fd.DEFAULT_STEP) -> float:
    """max over coordinate fields X, Y of |nabla_X(JY) - J nabla_X Y|.

    J has constant components in the chart, so for coordinate fields this is
    ``Gamma(X, JY) - J Gamma(X, Y)``.
    """
    fd.check_step(step)
    p = check_point(spec, p, margin=2.0 * step)
    fs = factor_structure_at(spec, p)
    d = spec.dim
    worst = 0.0
    for i in range(d):
        G_i = fs.gamma[:, i, :]  # G_i @ Y = Gamma(e_i, Y)
        D = G_i @ fs.J - fs.J @ G_i
        for j in range(d):
            worst = max(worst, math.sqrt(max(inner(D[:, j], D[:, j], fs.g), 0.0)))
    return worst


def hol_sec_curvature(spec: SpaceFormSpec, p, X, curvature=curvature_formula) -> float:
    (X,) = _vectors(spec, X)
    g = factor_structure_at(spec, p).g
    J = _kernels.complex_structure(spec.n)
    JX = J @ X
    if math.sqrt(max(inner(X, X, g), 0.0)) < 1e-12:
        raise DegeneracyError("holomorphic sectional curvature needs a nonzero vector")
    den = inner(X, X, g) * inner(JX, JX, g) - inner(X, JX, g) ** 2
    num = inner(curvature(spec, p, X, JX, JX), X, g)
    return num / den
