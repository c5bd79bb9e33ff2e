"""Riemannian product of two complex space forms.

Coordinates are ordered factor 1 first, then factor 2. ``F = pi_1 - pi_2`` is
the product structure and ``Lbar_i = I + eps_i F`` with ``eps = (1, -1)``, so
``Lbar_i / 2`` projects onto factor i.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels, fd, spaceforms
from .errors import UsageError
from .linalg import as_vector, inner, wedge_apply
from .spaceforms import SpaceFormSpec

EPS = (1.0, -1.0)


@dataclass(frozen=True)
class ProductSpec:
    factor1: SpaceFormSpec
    factor2: SpaceFormSpec

    @property
    def eps(self) -> tuple[float, float]:
        return EPS

    @property
    def factors(self) -> tuple[SpaceFormSpec, SpaceFormSpec]:
        return (self.factor1, self.factor2)

    @property
    def n1(self) -> int:
        return self.factor1.n

    @property
    def n2(self) -> int:
        return self.factor2.n

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def c(self) -> tuple[float, float]:
        return (self.factor1.c, self.factor2.c)

    @property
    def label(self) -> str:
        return f"{self.factor1.label}x{self.factor2.label}"


@dataclass(frozen=True)
class ProductPoint:
    p1: np.ndarray
    p2: np.ndarray

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([self.p1, self.p2])

    @classmethod
    def from_coords(cls, spec: ProductSpec, x) -> "ProductPoint":
        x = as_vector(x, spec.dim)
        d1 = spec.factor1.dim
        return cls(x[:d1].copy(), x[d1:].copy())


@dataclass(frozen=True)
class AmbientStructure:
    g: np.ndarray
    J: np.ndarray
    F: np.ndarray
    Lbar1: np.ndarray
    Lbar2: np.ndarray
    gamma: np.ndarray

    @property
    def Lbar(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.Lbar1, self.Lbar2)


# -- model-spec grammar: kind(n, c=value) x kind(n, c=value) -------------------

_FACTOR_RE = re.compile(r"(eu|cp|ch)\((\d+)(?:,c=([^()]+))?\)")


def _parse_number(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise UsageError(f"cannot parse number {text!r}") from None


def parse_factor(text: str) -> SpaceFormSpec:
    m = _FACTOR_RE.fullmatch(text)
    if m is None:
        raise UsageError(f"cannot parse space form {text!r}; expected e.g. cp(1,c=0.0625)")
    short, n, c = m.groups()
    kind = spaceforms.SHORT_NAMES[short]
    if c is None:
        if kind != "euclidean":
            raise UsageError(f"{short}(...) needs a curvature parameter c=")
        cval = 0.0
    else:
        cval = _parse_number(c)
    return SpaceFormSpec(kind, int(n), cval)


def parse_model(text: str) -> ProductSpec:
    """Parse e.g. ``cp(1,c=0.0625) x eu(1)``; whitespace is ignored."""
    compact = re.sub(r"\s+", "", text)
    # split on the single top-level 'x' between the two closing/opening parens
    m = re.fullmatch(r"(.+\))x((?:eu|cp|ch)\(.*)", compact)
    if m is None:
        raise UsageError(f"cannot parse model {text!r}; expected kind(n,c=..)xkind(n,c=..)")
    return ProductSpec(parse_factor(m.group(1)), parse_factor(m.group(2)))


# -- ambient structure ---------------------------------------------------------


def _coords(spec: ProductSpec, q) -> np.ndarray:
    if isinstance(q, ProductPoint):
        q = q.coords
    return as_vector(q, spec.dim)


def check_point(spec: ProductSpec, q, margin: float = 0.0) -> np.ndarray:
    x = _coords(spec, q)
    d1 = spec.factor1.dim
    spaceforms.check_point(spec.factor1, x[:d1], margin)
    spaceforms.check_point(spec.factor2, x[d1:], margin)
    return x


def product_operator(spec: ProductSpec) -> np.ndarray:
    d1, d2 = spec.factor1.dim, spec.factor2.dim
    return np.diag(np.concatenate([np.ones(d1), -np.ones(d2)]))


def metric_at(spec: ProductSpec, q) -> tuple[np.ndarray, np.ndarray]:
    x = check_point(spec, q)
    d1, d = spec.factor1.dim, spec.dim
    g1, dg1 = spaceforms.metric_at(spec.factor1, x[:d1])
    g2, dg2 = spaceforms.metric_at(spec.factor2, x[d1:])
    g = np.zeros((d, d))
    dg = np.zeros((d, d, d))
    g[:d1, :d1], g[d1:, d1:] = g1, g2
    dg[:d1, :d1, :d1], dg[d1:, d1:, d1:] = dg1, dg2
    return g, dg


def christoffel_at(spec: ProductSpec, q) -> np.ndarray:
    g, dg = metric_at(spec, q)
    return _kernels.christoffel(np.linalg.inv(g), dg)


def ambient_structure_at(spec: ProductSpec, q) -> AmbientStructure:
    g, dg = metric_at(spec, q)
    gamma = _kernels.christoffel(np.linalg.inv(g), dg)
    J = _kernels.complex_structure(spec.n)
    F = product_operator(spec)
    eye = np.eye(spec.dim)
    return AmbientStructure(
        g=g, J=J, F=F, Lbar1=eye + EPS[0] * F, Lbar2=eye + EPS[1] * F, gamma=gamma
    )


def sample_point(spec: ProductSpec, rng: np.random.Generator) -> np.ndarray:
    return np.concatenate([spaceforms.sample_point(f, rng) for f in spec.factors])


# -- curvature -----------------------------------------------------------------


def curvature_product_formula(spec: ProductSpec, q, X, Y, Z, amb: AmbientStructure | None = None) -> np.ndarray:
    """sum_i c_i/2 [Lb X ^ Lb Y + J Lb X ^ J Lb Y + 2 <Lb X, J Lb Y> J] Lb Z."""
    d = spec.dim
    X, Y, Z = (as_vector(v, d) for v in (X, Y, Z))
    if amb is None:
        amb = ambient_structure_at(spec, q)
    g, J = amb.g, amb.J
    out = np.zeros(d)
    for ci, Lb in zip(spec.c, amb.Lbar):
        if ci == 0.0:
            continue
        lx, ly, lz = Lb @ X, Lb @ Y, Lb @ Z
        term = wedge_apply(lx, ly, lz, g) + wedge_apply(J @ lx, J @ ly, lz, g)
        term += 2.0 * inner(lx, J @ ly, g) * (J @ lz)
        out += 0.5 * ci * term
    return out


def curvature_block_sum(spec: ProductSpec, q, X, Y, Z) -> np.ndarray:
    """R_1(X_1, Y_1) Z_1 + R_2(X_2, Y_2) Z_2 from the factor formulas."""
    x = check_point(spec, q)
    d, d1 = spec.dim, spec.factor1.dim
    X, Y, Z = (as_vector(v, d) for v in (X, Y, Z))
    r1 = spaceforms.curvature_formula(spec.factor1, x[:d1], X[:d1], Y[:d1], Z[:d1])
    r2 = spaceforms.curvature_formula(spec.factor2, x[d1:], X[d1:], Y[d1:], Z[d1:])
    return np.concatenate([r1, r2])


def curvature_fd(spec: ProductSpec, q, X, Y, Z, step: float = fd.DEFAULT_STEP) -> np.ndarray:
    """Riemann tensor of the block metric by differentiating its Christoffel symbols."""
    step = fd.check_step(step)
    x = check_point(spec, q, margin=2.0 * step)
    d = spec.dim
    X, Y, Z = (as_vector(v, d) for v in (X, Y, Z))
    riem = spaceforms.riemann_tensor_fd(lambda y: christoffel_at(spec, y), x, step)
    return spaceforms.contract(riem, X, Y, Z)
