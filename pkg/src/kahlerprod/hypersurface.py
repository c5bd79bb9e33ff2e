"""Parametrized real hypersurfaces of a product of complex space forms.

An immersion maps parameters ``u`` (dimension ``m = 2n - 1``) to ambient chart
coordinates. At each point we build an induced-orthonormal tangent frame
``E`` (Gram-Schmidt of the coordinate frame), so every tangent quantity below
(shape operator, structure tensors, Codazzi values) is expressed in frame
components where the induced metric is the identity.

The unit normal is the g-dual of the cofactor vector of the coordinate frame,
which makes ``det[T | nu] > 0`` and keeps the orientation smooth in ``u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import fd, product
from .errors import DegeneracyError, DomainError, UsageError
from .linalg import gram_schmidt, op_distance
from .product import EPS, AmbientStructure, ProductPoint, ProductSpec

RANK_RTOL = 1e-8


@dataclass(frozen=True)
class Immersion:
    name: str
    ambient_dim: int
    map: Callable[[np.ndarray], np.ndarray]
    domain: np.ndarray  # (m, 2) parameter box
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    hessian: Callable[[np.ndarray], np.ndarray] | None = None
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    def coords(self, u) -> np.ndarray:
        return np.asarray(self.map(np.asarray(u, dtype=np.float64)), dtype=np.float64)

    def jac(self, u, step: float = fd.DEFAULT_STEP) -> np.ndarray:
        """Coordinate tangent frame, shape (2n, m)."""
        u = np.asarray(u, dtype=np.float64)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(u), dtype=np.float64)
        return fd.partials(self.coords, u, step).T

    def hess(self, u, step: float = fd.DEFAULT_STEP) -> np.ndarray:
        """Second partials ``H[k, a, b]``."""
        u = np.asarray(u, dtype=np.float64)
        if self.hessian is not None:
            return np.asarray(self.hessian(u), dtype=np.float64)
        # partials axis 0 is the derivative index b: (m, 2n, m) -> (2n, m, m)
        return np.transpose(fd.partials(lambda v: self.jac(v, step), u, step), (1, 2, 0))

    def contains(self, u, margin: float = 0.0) -> bool:
        u = np.asarray(u, dtype=np.float64)
        return bool(np.all(u >= self.domain[:, 0] + margin) and np.all(u <= self.domain[:, 1] - margin))

    def sample_u(self, rng: np.random.Generator, margin: float = 0.05) -> np.ndarray:
        lo, hi = self.domain[:, 0] + margin, self.domain[:, 1] - margin
        return lo + (hi - lo) * rng.random(self.dim)


@dataclass(frozen=True)
class HypersurfacePoint:
    u: np.ndarray
    q: ProductPoint
    tangent_basis: np.ndarray  # T, coordinate frame (2n, m)
    frame: np.ndarray  # E, induced-orthonormal frame (2n, m)
    to_param: np.ndarray  # P with E = T P
    nu: np.ndarray
    A: np.ndarray  # shape operator in frame components
    H: float
    amb: AmbientStructure

    @property
    def x(self) -> np.ndarray:
        return self.q.coords

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def to_frame(self, w) -> np.ndarray:
        """Frame components of the tangential part of an ambient vector."""
        return self.frame.T @ (self.amb.g @ w)

    def to_ambient(self, v) -> np.ndarray:
        return self.frame @ v


@dataclass(frozen=True)
class StructuralData:
    """Induced tensors in an orthonormal tangent frame (identity metric)."""

    phi: np.ndarray
    W: np.ndarray
    f: np.ndarray
    V: np.ndarray
    h: float

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    @property
    def L1(self) -> np.ndarray:
        return np.eye(self.dim) + EPS[0] * self.f

    @property
    def L2(self) -> np.ndarray:
        return np.eye(self.dim) + EPS[1] * self.f

    @property
    def L(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.L1, self.L2)


@dataclass(frozen=True)
class AdaptedFrame:
    W: np.ndarray
    e: tuple[np.ndarray, ...]
    phi_e: tuple[np.ndarray, ...]

    def matrix(self) -> np.ndarray:
        """Rows W, e_1..e_{n-1}, phi e_1..phi e_{n-1}."""
        return np.array([self.W, *self.e, *self.phi_e])


# -- normals and shape operator --------------------------------------------------


def unit_normal(T: np.ndarray, g: np.ndarray) -> np.ndarray:
    d, m = T.shape
    if m != d - 1:
        raise UsageError(f"tangent frame must be {d}x{d - 1}, got {T.shape}")
    sv = np.linalg.svd(T, compute_uv=False)
    if sv[-1] < RANK_RTOL * sv[0]:
        raise DegeneracyError(f"immersion is rank deficient (singular values {sv[0]:.3e}..{sv[-1]:.3e})")
    cof = np.empty(d)
    for i in range(d):
        cof[i] = (-1) ** (i + d - 1) * np.linalg.det(np.delete(T, i, axis=0))
    w = np.linalg.solve(g, cof)
    return w / math.sqrt(cof @ w)


def _frame_geometry(imm: Immersion, spec: ProductSpec, u, step: float):
    x = imm.coords(u)
    if x.shape[0] != spec.dim:
        raise UsageError(f"immersion {imm.name} lives in dimension {x.shape[0]}, model has {spec.dim}")
    product.check_point(spec, x)
    amb = product.ambient_structure_at(spec, x)
    T = imm.jac(u, step)
    nu = unit_normal(T, amb.g)
    return x, amb, T, nu


def _normal_at(imm, spec, u, step):
    return _frame_geometry(imm, spec, u, step)[3]


def _shape_columns(imm, spec, u, step, amb, T, nu) -> np.ndarray:
    """Columns ``A(d_a) = -nabla-bar_{d_a} nu`` as ambient vectors."""
    dnu = fd.partials(lambda v: _normal_at(imm, spec, v, step), u, step)  # (m, 2n)
    conn = np.einsum("kij,ia,j->ka", amb.gamma, T, nu)
    return -(dnu.T + conn)


def _check_u(imm: Immersion, u, step: float) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (imm.dim,):
        raise UsageError(f"parameter must have shape ({imm.dim},), got {u.shape}")
    if not imm.contains(u, 2.0 * step):
        raise DomainError(f"parameter {u} too close to the boundary of {imm.name}")
    return u


def point_data(imm: Immersion, spec: ProductSpec, u, step: float = fd.DEFAULT_STEP) -> HypersurfacePoint:
    step = fd.check_step(step)
    u = _check_u(imm, u, step)
    x, amb, T, nu = _frame_geometry(imm, spec, u, step)
    g = amb.g
    E = np.column_stack(gram_schmidt(list(T.T), g))
    G = T.T @ g @ T
    P = np.linalg.solve(G, T.T @ g @ E)
    D = _shape_columns(imm, spec, u, step, amb, T, nu)
    A = E.T @ g @ D @ P
    return HypersurfacePoint(
        u=u,
        q=ProductPoint.from_coords(spec, x),
        tangent_basis=T,
        frame=E,
        to_param=P,
        nu=nu,
        A=A,
        H=float(np.trace(A)) / A.shape[0],
        amb=amb,
    )


def second_fundamental_form(imm: Immersion, spec: ProductSpec, u, step: float = fd.DEFAULT_STEP) -> np.ndarray:
    """Shape operator from ``<nabla-bar_X Y, nu>`` on coordinate fields, in frame components.

    Uses second derivatives of the immersion instead of derivatives of the
    normal, so it is an independent route to ``A``.
    """
    pt = point_data(imm, spec, u, step)
    T, g, nu = pt.tangent_basis, pt.amb.g, pt.nu
    Hs = imm.hess(pt.u, step)
    acc = Hs + np.einsum("kij,ia,jb->kab", pt.amb.gamma, T, T)
    II = np.einsum("kab,k->ab", acc, g @ nu)
    G = T.T @ g @ T
    A_param = np.linalg.solve(G, II)
    P = pt.to_param
    return np.linalg.solve(P, A_param @ P)


def induced_structures(pt: HypersurfacePoint, amb: AmbientStructure | None = None) -> StructuralData:
    amb = pt.amb if amb is None else amb
    g, E, nu = amb.g, pt.frame, pt.nu
    Fnu = amb.F @ nu
    return StructuralData(
        phi=E.T @ g @ amb.J @ E,
        W=E.T @ g @ (-amb.J @ nu),
        f=E.T @ g @ amb.F @ E,
        V=E.T @ g @ Fnu,
        h=float(nu @ g @ Fnu),
    )


def adapted_frame(sd: StructuralData, seed=None, rtol: float = 1e-8) -> AdaptedFrame:
    """Orthonormal frame {W, e_j, phi e_j} built greedily from random vectors."""
    m = sd.dim
    if m % 2 == 0:
        raise UsageError("tangent dimension must be odd")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    basis = [sd.W / np.linalg.norm(sd.W)]
    es, pes = [], []
    for _ in range((m - 1) // 2):
        for _attempt in range(8):
            v = rng.normal(size=m)
            for _ in range(2):
                for b in basis:
                    v = v - (b @ v) * b
            nv = np.linalg.norm(v)
            if nv > 1e-3:
                break
        else:  # pragma: no cover - needs eight consecutive near-degenerate draws
            raise DegeneracyError("could not draw a vector orthogonal to the partial frame")
        e = v / nv
        pe = sd.phi @ e
        es.append(e)
        pes.append(pe)
        basis += [e, pe]
    frame = AdaptedFrame(W=basis[0], e=tuple(es), phi_e=tuple(pes))
    M = frame.matrix()
    if np.abs(M @ M.T - np.eye(m)).max() > rtol:
        raise DegeneracyError("adapted frame failed to orthonormalize")
    return frame


# -- covariant derivatives along the hypersurface -----------------------------------


def _shape_param(imm, spec, u, step):
    """Coordinate frame and shape operator in parameter components at ``u``.

    With a closed-form Hessian, A comes from <nabla-bar_{d_a} d_b, nu> and is
    exact to roundoff, so callers can differentiate it once more without
    stacking finite differences. Otherwise it falls back to -nabla-bar nu.
    """
    x, amb, T, nu = _frame_geometry(imm, spec, u, step)
    G = T.T @ amb.g @ T
    if imm.hessian is not None:
        acc = imm.hess(u) + np.einsum("kij,ia,jb->kab", amb.gamma, T, T)
        return T, np.linalg.solve(G, np.einsum("kab,k->ab", acc, amb.g @ nu))
    D = _shape_columns(imm, spec, u, step, amb, T, nu)
    return T, np.linalg.solve(G, T.T @ amb.g @ D)


def _nabla_bar_AY(imm, spec, pt, x_par, y_par, step):
    """Ambient derivative nabla-bar_X (A Y) with Y extended by constant parameter components."""

    def field_AY(v):
        T, A_par = _shape_param(imm, spec, v, step)
        return T @ (A_par @ y_par)

    d_field = fd.directional(field_AY, pt.u, x_par, step)
    here = field_AY(pt.u)
    return d_field + np.einsum("kij,i,j->k", pt.amb.gamma, pt.tangent_basis @ x_par, here)


def d_nabla_A_numeric(imm: Immersion, spec: ProductSpec, u, X, Y, step: float = fd.DEFAULT_STEP) -> np.ndarray:
    """``(nabla_X A) Y - (nabla_Y A) X`` in frame components.

    X and Y are frame components at ``u``. With X, Y extended by constant
    parameter components, [X, Y] = 0 and the A(nabla_X Y - nabla_Y X) terms
    cancel, leaving the tangential part of nabla-bar_X(AY) - nabla-bar_Y(AX).
    """
    pt = point_data(imm, spec, u, step)
    x_par = pt.to_param @ np.asarray(X, dtype=np.float64)
    y_par = pt.to_param @ np.asarray(Y, dtype=np.float64)
    diff = _nabla_bar_AY(imm, spec, pt, x_par, y_par, step) - _nabla_bar_AY(imm, spec, pt, y_par, x_par, step)
    return pt.to_frame(diff)


def mean_curvature_gradient(imm: Immersion, spec: ProductSpec, u, step: float = fd.DEFAULT_STEP) -> np.ndarray:
    """Numerical gradient of H in frame components."""
    pt = point_data(imm, spec, u, step)

    def H_at(v):
        T, A_par = _shape_param(imm, spec, v, step)
        return np.trace(A_par) / A_par.shape[0]

    dH = fd.partials(H_at, pt.u, step)
    T, g = pt.tangent_basis, pt.amb.g
    grad_par = np.linalg.solve(T.T @ g @ T, dH)
    return pt.to_frame(T @ grad_par)


def induced_christoffel(imm: Immersion, spec: ProductSpec, u, step: float = fd.DEFAULT_STEP) -> np.ndarray:
    """Christoffel symbols of the induced metric in parameter coordinates.

    Tangential projection of nabla-bar_{d_a} d_b, i.e. the Levi-Civita
    connection of the induced metric; no shape-operator data is used.
    """
    u = np.asarray(u, dtype=np.float64)
    x = imm.coords(u)
    amb = product.ambient_structure_at(spec, x)
    T = imm.jac(u, step)
    acc = imm.hess(u, step) + np.einsum("kij,ia,jb->kab", amb.gamma, T, T)
    Ginv = np.linalg.inv(T.T @ amb.g @ T)
    return np.einsum("xa,ka,kl,lbc->xbc", Ginv, T, amb.g, acc)


def intrinsic_curvature_fd(imm: Immersion, spec: ProductSpec, u, X, Y, Z, step: float = fd.DEFAULT_STEP) -> np.ndarray:
    """R(X,Y)Z of the induced metric by differentiating the induced Christoffel symbols."""
    from .spaceforms import contract, riemann_tensor_fd

    pt = point_data(imm, spec, u, step)
    riem = riemann_tensor_fd(lambda v: induced_christoffel(imm, spec, v, step), pt.u, step)
    P = pt.to_param
    X, Y, Z = (P @ np.asarray(v, dtype=np.float64) for v in (X, Y, Z))
    return pt.to_frame(pt.tangent_basis @ contract(riem, X, Y, Z))


def gauss_definition_rhs(pt: HypersurfacePoint, spec: ProductSpec, X, Y, Z) -> np.ndarray:
    """tan(Rbar(X,Y)Z) + (AX ^ AY)Z in frame components."""
    X, Y, Z = (np.asarray(v, dtype=np.float64) for v in (X, Y, Z))
    Rbar = product.curvature_product_formula(
        spec, pt.q, pt.to_ambient(X), pt.to_ambient(Y), pt.to_ambient(Z), amb=pt.amb
    )
    AX, AY = pt.A @ X, pt.A @ Y
    return pt.to_frame(Rbar) + (AY @ Z) * AX - (AX @ Z) * AY


def umbilicity_deviation(pt: HypersurfacePoint) -> float:
    m = pt.dim
    return op_distance(pt.A, pt.H * np.eye(m), np.eye(m))


@dataclass(frozen=True)
class FInvarianceReport:
    samples: int
    max_V: float
    max_f2_dev: float
    tol: float
    f_invariant: bool
    f2_identity: bool

    @property
    def agree(self) -> bool:
        return self.f_invariant == self.f2_identity


def classify_F_invariance(imm: Immersion, spec: ProductSpec, samples, tol: float = 1e-8,
                          step: float = fd.DEFAULT_STEP) -> FInvarianceReport:
    """``samples``: an iterable of parameter vectors, or an int (seeded draws)."""
    if isinstance(samples, int):
        if samples < 1:
            raise UsageError("need at least one sample")
        rng = np.random.default_rng(0)
        samples = [imm.sample_u(rng) for _ in range(samples)]
    samples = list(samples)
    if not samples:
        raise UsageError("need at least one sample")
    max_V = max_f2 = 0.0
    for u in samples:
        sd = induced_structures(point_data(imm, spec, u, step))
        max_V = max(max_V, float(np.linalg.norm(sd.V)))
        max_f2 = max(max_f2, float(np.linalg.norm(sd.f @ sd.f - np.eye(sd.dim))))
    return FInvarianceReport(
        samples=len(samples), max_V=max_V, max_f2_dev=max_f2, tol=tol,
        f_invariant=max_V <= tol, f2_identity=max_f2 <= tol,
    )
