"""Stock immersions and the CLI immersion grammar.

All constructors take the ambient real dimension ``d = 2n`` (default 4) and
return an :class:`Immersion` with closed-form Jacobians and Hessians.
"""
from __future__ import annotations

import itertools
import re

import numpy as np

from .errors import UsageError
from .hypersurface import Immersion

ANGLE_MARGIN = 0.3


def flat_slice(d: int = 4) -> Immersion:
    """E1: ``u -> (0, u_1, ..., u_{d-1})``, the slice x_1 = 0.

    Its normal is the first coordinate direction of factor 1, so the slice is
    F-invariant with h = 1; when factor 1 is flat it is totally geodesic.
    """
    m = d - 1
    jac = np.vstack([np.zeros((1, m)), np.eye(m)])
    domain = np.array([[-1.0, 1.0]] + [[-2.0, 2.0]] * (m - 1))
    return Immersion(
        name="e1",
        ambient_dim=d,
        map=lambda u: np.concatenate([[0.0], u]),
        jacobian=lambda u: jac,
        hessian=lambda u: np.zeros((d, m, m)),
        domain=domain,
    )


def factor2_hyperplane(d: int = 4) -> Immersion:
    """``u -> (u_1, ..., u_{d-1}, 0)``: the normal lies in factor 2 (h = -1)."""
    m = d - 1
    jac = np.vstack([np.eye(m), np.zeros((1, m))])
    return Immersion(
        name="factor2_hyperplane",
        ambient_dim=d,
        map=lambda u: np.concatenate([u, [0.0]]),
        jacobian=lambda u: jac,
        hessian=lambda u: np.zeros((d, m, m)),
        domain=np.array([[-1.0, 1.0]] * m),
    )


# Each hyperspherical coordinate is r times a product of one-variable factors
# (sin for earlier angles, cos for its own angle, 1 afterwards), so any mixed
# partial is the same product with the factors differentiated.
_SIN = (np.sin, np.cos, lambda t: -np.sin(t))
_COS = (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))


def _sphere_partial(r, u, orders):
    m = u.shape[0]
    x = np.empty(m + 1)
    for k in range(m + 1):
        val = r
        for i in range(m):
            o = orders[i]
            if i < k:
                val *= _SIN[o](u[i])
            elif i == k:
                val *= _COS[o](u[i])
            elif o:
                val = 0.0
        x[k] = val
    return x


def _sphere_map(r, u):
    return _sphere_partial(r, u, np.zeros(u.shape[0], dtype=int))


def _sphere_jac(r, u):
    m = u.shape[0]
    return np.column_stack([_sphere_partial(r, u, np.eye(m, dtype=int)[a]) for a in range(m)])


def _sphere_hess(r, u):
    m = u.shape[0]
    H = np.empty((m + 1, m, m))
    for a in range(m):
        for b in range(a, m):
            orders = np.zeros(m, dtype=int)
            orders[a] += 1
            orders[b] += 1
            H[:, a, b] = H[:, b, a] = _sphere_partial(r, u, orders)
    return H


def chart_sphere(r: float = 0.5, d: int = 4) -> Immersion:
    """E2: the coordinate sphere ``|x| = r`` in hyperspherical angles.

    With this angle order the orientation rule picks the inward normal
    (A = I/r on the round sphere in flat space).
    """
    if r <= 0:
        raise UsageError("sphere radius must be positive")
    m = d - 1
    a = ANGLE_MARGIN
    domain = np.array([[a, np.pi - a]] * (m - 1) + [[-np.pi + a, np.pi - a]])
    return Immersion(
        name="e2",
        ambient_dim=d,
        map=lambda u: _sphere_map(r, u),
        jacobian=lambda u: _sphere_jac(r, u),
        hessian=lambda u: _sphere_hess(r, u),
        domain=domain,
        params={"r": r},
    )


def random_graph(seed: int = 7, amp: float = 0.1, d: int = 4, half_width: float = 0.5) -> Immersion:
    """E3: the graph ``x_d = P(x_1, ..., x_{d-1})`` of a seeded random cubic."""
    m = d - 1
    exps = np.array([e for e in itertools.product(range(4), repeat=m) if sum(e) <= 3])
    coef = amp * np.random.default_rng(seed).normal(size=len(exps))

    def partial(u, orders):
        """Mixed partial of the cubic for per-variable derivative orders."""
        e = exps - orders[None, :]
        keep = np.all(e >= 0, axis=1)
        falling = np.ones(len(exps))
        for j in range(m):
            for t in range(orders[j]):
                falling *= exps[:, j] - t
        mono = np.prod(u[None, :] ** np.maximum(e, 0), axis=1)
        return float(coef[keep] @ (falling[keep] * mono[keep]))

    eye = np.eye(m, dtype=int)

    def jac(u):
        grad = [partial(u, eye[a]) for a in range(m)]
        return np.vstack([np.eye(m), np.array(grad)[None, :]])

    def hess(u):
        H = np.zeros((m + 1, m, m))
        for a in range(m):
            for b in range(a, m):
                H[m, a, b] = H[m, b, a] = partial(u, eye[a] + eye[b])
        return H

    return Immersion(
        name="e3",
        ambient_dim=d,
        map=lambda u: np.concatenate([u, [partial(u, np.zeros(m, dtype=int))]]),
        jacobian=jac,
        hessian=hess,
        domain=np.array([[-half_width, half_width]] * m),
        params={"seed": seed, "amp": amp},
    )


_IMM_RE = re.compile(r"(e1|e2|e3)(?:\((.*)\))?")


def parse_immersion(text: str, d: int = 4) -> Immersion:
    """Parse ``e1``, ``e2(r=0.5)`` or ``e3(seed=7,amp=0.1)``."""
    compact = re.sub(r"\s+", "", text)
    m = _IMM_RE.fullmatch(compact)
    if m is None:
        raise UsageError(f"cannot parse immersion {text!r}")
    name, args = m.groups()
    kwargs = {}
    if args:
        for item in args.split(","):
            key, sep, val = item.partition("=")
            if not sep:
                raise UsageError(f"bad immersion argument {item!r}")
            kwargs[key] = val
    allowed = {"e1": {}, "e2": {"r": float}, "e3": {"seed": int, "amp": float}}[name]
    try:
        typed = {k: allowed[k](v) for k, v in kwargs.items()}
    except KeyError as exc:
        raise UsageError(f"{name} has no parameter {exc.args[0]!r}") from None
    except ValueError as exc:
        raise UsageError(f"bad value in {text!r}: {exc}") from None
    if name == "e1":
        return flat_slice(d)
    if name == "e2":
        return chart_sphere(d=d, **typed)
    return random_graph(d=d, **typed)
