"""Inner-loop kernels: chart metrics, Christoffel symbols, Riemann tensors.

Each kernel exists twice: a pure-numpy version (``*_numpy``) and an explicit
loop version compiled with numba (``*_numba``). The public names pick one at
import time. Set ``KAHLERPROD_NO_JIT=1`` to force the numpy path; it is also
used when numba is not installed.

Index conventions:
    dg[k, i, j]        = d_k g_ij
    gamma[k, i, j]     = Gamma^k_ij
    dgamma[m, k, i, j] = d_m Gamma^k_ij
    riem[l, k, i, j]   = (R(d_i, d_j) d_k)^l,  R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("KAHLERPROD_NO_JIT", "0") not in ("1", "true", "yes")


def _njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


def complex_structure(n: int) -> np.ndarray:
    """Multiplication by i in real coordinates (x1, y1, ..., xn, yn)."""
    J = np.zeros((2 * n, 2 * n))
    for a in range(n):
        J[2 * a + 1, 2 * a] = 1.0
        J[2 * a, 2 * a + 1] = -1.0
    return J


# ---------------------------------------------------------------------------
# chart metric of a complex space form
#
#   g = scale * (s I - sigma (p p^T + Jp Jp^T)) / s^2,   s = 1 + sigma |p|^2
#
# sigma = +1: Fubini-Study (inhomogeneous chart), sigma = -1: unit-ball model,
# sigma = 0: flat. With scale = 1 the holomorphic sectional curvature is 4 sigma.
# ---------------------------------------------------------------------------


def space_form_metric_numpy(p, sigma, scale):
    p = np.asarray(p, dtype=np.float64)
    d = p.shape[0]
    J = complex_structure(d // 2)
    jp = J @ p
    s = 1.0 + sigma * (p @ p)
    eye = np.eye(d)
    P = np.outer(p, p) + np.outer(jp, jp)
    M = s * eye - sigma * P
    g = scale * M / s**2
    ds = 2.0 * sigma * p
    # dP[k] = e_k p^T + p e_k^T + (J e_k)(Jp)^T + Jp (J e_k)^T
    dP = (
        np.einsum("ki,j->kij", eye, p)
        + np.einsum("i,kj->kij", p, eye)
        + np.einsum("ik,j->kij", J, jp)
        + np.einsum("i,jk->kij", jp, J)
    )
    dM = ds[:, None, None] * eye[None] - sigma * dP
    dg = scale * (dM / s**2 - 2.0 * M[None] * ds[:, None, None] / s**3)
    return g, dg


@_njit
def space_form_metric_numba(p, sigma, scale):
    d = p.shape[0]
    jp = np.empty(d)
    for a in range(d // 2):
        jp[2 * a] = -p[2 * a + 1]
        jp[2 * a + 1] = p[2 * a]
    r2 = 0.0
    for i in range(d):
        r2 += p[i] * p[i]
    s = 1.0 + sigma * r2
    g = np.empty((d, d))
    dg = np.empty((d, d, d))
    M = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            M[i, j] = -sigma * (p[i] * p[j] + jp[i] * jp[j])
        M[i, i] += s
    for i in range(d):
        for j in range(d):
            g[i, j] = scale * M[i, j] / (s * s)
    for k in range(d):
        # column k of J: J e_k
        je = np.zeros(d)
        if k % 2 == 0:
            je[k + 1] = 1.0
        else:
            je[k - 1] = -1.0
        dsk = 2.0 * sigma * p[k]
        for i in range(d):
            for j in range(d):
                dp = je[i] * jp[j] + jp[i] * je[j]
                if i == k:
                    dp += p[j]
                if j == k:
                    dp += p[i]
                dm = -sigma * dp
                if i == j:
                    dm += dsk
                dg[k, i, j] = scale * (dm / (s * s) - 2.0 * M[i, j] * dsk / (s * s * s))
    return g, dg


# ---------------------------------------------------------------------------
# Christoffel symbols
# ---------------------------------------------------------------------------


def christoffel_numpy(ginv, dg):
    # lowered[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    lowered = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
    return np.einsum("kl,lij->kij", ginv, lowered)


@_njit
def christoffel_numba(ginv, dg):
    d = ginv.shape[0]
    out = np.zeros((d, d, d))
    for i in range(d):
        for j in range(i, d):
            for l in range(d):
                low = 0.5 * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                if low == 0.0:
                    continue
                for k in range(d):
                    out[k, i, j] += ginv[k, l] * low
            if j != i:
                for k in range(d):
                    out[k, j, i] = out[k, i, j]
    return out


# ---------------------------------------------------------------------------
# Riemann tensor from Gamma and its first derivatives
# ---------------------------------------------------------------------------


def riemann_numpy(gamma, dgamma):
    # R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
    deriv = np.einsum("iljk->lkij", dgamma) - np.einsum("jlik->lkij", dgamma)
    quad = np.einsum("lim,mjk->lkij", gamma, gamma)
    return deriv + quad - np.einsum("lkij->lkji", quad)


@_njit
def riemann_numba(gamma, dgamma):
    d = gamma.shape[0]
    out = np.empty((d, d, d, d))
    for l in range(d):
        for k in range(d):
            for i in range(d):
                for j in range(d):
                    acc = dgamma[i, l, j, k] - dgamma[j, l, i, k]
                    for m in range(d):
                        acc += gamma[l, i, m] * gamma[m, j, k] - gamma[l, j, m] * gamma[m, i, k]
                    out[l, k, i, j] = acc
    return out


if USE_NUMBA:
    space_form_metric = space_form_metric_numba
    christoffel = christoffel_numba
    riemann = riemann_numba
else:
    space_form_metric = space_form_metric_numpy
    christoffel = christoffel_numpy
    riemann = riemann_numpy


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
