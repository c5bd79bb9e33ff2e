"""Direct evaluators for the hypersurface identities, plus a data synthesizer.

All tangent vectors are components in an orthonormal tangent frame, so the
metric is the identity and ``<a, b>`` is ``a @ b``. A :class:`StructuralSample`
bundles the induced tensors (phi, W, f, V, h) with the curvature parameters
``c = (c1, c2)``; ``eps = (1, -1)`` throughout.

Frame-expansion evaluators take frame indices starting at 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import UsageError
from .hypersurface import AdaptedFrame, HypersurfacePoint, StructuralData, induced_structures
from .product import EPS


@dataclass(frozen=True)
class StructuralSample:
    sd: StructuralData
    c1: float
    c2: float
    # linear model the sample was cut from (None for immersed points)
    nu: np.ndarray | None = None
    basis: np.ndarray | None = None
    n1: int | None = None
    n2: int | None = None

    @property
    def dim(self) -> int:
        return self.sd.dim

    @property
    def metric(self) -> np.ndarray:
        return np.eye(self.dim)

    @property
    def c(self) -> tuple[float, float]:
        return (self.c1, self.c2)

    @property
    def eps(self) -> tuple[float, float]:
        return EPS


def _wedge(X, Y, Z):
    return (Y @ Z) * X - (X @ Z) * Y


def _terms(ss: StructuralSample):
    """(c_i, eps_i, L_i) for both factors."""
    return zip(ss.c, EPS, ss.sd.L)


# -- synthesis ------------------------------------------------------------------------


def product_model(n1: int, n2: int) -> tuple[np.ndarray, np.ndarray]:
    J = _kernels.complex_structure(n1 + n2)
    F = np.diag(np.concatenate([np.ones(2 * n1), -np.ones(2 * n2)]))
    return J, F


def synth_structural(seed, n1: int, n2: int, c1: float | None = None, c2: float | None = None,
                     nu=None) -> StructuralSample:
    """Cut admissible structural data out of the flat model R^{2n} with J and F.

    A unit normal ``nu`` (random unless given) fixes the tangent space; phi, f,
    W, V, h are the tangential/normal parts of J and F there, so every
    structure identity holds to roundoff. Unspecified ``c1``/``c2`` are drawn
    uniformly from [-1, 1].
    """
    if n1 < 1 or n2 < 1:
        raise UsageError("both factors need complex dimension >= 1")
    rng = np.random.default_rng(seed)
    N = 2 * (n1 + n2)
    J, F = product_model(n1, n2)
    if nu is None:
        nu = rng.normal(size=N)
    nu = np.asarray(nu, dtype=np.float64)
    if nu.shape != (N,):
        raise UsageError(f"normal must have dimension {N}")
    nu = nu / np.linalg.norm(nu)
    Q, _ = np.linalg.qr(np.column_stack([nu, rng.normal(size=(N, N - 1))]))
    B = Q[:, 1:]
    B -= np.outer(nu, nu @ B)  # remove roundoff leakage along nu
    Q2, _ = np.linalg.qr(B)
    B = Q2
    c1 = float(rng.uniform(-1, 1)) if c1 is None else float(c1)
    c2 = float(rng.uniform(-1, 1)) if c2 is None else float(c2)
    sd = StructuralData(
        phi=B.T @ J @ B,
        W=B.T @ (-J @ nu),
        f=B.T @ F @ B,
        V=B.T @ F @ nu,
        h=float(nu @ F @ nu),
    )
    return StructuralSample(sd=sd, c1=c1, c2=c2, nu=nu, basis=B, n1=n1, n2=n2)


def sample_from_point(pt: HypersurfacePoint, c: tuple[float, float]) -> StructuralSample:
    return StructuralSample(sd=induced_structures(pt), c1=float(c[0]), c2=float(c[1]))


# -- structure identities ---------------------------------------------------------------


def structure_residuals(sd: StructuralData, frame: AdaptedFrame | None = None) -> dict[str, float]:
    """Max-abs residual of every pointwise structure identity."""
    phi, W, f, V, h = sd.phi, sd.W, sd.f, sd.V, sd.h
    I = np.eye(sd.dim)

    def mx(a):
        return float(np.max(np.abs(a)))

    out = {
        "V_perp_W": abs(float(V @ W)),
        "phi_squared": mx(phi @ phi + I - np.outer(W, W)),
        "W_unit": abs(float(W @ W) - 1.0),
        "phi_W_zero": mx(phi @ W),
        "phi_skew": mx(phi + phi.T),
        "f_symmetric": mx(f - f.T),
        "f_V": mx(f @ V + h * V),
        "h2_plus_V2": abs(h * h + float(V @ V) - 1.0),
        "f_phi_commutator": mx(f @ phi + np.outer(V, W) - phi @ f + np.outer(W, V)),
        "f_W": mx(f @ W - h * W + phi @ V),
        "f_squared": mx(f @ f - I + np.outer(V, V)),
        "f_isometry_defect": mx(f.T @ f - I + np.outer(V, V)),
    }
    for i, (eps, L) in enumerate(zip(EPS, sd.L), start=1):
        LW = L @ W
        out[f"L{i}_phi_L{i}_W"] = mx(L @ phi @ LW - (eps - h) * V)
        out[f"L{i}W_dot_W"] = abs(float(LW @ W) - (1.0 + eps * h))
        out[f"L{i}_V"] = mx(L @ V - (1.0 - eps * h) * V)
        out[f"V_dot_L{i}W"] = abs(float(V @ LW))
        if frame is not None:
            r15 = [abs(float(LW @ pe) + eps * float(V @ e)) for e, pe in zip(frame.e, frame.phi_e)]
            r16 = [abs(float(LW @ e) - eps * float(V @ pe)) for e, pe in zip(frame.e, frame.phi_e)]
            out[f"L{i}W_dot_phi_e"] = max(r15, default=0.0)
            out[f"L{i}W_dot_e"] = max(r16, default=0.0)
    return out


# -- Codazzi -----------------------------------------------------------------------------


def codazzi_rhs(ss: StructuralSample, Y, X) -> np.ndarray:
    """d A(Y, X) = (nabla_X A) Y - (nabla_Y A) X as the closed-form sum over factors."""
    sd = ss.sd
    Y = np.asarray(Y, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (sd.dim,) or Y.shape != (sd.dim,):
        raise UsageError(f"tangent vectors must have dimension {sd.dim}")
    out = np.zeros(sd.dim)
    for c, eps, L in _terms(ss):
        LW = L @ sd.W
        yxV = _wedge(Y, X, sd.V)
        LphiL = L @ sd.phi @ L
        term = 2.0 * eps * (L @ yxV) + LphiL @ _wedge(Y, X, LW)
        term += (3.0 * eps * float(yxV @ LW) + 2.0 * float(X @ (LphiL @ Y))) * LW
        out += 0.5 * c * term
    return out


def eq20_rhs(ss: StructuralSample, X) -> np.ndarray:
    """Codazzi operator on planes containing W: d A(W, X)."""
    sd = ss.sd
    X = np.asarray(X, dtype=np.float64)
    h, V = sd.h, sd.V
    out = np.zeros(sd.dim)
    for c, eps, L in _terms(ss):
        LW = L @ sd.W
        term = (7.0 * eps + h) * float(X @ V) * LW + float(X @ LW) * (eps - h) * V
        term -= (1.0 + eps * h) * (L @ sd.phi @ L @ X)
        out += 0.5 * c * term
    return out


def dA_WV_formula(ss: StructuralSample) -> tuple[np.ndarray, float]:
    """sum_i 4 c_i (1 - h^2) [(eps_i + h) W - phi V], and its norm."""
    sd = ss.sd
    out = np.zeros(sd.dim)
    for c, eps in zip(ss.c, EPS):
        out += 4.0 * c * (1.0 - sd.h**2) * ((eps + sd.h) * sd.W - sd.phi @ sd.V)
    return out, float(np.linalg.norm(out))


def obstruction_system(h: float) -> tuple[float, int]:
    """Determinant and nullity of {sum c_i (eps_i + h) = 0, c_1 + c_2 = 0}."""
    M = np.array([[EPS[0] + h, EPS[1] + h], [1.0, 1.0]])
    sv = np.linalg.svd(M, compute_uv=False)
    nullity = int(np.sum(sv <= 1e-12 * max(sv[0], 1.0)))
    return float(np.linalg.det(M)), nullity


# -- adapted-frame expansions --------------------------------------------------------------

LEMMA1_DISPLAYS = ("We", "Wphie", "ephie")


def frame_components(v, frame: AdaptedFrame) -> np.ndarray:
    """Components of ``v`` along (W, e_1.., phi e_1..)."""
    return frame.matrix() @ np.asarray(v, dtype=np.float64)


def _display_We(ss, frame, j, reading):
    sd = ss.sd
    V, h, phi = sd.V, sd.h, sd.phi
    e, pe = frame.e, frame.phi_e
    out = np.zeros(sd.dim)
    for c, eps, L in _terms(ss):
        LphiL = L @ phi @ L
        out += 4.0 * c * (eps + h) * float(e[j] @ V) * frame.W
        for k in range(len(e)):
            ce = ((7 + eps * h) * (e[j] @ V) * (V @ pe[k])
                  + (1 - eps * h) * (pe[j] @ V) * (V @ e[k])
                  - (1 + eps * h) * ((LphiL @ e[j]) @ e[k]))
            # the literal expansion has <phi V, e_k> here; the Codazzi sum needs <V, phi e_k>
            mid = (phi @ V) @ e[k] if reading == "literal" else V @ pe[k]
            cpe = (-(7 + eps * h) * (e[j] @ V) * (V @ e[k])
                   + (1 - eps * h) * (pe[j] @ V) * mid
                   + (1 + eps * h) * ((phi @ LphiL @ e[j]) @ e[k]))
            out += 0.5 * c * (ce * e[k] + cpe * pe[k])
    return out


def _display_Wphie(ss, frame, j):
    sd = ss.sd
    V, h, phi = sd.V, sd.h, sd.phi
    e, pe = frame.e, frame.phi_e
    out = np.zeros(sd.dim)
    for c, eps, L in _terms(ss):
        LphiL = L @ phi @ L
        out += 4.0 * c * (eps + h) * float(V @ pe[j]) * frame.W
        for k in range(len(e)):
            ce = ((7 + eps * h) * (V @ pe[j]) * (V @ pe[k])
                  - (1 - eps * h) * (V @ e[j]) * (V @ e[k])
                  - (1 + eps * h) * ((LphiL @ pe[j]) @ e[k]))
            cpe = (-(7 + eps * h) * (pe[j] @ V) * (V @ e[k])
                   - (1 - eps * h) * (e[j] @ V) * (V @ pe[k])
                   - (1 + eps * h) * ((LphiL @ pe[j]) @ pe[k]))
            out += 0.5 * c * (ce * e[k] + cpe * pe[k])
    return out


def _display_ephie(ss, frame, j, l):
    sd = ss.sd
    V, h, phi = sd.V, sd.h, sd.phi
    e, pe = frame.e, frame.phi_e
    out = np.zeros(sd.dim)
    for c, eps, L in _terms(ss):
        LphiL = L @ phi @ L
        T = LphiL @ pe[l]
        quad = (V @ pe[l]) * (V @ pe[j]) + (V @ e[l]) * (V @ e[j])
        out += c * ((3 + eps * h) * quad - (1 + eps * h) * (T @ e[j])) * frame.W
        common = 3.0 * quad - 2.0 * (T @ e[j])
        for k in range(len(e)):
            for target, sign, vk in ((e[k], 1.0, V @ pe[k]), (pe[k], -1.0, V @ e[k])):
                coef = (2 * eps * ((V @ pe[l]) * ((L @ e[j]) @ target) - (V @ e[j]) * ((L @ pe[l]) @ target))
                        - eps * ((V @ e[l]) * ((LphiL @ e[j]) @ target) + (V @ pe[j]) * (T @ target))
                        + sign * eps * vk * common)
                out += 0.5 * c * coef * target
    return out


def lemma1_rhs(ss: StructuralSample, frame: AdaptedFrame, which: str, j: int, l: int | None = None,
               reading: str = "literal") -> np.ndarray:
    """Adapted-frame expansion of d A(W, e_j), d A(W, phi e_j) or d A(e_j, phi e_l).

    ``reading="literal"`` evaluates the expansions term by term as stated;
    ``"corrected"`` replaces <phi V, e_k> by <V, phi e_k> in the phi e_k
    coefficient of d A(W, e_j), the one place where the literal expansion
    disagrees with the Codazzi sum.
    """
    m = len(frame.e)
    if which not in LEMMA1_DISPLAYS:
        raise UsageError(f"unknown display {which!r}; choose from {LEMMA1_DISPLAYS}")
    if reading not in ("literal", "corrected"):
        raise UsageError(f"unknown reading {reading!r}")
    if not 0 <= j < m:
        raise UsageError(f"index j={j} out of range 0..{m - 1}")
    if which == "We":
        return _display_We(ss, frame, j, reading)
    if which == "Wphie":
        return _display_Wphie(ss, frame, j)
    if l is None or not 0 <= l < m:
        raise UsageError(f"index l={l} out of range 0..{m - 1}")
    return _display_ephie(ss, frame, j, l)


def lemma1_oracle(ss: StructuralSample, frame: AdaptedFrame, which: str, j: int, l: int | None = None) -> np.ndarray:
    """The same quantity straight from :func:`codazzi_rhs`."""
    if which == "We":
        return codazzi_rhs(ss, frame.W, frame.e[j])
    if which == "Wphie":
        return codazzi_rhs(ss, frame.W, frame.phi_e[j])
    return codazzi_rhs(ss, frame.e[j], frame.phi_e[l])


# -- umbilical consequences -------------------------------------------------------------------


def lambda_e_derivative(ss: StructuralSample, frame: AdaptedFrame, j: int) -> float:
    return sum(4.0 * c * (eps + ss.sd.h) for c, eps in zip(ss.c, EPS)) * float(ss.sd.V @ frame.e[j])


def lambda_phie_derivative(ss: StructuralSample, frame: AdaptedFrame, j: int) -> float:
    return sum(4.0 * c * (eps + ss.sd.h) for c, eps in zip(ss.c, EPS)) * float(ss.sd.V @ frame.phi_e[j])


def umbilic_e_coefficient(ss: StructuralSample, frame: AdaptedFrame, j: int, k: int) -> float:
    sd = ss.sd
    V, h, phi = sd.V, sd.h, sd.phi
    e, pe = frame.e, frame.phi_e
    total = 0.0
    for c, eps, L in _terms(ss):
        total += 0.5 * c * ((7 + eps * h) * (e[j] @ V) * (V @ pe[k])
                            + (1 - eps * h) * (pe[j] @ V) * (V @ e[k])
                            - (1 + eps * h) * ((L @ phi @ L @ e[j]) @ e[k]))
    return float(total)


def umbilic_phie_coefficient(ss: StructuralSample, frame: AdaptedFrame, j: int, k: int) -> float:
    sd = ss.sd
    V, h, phi = sd.V, sd.h, sd.phi
    e, pe = frame.e, frame.phi_e
    total = 0.0
    for c, eps, L in _terms(ss):
        total += 0.5 * c * (-(7 + eps * h) * (pe[j] @ V) * (V @ e[k])
                            - (1 - eps * h) * (e[j] @ V) * (V @ pe[k])
                            + (1 + eps * h) * ((phi @ L @ phi @ L @ pe[j]) @ e[k]))
    return float(total)


def lemma2_cancellation(ss: StructuralSample, frame: AdaptedFrame, j: int) -> float:
    """|RHS_4(j, j) + RHS_6(j, j)|; the trace terms are evaluated, not dropped."""
    if not 0 <= j < len(frame.e):
        raise UsageError(f"index j={j} out of range")
    return abs(umbilic_e_coefficient(ss, frame, j, j) + umbilic_phie_coefficient(ss, frame, j, j))


def gradH_formula(ss: StructuralSample) -> np.ndarray:
    """4 (sum_i c_i (eps_i + h)) V."""
    return 4.0 * sum(c * (eps + ss.sd.h) for c, eps in zip(ss.c, EPS)) * ss.sd.V


# -- Gauss -----------------------------------------------------------------------------------


def _gauss_sum(ss, X, Y, Z, with_eps):
    sd = ss.sd
    V, W, phi = sd.V, sd.W, sd.phi
    out = np.zeros(sd.dim)
    for c, eps, L in _terms(ss):
        e = eps if with_eps else 1.0
        LX, LY, LZ = L @ X, L @ Y, L @ Z
        pLX, pLY = phi @ LX, phi @ LY
        vx, vy, vz = V @ X, V @ Y, V @ Z
        t = _wedge(LX, LY, LZ) + _wedge(pLX, pLY, LZ)
        t += vz * (vy * LX - vx * LY + e * ((LY @ W) * (pLX - e * vx * W) - (LX @ W) * (pLY - e * vy * W)))
        t += e * _wedge(vx * pLY - vy * pLX, W, LZ)
        t += 2.0 * ((LX @ (pLY - e * vy * W)) + eps * (LY @ W) * vx) * (phi @ LZ - e * vz * W)
        out += 0.5 * c * t
    return out


def gauss_rhs_expansion(ss: StructuralSample, A, X, Y, Z) -> np.ndarray:
    """Intrinsic R(X,Y)Z from the long-form Gauss expansion, with no eps_i inside the V terms.

    The ambiguous term is read as ``((<V,X> phi L Y - <V,Y> phi L X) ^ W)(L Z)``.
    """
    A = np.asarray(A, dtype=np.float64)
    X, Y, Z = (np.asarray(v, dtype=np.float64) for v in (X, Y, Z))
    return _gauss_sum(ss, X, Y, Z, with_eps=False) + _wedge(A @ X, A @ Y, Z)


def gauss_rhs_corrected(ss: StructuralSample, A, X, Y, Z) -> np.ndarray:
    """Gauss expansion rederived from the product curvature, with every eps_i kept."""
    A = np.asarray(A, dtype=np.float64)
    X, Y, Z = (np.asarray(v, dtype=np.float64) for v in (X, Y, Z))
    return _gauss_sum(ss, X, Y, Z, with_eps=True) + _wedge(A @ X, A @ Y, Z)


# -- linear-model oracles ---------------------------------------------------------------------


def _require_model(ss: StructuralSample):
    if ss.basis is None or ss.nu is None:
        raise UsageError("sample carries no linear model; use synth_structural")


def ambient_curvature_linear(ss: StructuralSample, X, Y, Z) -> np.ndarray:
    """Block-sum product curvature on the flat model R^{2n} (unit metric)."""
    _require_model(ss)
    J, F = product_model(ss.n1, ss.n2)
    d1 = 2 * ss.n1
    out = np.zeros(X.shape[0])
    for c, sl in zip(ss.c, (slice(0, d1), slice(d1, None))):
        x, y, z = np.zeros_like(X), np.zeros_like(Y), np.zeros_like(Z)
        x[sl], y[sl], z[sl] = X[sl], Y[sl], Z[sl]
        out += 4.0 * c * (_wedge(x, y, z) + _wedge(J @ x, J @ y, z) + 2.0 * (x @ (J @ y)) * (J @ z))
    return out


def codazzi_rhs_linear(ss: StructuralSample, Y, X) -> np.ndarray:
    """(nabla_X A) Y - (nabla_Y A) X = -tan(Rbar(X, Y) nu) from the ambient block curvature."""
    _require_model(ss)
    B = ss.basis
    return -B.T @ ambient_curvature_linear(ss, B @ X, B @ Y, ss.nu)


def gauss_rhs_linear(ss: StructuralSample, A, X, Y, Z) -> np.ndarray:
    """tan(Rbar(X, Y) Z) + (AX ^ AY) Z from the ambient block curvature."""
    _require_model(ss)
    B = ss.basis
    A = np.asarray(A, dtype=np.float64)
    return B.T @ ambient_curvature_linear(ss, B @ X, B @ Y, B @ Z) + _wedge(A @ X, A @ Y, Z)
