"""Named verification suites.

Every suite draws its random inputs from generators keyed by
``(seed, loop tag, sample index)``, so results do not depend on the order in
which samples are evaluated or on the number of worker threads.
"""
from __future__ import annotations

import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import __version__, _kernels, fd, hypersurface as hs, identities as ids, product, spaceforms
from .errors import DegeneracyError, DomainError, UsageError
from .immersions import parse_immersion
from .linalg import inner, rel_err
from .report import Accumulator, Check, ReportDocument

SUITES = (
    "structure",
    "product-curvature",
    "gauss",
    "codazzi",
    "lemma1",
    "eq20",
    "obstruction",
    "lemma2",
    "umbilic-scan",
)
NEEDS_IMMERSION = frozenset({"gauss", "codazzi", "obstruction", "umbilic-scan"})
FORMATS = ("json", "csv")

CONVENTIONS = {
    "wedge": "(X^Y)Z = <Y,Z>X - <X,Z>Y",
    "curvature": "R(X,Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y]",
    "holomorphic_sectional_curvature": "K(X) = <R(X,JX)JX,X> / (|X|^2 |JX|^2 - <X,JX>^2)",
    "complex_structure": "J(x,y) = (-y,x) on each complex coordinate",
    "product_structure": "F = pi_1 - pi_2, Lbar_i = I + eps_i F, eps = (1,-1)",
    "normal_orientation": "det[tangent basis | nu] > 0",
    "shape_operator": "AX = -nabla-bar_X nu",
    "codazzi_operator": "dA(Y,X) = (nabla_X A)Y - (nabla_Y A)X",
    "relative_error": "|a-b| / max(|a|, |b|, scale)",
    "frame_indices": "0-based",
}

SEED_MASK = (1 << 64) - 1
V_THRESHOLD = 0.05
UMBILIC_TOL = 1e-8

TOL_ALGEBRA = 1e-10
TOL_ALGEBRA_STRICT = 1e-11
TOL_FD = 1e-5
TOL_FD_FACTOR = 1e-6


@dataclass(frozen=True)
class RunConfig:
    suite: str
    model: str
    immersion: str | None = None
    samples: int = 200
    seed: int = 42
    tol: float | None = None
    step: float = fd.DEFAULT_STEP
    out: str | None = None
    format: str = "json"

    def resolve(self) -> tuple[product.ProductSpec, hs.Immersion | None]:
        """Validate and parse; every problem is a :class:`UsageError`."""
        if self.suite not in SUITES:
            raise UsageError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.samples < 1:
            raise UsageError("samples must be >= 1")
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        if self.tol is not None and not (self.tol >= 0 and math.isfinite(self.tol)):
            raise UsageError("tol must be a finite non-negative number")
        fd.check_step(self.step)
        spec = product.parse_model(self.model)
        imm = parse_immersion(self.immersion, d=spec.dim) if self.immersion else None
        if self.suite in NEEDS_IMMERSION and imm is None:
            raise UsageError(f"suite {self.suite!r} needs --immersion")
        return spec, imm


def worker_count() -> int:
    raw = os.environ.get("VERIFY_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"VERIFY_THREADS must be an integer, got {raw!r}") from None


# -- sample loops ------------------------------------------------------------------


class _Recorder:
    """Per-sample output; merged into the run in sample order."""

    def __init__(self):
        self.values: list[tuple[str, float | None]] = []
        self.tracked: list[tuple[str, float]] = []
        self.failed = False

    def put(self, name: str, value: float) -> None:
        self.values.append((name, float(value)))

    def skip(self, name: str) -> None:
        self.values.append((name, None))

    def track(self, name: str, value: float) -> None:
        self.tracked.append((name, float(value)))


class _Run:
    def __init__(self, spec, imm, cfg: RunConfig):
        self.spec = spec
        self.imm = imm
        self.cfg = cfg
        self.seed = cfg.seed & SEED_MASK
        self.accs: dict[str, Accumulator] = {}
        self.diagnostic_names: set[str] = set()
        self.optional_names: set[str] = set()
        self.checks: list[Check] = []
        self.metrics: dict = {}
        self.tracked: dict[str, list[float]] = {}
        self.workers = worker_count()

    @property
    def step(self) -> float:
        return self.cfg.step

    def rng(self, tag: str, i: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(tag.encode()), i])

    def declare(self, name: str, tol: float, diagnostic: bool = False, optional: bool = False) -> str:
        """Register a residual. ``optional`` ones only apply where a precondition
        holds; if it holds nowhere they are listed as not applicable instead of failing."""
        if name not in self.accs:
            self.accs[name] = Accumulator(name, tol if self.cfg.tol is None else self.cfg.tol)
        if diagnostic:
            self.diagnostic_names.add(name)
        if optional:
            self.optional_names.add(name)
        return name

    def loop(self, tag: str, count: int, fn: Callable, names: list[str]) -> None:
        """Run ``fn(rng, rec)`` for each sample; chart/degeneracy failures skip the sample."""

        def one(i):
            rec = _Recorder()
            try:
                fn(self.rng(tag, i), rec)
            except (DomainError, DegeneracyError):
                rec = _Recorder()
                rec.failed = True
            return rec

        if self.workers > 1 and count > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                recs = list(pool.map(one, range(count)))
        else:
            recs = [one(i) for i in range(count)]
        for rec in recs:
            if rec.failed:
                for name in names:
                    self.accs[name].skip()
                continue
            for name, value in rec.values:
                if value is None:
                    self.accs[name].skip()
                else:
                    self.accs[name].add(value)
            for name, value in rec.tracked:
                self.tracked.setdefault(name, []).append(value)

    def check(self, name: str, value, op: str, bound: float) -> None:
        self.checks.append(Check.make(name, value, op, bound))

    def tracked_min(self, name: str):
        vals = self.tracked.get(name, [])
        return min(vals) if vals else None

    def tracked_max(self, name: str):
        vals = self.tracked.get(name, [])
        return max(vals) if vals else None


def _algebra_scale(ss: ids.StructuralSample) -> float:
    return abs(ss.c1) + abs(ss.c2)


def _synth(run: _Run, rng) -> ids.StructuralSample:
    return ids.synth_structural(rng, run.spec.n1, run.spec.n2, *run.spec.c)


def _tangent_dim(run: _Run) -> int:
    return run.spec.dim - 1


# -- suites -------------------------------------------------------------------------


def _structure_names(with_frame: bool) -> list[str]:
    ss = ids.synth_structural(0, 1, 1, 0.0, 0.0)
    frame = hs.adapted_frame(ss.sd, seed=0) if with_frame else None
    return list(ids.structure_residuals(ss.sd, frame))


def suite_structure(run: _Run) -> None:
    keys = _structure_names(True)
    names = [run.declare(f"synth:{k}", TOL_ALGEBRA) for k in keys]

    def synth(rng, rec):
        ss = _synth(run, rng)
        frame = hs.adapted_frame(ss.sd, seed=rng)
        for k, v in ids.structure_residuals(ss.sd, frame).items():
            rec.put(f"synth:{k}", v)

    run.loop("structure:synth", run.cfg.samples, synth, names)
    if run.imm is None:
        return
    extra = {"nu_unit": 1e-12, "nu_normal": 1e-10, "A_self_adjoint": 1e-8, "H_trace": 1e-12}
    names = [run.declare(f"immersed:{k}", TOL_ALGEBRA) for k in keys]
    names += [run.declare(f"immersed:{k}", t) for k, t in extra.items()]

    def immersed(rng, rec):
        pt = hs.point_data(run.imm, run.spec, run.imm.sample_u(rng), run.step)
        sd = hs.induced_structures(pt)
        frame = hs.adapted_frame(sd, seed=rng)
        for k, v in ids.structure_residuals(sd, frame).items():
            rec.put(f"immersed:{k}", v)
        g = pt.amb.g
        rec.put("immersed:nu_unit", abs(inner(pt.nu, pt.nu, g) - 1.0))
        rec.put("immersed:nu_normal", float(np.abs(pt.tangent_basis.T @ g @ pt.nu).max()))
        rec.put("immersed:A_self_adjoint", float(np.abs(pt.A - pt.A.T).max()))
        rec.put("immersed:H_trace", abs(pt.H - np.trace(pt.A) / pt.dim))

    run.loop("structure:immersed", run.cfg.samples, immersed, names)


def suite_product_curvature(run: _Run) -> None:
    spec, step = run.spec, run.step
    for idx, factor in enumerate(spec.factors, start=1):
        pre = f"factor{idx}:"
        names = [
            run.declare(pre + "curvature_formula_vs_fd", TOL_FD_FACTOR),
            run.declare(pre + "hol_sec_curvature_minus_16c", 1e-7),
            run.declare(pre + "kahler_residual", 1e-7),
        ]

        def factor_sample(rng, rec, factor=factor, pre=pre):
            p = spaceforms.sample_point(factor, rng)
            X, Y, Z = rng.normal(size=(3, factor.dim))
            exact = spaceforms.curvature_formula(factor, p, X, Y, Z)
            rec.put(pre + "curvature_formula_vs_fd", rel_err(exact, spaceforms.curvature_fd(factor, p, X, Y, Z, step)))
            rec.put(pre + "hol_sec_curvature_minus_16c", abs(spaceforms.hol_sec_curvature(factor, p, X) - 16.0 * factor.c))
            rec.put(pre + "kahler_residual", spaceforms.kahler_residual(factor, p, step))

        run.loop(f"product-curvature:{pre}", run.cfg.samples, factor_sample, names)

    names = [
        run.declare("product:formula_vs_block_sum", 1e-12),
        run.declare("product:formula_vs_fd", TOL_FD_FACTOR),
        run.declare("product:mixed_planes_flat", 1e-12),
        run.declare("product:structure_operators", 1e-11),
    ]
    d1 = spec.factor1.dim

    def product_sample(rng, rec):
        q = product.sample_point(spec, rng)
        amb = product.ambient_structure_at(spec, q)
        X, Y, Z = rng.normal(size=(3, spec.dim))
        exact = product.curvature_product_formula(spec, q, X, Y, Z, amb=amb)
        rec.put("product:formula_vs_block_sum", rel_err(exact, product.curvature_block_sum(spec, q, X, Y, Z)))
        rec.put("product:formula_vs_fd", rel_err(exact, product.curvature_fd(spec, q, X, Y, Z, step)))
        X1, Y2 = X.copy(), Y.copy()
        X1[d1:] = 0.0
        Y2[:d1] = 0.0
        mixed = product.curvature_product_formula(spec, q, X1, Y2, Z, amb=amb)
        ref = np.linalg.norm(exact) + 16.0 * max(abs(c) for c in spec.c)
        rec.put("product:mixed_planes_flat", float(np.linalg.norm(mixed)) / ref)
        g, F, J, L1, L2 = amb.g, amb.F, amb.J, amb.Lbar1, amb.Lbar2
        I = np.eye(spec.dim)
        defects = [F @ F - I, F @ J - J @ F, F.T @ g @ F - g, L1 @ L2, L1 @ L1 - 2 * L1, L2 @ L2 - 2 * L2]
        rec.put("product:structure_operators", max(float(np.abs(D).max()) for D in defects))

    run.loop("product-curvature:product", run.cfg.samples, product_sample, names)


def suite_gauss(run: _Run) -> None:
    spec, imm, step = run.spec, run.imm, run.step
    m = _tangent_dim(run)
    names = [
        run.declare("gauss_definition", TOL_FD),
        run.declare("gauss_expansion_corrected", TOL_FD),
        run.declare("gauss_expansion_literal", TOL_FD, diagnostic=True),
        run.declare("shape_operator_self_adjoint", 1e-8),
        run.declare("shape_operator_vs_second_fundamental_form", 1e-8),
    ]

    def immersed(rng, rec):
        u = imm.sample_u(rng)
        X, Y, Z = rng.normal(size=(3, m))
        pt = hs.point_data(imm, spec, u, step)
        ss = ids.sample_from_point(pt, spec.c)
        R = hs.intrinsic_curvature_fd(imm, spec, u, X, Y, Z, step)
        rec.put("gauss_definition", rel_err(R, hs.gauss_definition_rhs(pt, spec, X, Y, Z)))
        rec.put("gauss_expansion_corrected", rel_err(R, ids.gauss_rhs_corrected(ss, pt.A, X, Y, Z)))
        rec.put("gauss_expansion_literal", rel_err(R, ids.gauss_rhs_expansion(ss, pt.A, X, Y, Z)))
        rec.put("shape_operator_self_adjoint", float(np.abs(pt.A - pt.A.T).max()))
        rec.put("shape_operator_vs_second_fundamental_form",
                rel_err(pt.A, hs.second_fundamental_form(imm, spec, u, step), scale=1.0))

    run.loop("gauss:immersed", run.cfg.samples, immersed, names)

    names = [
        run.declare("synth:gauss_corrected_vs_ambient", TOL_ALGEBRA_STRICT),
        run.declare("synth:gauss_literal_vs_ambient", TOL_ALGEBRA_STRICT, diagnostic=True),
    ]

    def synth(rng, rec):
        ss = _synth(run, rng)
        A = rng.normal(size=(m, m))
        A = 0.5 * (A + A.T)
        X, Y, Z = rng.normal(size=(3, m))
        ref = ids.gauss_rhs_linear(ss, A, X, Y, Z)
        scale = _algebra_scale(ss)
        rec.put("synth:gauss_corrected_vs_ambient", rel_err(ids.gauss_rhs_corrected(ss, A, X, Y, Z), ref, scale))
        rec.put("synth:gauss_literal_vs_ambient", rel_err(ids.gauss_rhs_expansion(ss, A, X, Y, Z), ref, scale))

    run.loop("gauss:synth", run.cfg.samples, synth, names)


def suite_codazzi(run: _Run) -> None:
    spec, imm, step = run.spec, run.imm, run.step
    m = _tangent_dim(run)
    names = [run.declare("codazzi_numeric_vs_display", TOL_FD)]

    def immersed(rng, rec):
        u = imm.sample_u(rng)
        X, Y = rng.normal(size=(2, m))
        pt = hs.point_data(imm, spec, u, step)
        ss = ids.sample_from_point(pt, spec.c)
        lhs = hs.d_nabla_A_numeric(imm, spec, u, X, Y, step)
        rec.put("codazzi_numeric_vs_display", rel_err(lhs, ids.codazzi_rhs(ss, Y, X)))

    run.loop("codazzi:immersed", run.cfg.samples, immersed, names)

    names = [
        run.declare("synth:codazzi_display_vs_ambient", TOL_ALGEBRA_STRICT),
        run.declare("synth:codazzi_display_antisymmetry", TOL_ALGEBRA_STRICT),
    ]

    def synth(rng, rec):
        ss = _synth(run, rng)
        X, Y = rng.normal(size=(2, m))
        rhs = ids.codazzi_rhs(ss, Y, X)
        scale = _algebra_scale(ss)
        rec.put("synth:codazzi_display_vs_ambient", rel_err(rhs, ids.codazzi_rhs_linear(ss, Y, X), scale))
        rec.put("synth:codazzi_display_antisymmetry", rel_err(rhs, -ids.codazzi_rhs(ss, X, Y), scale))

    run.loop("codazzi:synth", run.cfg.samples, synth, names)


def _component_label(index: int, n_e: int) -> str:
    if index == 0:
        return "W"
    if index <= n_e:
        return f"e{index}"
    return f"phi_e{index - n_e}"


def suite_lemma1(run: _Run) -> None:
    names = [
        run.declare("lemma1_W_e", TOL_ALGEBRA),
        run.declare("lemma1_W_phi_e", TOL_ALGEBRA),
        run.declare("lemma1_e_phi_e", TOL_ALGEBRA),
        run.declare("lemma1_W_component", TOL_ALGEBRA),
        run.declare("lemma1_W_e_literal", TOL_ALGEBRA, diagnostic=True),
    ]
    literal_tol = run.accs["lemma1_W_e_literal"].tol

    def sample(rng, rec):
        ss = _synth(run, rng)
        frame = hs.adapted_frame(ss.sd, seed=rng)
        scale = _algebra_scale(ss)
        n_e = len(frame.e)
        w_e = w_pe = e_pe = w_comp = literal = 0.0
        for j in range(n_e):
            oracle = ids.lemma1_oracle(ss, frame, "We", j)
            w_e = max(w_e, rel_err(ids.lemma1_rhs(ss, frame, "We", j, reading="corrected"), oracle, scale))
            as_given = ids.lemma1_rhs(ss, frame, "We", j)
            literal = max(literal, rel_err(as_given, oracle, scale))
            comps = np.abs(ids.frame_components(as_given - oracle, frame)) / max(scale, 1e-300)
            for k in np.flatnonzero(comps > literal_tol):
                rec.track(f"literal_offender:{_component_label(int(k), n_e)}", comps[k])
            w_pe = max(w_pe, rel_err(ids.lemma1_rhs(ss, frame, "Wphie", j),
                                     ids.lemma1_oracle(ss, frame, "Wphie", j), scale))
            for l in range(n_e):
                e_pe = max(e_pe, rel_err(ids.lemma1_rhs(ss, frame, "ephie", j, l),
                                         ids.lemma1_oracle(ss, frame, "ephie", j, l), scale))
            expected = sum(4.0 * c * (eps + ss.sd.h) for c, eps in zip(ss.c, ss.eps)) * float(frame.e[j] @ ss.sd.V)
            w_comp = max(w_comp, rel_err(np.array([oracle @ frame.W]), np.array([expected]), scale))
        rec.put("lemma1_W_e", w_e)
        rec.put("lemma1_W_phi_e", w_pe)
        rec.put("lemma1_e_phi_e", e_pe)
        rec.put("lemma1_W_component", w_comp)
        rec.put("lemma1_W_e_literal", literal)

    run.loop("lemma1", run.cfg.samples, sample, names)
    offenders = {k.split(":", 1)[1]: len(v) for k, v in sorted(run.tracked.items()) if k.startswith("literal_offender:")}
    run.metrics["lemma1_W_e_literal.offending_components"] = offenders


def suite_eq20(run: _Run) -> None:
    m = _tangent_dim(run)
    names = [
        run.declare("W_plane_vs_codazzi", TOL_ALGEBRA_STRICT),
        run.declare("W_plane_at_W", TOL_ALGEBRA_STRICT),
        run.declare("dA_WV_vs_codazzi", TOL_ALGEBRA_STRICT),
        run.declare("W_plane_at_V_vs_dA_WV", TOL_ALGEBRA_STRICT),
    ]

    def sample(rng, rec):
        ss = _synth(run, rng)
        sd = ss.sd
        scale = _algebra_scale(ss)
        X = rng.normal(size=m)
        rec.put("W_plane_vs_codazzi", rel_err(ids.eq20_rhs(ss, X), ids.codazzi_rhs(ss, sd.W, X), scale))
        at_W = max(np.abs(ids.eq20_rhs(ss, sd.W)).max(), np.abs(ids.codazzi_rhs(ss, sd.W, sd.W)).max())
        rec.put("W_plane_at_W", float(at_W) / max(scale, 1.0))
        dWV, _ = ids.dA_WV_formula(ss)
        rec.put("dA_WV_vs_codazzi", rel_err(dWV, ids.codazzi_rhs(ss, sd.W, sd.V), scale))
        rec.put("W_plane_at_V_vs_dA_WV", rel_err(ids.eq20_rhs(ss, sd.V), dWV, scale))

    run.loop("eq20", run.cfg.samples, sample, names)


def suite_obstruction(run: _Run) -> None:
    spec, imm, step = run.spec, run.imm, run.step
    curved = any(c != 0.0 for c in spec.c)
    names = [run.declare("dA_WV_numeric_vs_formula", TOL_FD)]

    def immersed(rng, rec):
        u = imm.sample_u(rng)
        pt = hs.point_data(imm, spec, u, step)
        ss = ids.sample_from_point(pt, spec.c)
        sd = ss.sd
        if np.linalg.norm(sd.V) < V_THRESHOLD:
            rec.skip("dA_WV_numeric_vs_formula")
            return
        # dA(W, V) = (nabla_V A) W - (nabla_W A) V
        numeric = hs.d_nabla_A_numeric(imm, spec, u, sd.V, sd.W, step)
        formula, norm = ids.dA_WV_formula(ss)
        rec.put("dA_WV_numeric_vs_formula", rel_err(numeric, formula))
        rec.track("numeric_norm", np.linalg.norm(numeric))
        rec.track("formula_norm", norm)

    run.loop("obstruction:immersed", run.cfg.samples, immersed, names)
    kept = len(run.tracked.get("numeric_norm", []))
    run.metrics["immersed_samples_with_V"] = kept
    run.check("immersed_samples_with_V", kept, ">=", 1)
    if curved:
        run.check("min_norm_dA_WV_numeric", run.tracked_min("numeric_norm"), ">", 0.0)
    else:
        run.check("max_norm_dA_WV_numeric", run.tracked_max("numeric_norm"), "<=", 1e-8)

    names = [
        run.declare("synth:dA_WV_formula_vs_codazzi", TOL_ALGEBRA_STRICT),
        run.declare("system:det_minus_2", 1e-12),
    ]

    def synth(rng, rec):
        ss = _synth(run, rng)
        vec, norm = ids.dA_WV_formula(ss)
        rec.put("synth:dA_WV_formula_vs_codazzi",
                rel_err(vec, ids.codazzi_rhs(ss, ss.sd.W, ss.sd.V), _algebra_scale(ss)))
        if np.linalg.norm(ss.sd.V) >= V_THRESHOLD:
            rec.track("synth_norm", norm)
        det, nullity = ids.obstruction_system(float(rng.uniform(-1.0, 1.0)))
        rec.put("system:det_minus_2", abs(det - 2.0))
        rec.track("nullity", nullity)

    run.loop("obstruction:synth", run.cfg.samples, synth, names)
    if curved:
        run.check("synth:min_norm_dA_WV_formula", run.tracked_min("synth_norm"), ">", 0.0)
    run.check("system:max_nullity", run.tracked_max("nullity"), "<=", 0.0)
    run.metrics["min_norm_dA_WV_numeric"] = run.tracked_min("numeric_norm")
    run.metrics["min_norm_dA_WV_formula"] = run.tracked_min("formula_norm")


def suite_lemma2(run: _Run) -> None:
    names = [
        run.declare("lemma2_cancellation", TOL_ALGEBRA_STRICT),
        run.declare("trace_L_phi_L", TOL_ALGEBRA_STRICT),
        run.declare("trace_phi_L_phi_L_phi", TOL_ALGEBRA_STRICT),
        run.declare("gradH_vs_e_components", TOL_ALGEBRA_STRICT),
        run.declare("gradH_vs_phi_e_components", TOL_ALGEBRA_STRICT),
        run.declare("gradH_vs_codazzi_W_component", TOL_ALGEBRA_STRICT),
    ]

    def sample(rng, rec):
        ss = _synth(run, rng)
        sd = ss.sd
        frame = hs.adapted_frame(sd, seed=rng)
        grad = ids.gradH_formula(ss)
        vals = dict.fromkeys(names, 0.0)
        for j, (e, pe) in enumerate(zip(frame.e, frame.phi_e)):
            vals["lemma2_cancellation"] = max(vals["lemma2_cancellation"], ids.lemma2_cancellation(ss, frame, j))
            for L in sd.L:
                vals["trace_L_phi_L"] = max(vals["trace_L_phi_L"], abs(float(e @ (L @ sd.phi @ L @ e))))
                t = abs(float(e @ (sd.phi @ L @ sd.phi @ L @ pe)))
                vals["trace_phi_L_phi_L_phi"] = max(vals["trace_phi_L_phi_L_phi"], t)
            vals["gradH_vs_e_components"] = max(vals["gradH_vs_e_components"],
                                                abs(float(grad @ e) - ids.lambda_e_derivative(ss, frame, j)))
            vals["gradH_vs_phi_e_components"] = max(vals["gradH_vs_phi_e_components"],
                                                    abs(float(grad @ pe) - ids.lambda_phie_derivative(ss, frame, j)))
            w_comp = float(ids.codazzi_rhs(ss, sd.W, e) @ sd.W)
            vals["gradH_vs_codazzi_W_component"] = max(vals["gradH_vs_codazzi_W_component"],
                                                       abs(w_comp - float(grad @ e)))
        for k, v in vals.items():
            rec.put(k, v)

    run.loop("lemma2:synth", run.cfg.samples, sample, names)
    if run.imm is None:
        return
    spec, imm, step = run.spec, run.imm, run.step
    names = [
        run.declare("immersed:gradH_numeric_vs_formula", 1e-8, optional=True),
        run.declare("immersed:gradH_formula_where_V_zero", 0.0, optional=True),
    ]

    def immersed(rng, rec):
        u = imm.sample_u(rng)
        pt = hs.point_data(imm, spec, u, step)
        ss = ids.sample_from_point(pt, spec.c)
        formula = ids.gradH_formula(ss)
        if hs.umbilicity_deviation(pt) <= UMBILIC_TOL:
            numeric = hs.mean_curvature_gradient(imm, spec, u, step)
            rec.put("immersed:gradH_numeric_vs_formula", float(np.linalg.norm(numeric - formula)))
        else:
            rec.skip("immersed:gradH_numeric_vs_formula")
        if not np.any(ss.sd.V):
            rec.put("immersed:gradH_formula_where_V_zero", float(np.abs(formula).max()))
        else:
            rec.skip("immersed:gradH_formula_where_V_zero")

    run.loop("lemma2:immersed", run.cfg.samples, immersed, names)


def suite_umbilic_scan(run: _Run) -> None:
    spec, imm, step = run.spec, run.imm, run.step
    names = [run.declare("shape_operator_self_adjoint", 1e-8)]
    def sample(rng, rec):
        u = imm.sample_u(rng)
        pt = hs.point_data(imm, spec, u, step)
        sd = hs.induced_structures(pt)
        dev = hs.umbilicity_deviation(pt)
        vnorm = float(np.linalg.norm(sd.V))
        rec.put("shape_operator_self_adjoint", float(np.abs(pt.A - pt.A.T).max()))
        rec.track("deviation", dev)
        rec.track("H", pt.H)
        rec.track("V_norm", vnorm)
        rec.track("f2_defect", float(np.linalg.norm(sd.f @ sd.f - np.eye(sd.dim))))
        if vnorm >= V_THRESHOLD:
            rec.track("deviation_with_V", dev)

    run.loop("umbilic-scan", run.cfg.samples, sample, names)
    for name in ("deviation", "H", "V_norm", "f2_defect", "deviation_with_V"):
        run.metrics[f"min_{name}"] = run.tracked_min(name)
        run.metrics[f"max_{name}"] = run.tracked_max(name)
    max_v, max_f2 = run.tracked_max("V_norm"), run.tracked_max("f2_defect")
    if max_v is not None:
        f_inv, f2_id = max_v <= UMBILIC_TOL, max_f2 <= UMBILIC_TOL
        run.metrics["F_invariant"] = f_inv
        run.metrics["f_squared_identity"] = f2_id
        run.check("F_invariance_criteria_agree", float(f_inv == f2_id), ">", 0.5)


SUITE_FUNCS = {
    "structure": suite_structure,
    "product-curvature": suite_product_curvature,
    "gauss": suite_gauss,
    "codazzi": suite_codazzi,
    "lemma1": suite_lemma1,
    "eq20": suite_eq20,
    "obstruction": suite_obstruction,
    "lemma2": suite_lemma2,
    "umbilic-scan": suite_umbilic_scan,
}


def config_echo(cfg: RunConfig, spec: product.ProductSpec, imm) -> dict:
    echo = asdict(cfg)
    echo.pop("out")
    echo["model_canonical"] = spec.label
    echo["immersion_canonical"] = None if imm is None else {"name": imm.name, **imm.params}
    echo["kernel_backend"] = _kernels.backend()
    return echo


def run(cfg: RunConfig) -> ReportDocument:
    """Execute one suite and return its report (deterministic given the config)."""
    start = time.perf_counter()
    spec, imm = cfg.resolve()
    state = _Run(spec, imm, cfg)
    SUITE_FUNCS[cfg.suite](state)
    residuals, diagnostics, not_applicable = [], [], []
    for name, acc in state.accs.items():
        if name in state.optional_names and acc.count == 0:
            not_applicable.append(name)
            continue
        (diagnostics if name in state.diagnostic_names else residuals).append(acc.result())
    if not_applicable:
        state.metrics["not_applicable"] = not_applicable
    return ReportDocument(
        tool="kahlerprod-verify",
        version=__version__,
        config=config_echo(cfg, spec, imm),
        conventions=dict(CONVENTIONS),
        residuals=residuals,
        checks=state.checks,
        diagnostics=diagnostics,
        metrics=state.metrics,
        duration_s=time.perf_counter() - start,
    )
