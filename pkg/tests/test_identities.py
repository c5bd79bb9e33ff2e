import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerprod import hypersurface as hs
from kahlerprod import identities as ids
from kahlerprod.errors import UsageError
from kahlerprod.linalg import rel_err

seeds = st.integers(0, 2**32 - 1)
shapes = st.sampled_from([(1, 1), (1, 2), (2, 1)])


def scale(ss):
    return abs(ss.c1) + abs(ss.c2)


@settings(max_examples=60, deadline=None)
@given(seeds, shapes)
def test_synthesized_samples_satisfy_structure_identities(seed, shape):
    ss = ids.synth_structural(seed, *shape)
    frame = hs.adapted_frame(ss.sd, seed=seed)
    res = ids.structure_residuals(ss.sd, frame)
    assert max(res.values()) <= 1e-13
    assert np.array_equal(ss.metric, np.eye(ss.dim))


def test_synth_special_normals():
    ss = ids.synth_structural(0, 1, 1, nu=[1.0, 0.0, 0.0, 0.0])
    assert ss.sd.h == pytest.approx(1.0) and np.abs(ss.sd.V).max() <= 1e-15
    ss = ids.synth_structural(0, 1, 1, nu=[1.0, 0.0, 1.0, 0.0])
    assert ss.sd.h == pytest.approx(0.0, abs=1e-15) and np.linalg.norm(ss.sd.V) == pytest.approx(1.0)
    with pytest.raises(UsageError):
        ids.synth_structural(0, 0, 1)
    with pytest.raises(UsageError):
        ids.synth_structural(0, 1, 1, nu=[1.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(seeds, shapes)
def test_codazzi_display_matches_ambient_curvature(seed, shape):
    ss = ids.synth_structural(seed, *shape)
    rng = np.random.default_rng(seed)
    X, Y = rng.normal(size=(2, ss.dim))
    rhs = ids.codazzi_rhs(ss, Y, X)
    assert rel_err(rhs, ids.codazzi_rhs_linear(ss, Y, X), scale(ss)) <= 1e-12
    assert rel_err(rhs, -ids.codazzi_rhs(ss, X, Y), scale(ss)) <= 1e-13
    assert np.abs(ids.codazzi_rhs(ss, X, X)).max() <= 1e-14


def test_codazzi_flat_and_dimension():
    ss = ids.synth_structural(3, 1, 1, 0.0, 0.0)
    X, Y = np.random.default_rng(0).normal(size=(2, 3))
    assert not ids.codazzi_rhs(ss, Y, X).any()
    with pytest.raises(UsageError):
        ids.codazzi_rhs(ss, np.ones(2), X)


@settings(max_examples=60, deadline=None)
@given(seeds, shapes)
def test_W_plane_codazzi_and_dA_WV(seed, shape):
    ss = ids.synth_structural(seed, *shape)
    sd = ss.sd
    X = np.random.default_rng(seed).normal(size=ss.dim)
    assert rel_err(ids.eq20_rhs(ss, X), ids.codazzi_rhs(ss, sd.W, X), scale(ss)) <= 1e-11
    assert np.abs(ids.eq20_rhs(ss, sd.W)).max() <= 1e-11 * max(scale(ss), 1)
    vec, norm = ids.dA_WV_formula(ss)
    assert norm == pytest.approx(np.linalg.norm(vec))
    assert rel_err(vec, ids.codazzi_rhs(ss, sd.W, sd.V), scale(ss)) <= 1e-11


def test_W_plane_codazzi_without_V():
    ss = ids.synth_structural(5, 1, 2, nu=[0, 0, 1.0, 0, 0, 0])
    X = np.random.default_rng(0).normal(size=5)
    want = -sum(0.5 * c * (1 + e * ss.sd.h) * (L @ ss.sd.phi @ L @ X) for c, e, L in zip(ss.c, ss.eps, ss.sd.L))
    assert np.allclose(ids.eq20_rhs(ss, X), want, atol=1e-14)


def test_dA_WV_examples():
    # h = 0, c2 = -c1 gives 8 c1 W
    ss = ids.synth_structural(1, 1, 1, 0.3, -0.3, nu=[1.0, 0.0, 1.0, 0.0])
    vec, _ = ids.dA_WV_formula(ss)
    assert np.allclose(vec, 8 * 0.3 * ss.sd.W, atol=1e-14)
    ss = ids.synth_structural(1, 1, 1, 0.3, 0.5, nu=[0.0, 1.0, 0.0, 0.0])
    assert ids.dA_WV_formula(ss)[1] <= 1e-15
    rng = np.random.default_rng(11)
    for i in range(50):
        ss = ids.synth_structural(rng, 1, 1, 1 / 16, 1 / 16)
        if np.linalg.norm(ss.sd.V) > 0.1:
            assert ids.dA_WV_formula(ss)[1] > 0


def test_obstruction_system():
    for h in np.random.default_rng(0).uniform(-1, 1, 100):
        det, nullity = ids.obstruction_system(h)
        assert det == pytest.approx(2.0) and nullity == 0


@pytest.mark.parametrize("shape", [(1, 1), (1, 2), (2, 2)])
def test_lemma1_displays(shape):
    rng = np.random.default_rng(sum(shape))
    for _ in range(20):
        ss = ids.synth_structural(rng, *shape)
        fr = hs.adapted_frame(ss.sd, seed=rng)
        m = len(fr.e)
        for j in range(m):
            o = ids.lemma1_oracle(ss, fr, "We", j)
            assert rel_err(ids.lemma1_rhs(ss, fr, "We", j, reading="corrected"), o, scale(ss)) <= 1e-12
            o = ids.lemma1_oracle(ss, fr, "Wphie", j)
            assert rel_err(ids.lemma1_rhs(ss, fr, "Wphie", j), o, scale(ss)) <= 1e-12
            for l in range(m):
                o = ids.lemma1_oracle(ss, fr, "ephie", j, l)
                assert rel_err(ids.lemma1_rhs(ss, fr, "ephie", j, l), o, scale(ss)) <= 1e-12


def test_lemma1_literal_W_e_differs_only_along_phi_e():
    rng = np.random.default_rng(4)
    ss = ids.synth_structural(rng, 1, 2)
    fr = hs.adapted_frame(ss.sd, seed=rng)
    for j in range(2):
        diff = ids.frame_components(ids.lemma1_rhs(ss, fr, "We", j) - ids.lemma1_oracle(ss, fr, "We", j), fr)
        assert np.abs(diff[:3]).max() <= 1e-13  # W and e_k components agree
        assert np.abs(diff[3:]).max() > 1e-6


def test_lemma1_special_cases():
    ss = ids.synth_structural(2, 1, 2, nu=[1.0, 0, 0, 0, 0, 0])
    fr = hs.adapted_frame(ss.sd, seed=0)
    for j in range(2):
        assert ids.lemma1_oracle(ss, fr, "We", j) @ fr.W == pytest.approx(0.0, abs=1e-14)
    rng = np.random.default_rng(3)
    ss = ids.synth_structural(rng, 1, 1)
    fr = hs.adapted_frame(ss.sd, seed=rng)
    want = sum(4 * c * (e + ss.sd.h) for c, e in zip(ss.c, ss.eps)) * (fr.e[0] @ ss.sd.V)
    assert ids.lemma1_oracle(ss, fr, "We", 0) @ fr.W == pytest.approx(want, abs=1e-13)
    with pytest.raises(UsageError):
        ids.lemma1_rhs(ss, fr, "We", 1)
    with pytest.raises(UsageError):
        ids.lemma1_rhs(ss, fr, "ephie", 0)
    with pytest.raises(UsageError):
        ids.lemma1_rhs(ss, fr, "nope", 0)


def test_lemma2_and_gradH():
    rng = np.random.default_rng(8)
    for shape in ((1, 1), (1, 2), (2, 2)):
        for _ in range(30):
            ss = ids.synth_structural(rng, *shape)
            fr = hs.adapted_frame(ss.sd, seed=rng)
            grad = ids.gradH_formula(ss)
            for j, (e, pe) in enumerate(zip(fr.e, fr.phi_e)):
                assert ids.lemma2_cancellation(ss, fr, j) <= 1e-11
                for L in ss.sd.L:
                    assert abs(e @ L @ ss.sd.phi @ L @ e) <= 1e-13
                assert grad @ e == pytest.approx(ids.lambda_e_derivative(ss, fr, j), abs=1e-12)
                assert grad @ pe == pytest.approx(ids.lambda_phie_derivative(ss, fr, j), abs=1e-12)
    ss = ids.synth_structural(0, 1, 1, 0.2, 0.2)
    assert np.allclose(ids.gradH_formula(ss), 8 * 0.2 * ss.sd.h * ss.sd.V, atol=1e-14)
    ss = ids.synth_structural(0, 1, 1, nu=[0, 0, 0, 1.0])
    fr = hs.adapted_frame(ss.sd, seed=0)
    assert not ids.gradH_formula(ss).any()
    # only the roundoff-level trace terms survive
    assert ids.lemma2_cancellation(ss, fr, 0) <= 1e-30


def test_gauss_expansions(cpcp, e3):
    rng = np.random.default_rng(5)
    for shape in ((1, 1), (1, 2)):
        ss = ids.synth_structural(rng, *shape)
        A = rng.normal(size=(ss.dim, ss.dim))
        A = A + A.T
        X, Y, Z = rng.normal(size=(3, ss.dim))
        ref = ids.gauss_rhs_linear(ss, A, X, Y, Z)
        assert rel_err(ids.gauss_rhs_corrected(ss, A, X, Y, Z), ref, scale(ss)) <= 1e-12
    flat = ids.synth_structural(1, 1, 1, 0.0, 0.0)
    X, Y, Z = rng.normal(size=(3, 3))
    assert not ids.gauss_rhs_expansion(flat, np.zeros((3, 3)), X, Y, Z).any()
    assert np.allclose(ids.gauss_rhs_expansion(flat, np.eye(3), X, Y, Z), (Y @ Z) * X - (X @ Z) * Y)
    # immersed point: corrected expansion matches the definition-level oracle
    u = e3.sample_u(rng)
    pt = hs.point_data(e3, cpcp, u)
    ss = ids.sample_from_point(pt, cpcp.c)
    assert rel_err(ids.gauss_rhs_corrected(ss, pt.A, X, Y, Z), hs.gauss_definition_rhs(pt, cpcp, X, Y, Z)) <= 1e-10


def test_linear_oracles_need_a_model(cpcp, e2):
    ss = ids.sample_from_point(hs.point_data(e2, cpcp, e2.sample_u(np.random.default_rng(0))), cpcp.c)
    with pytest.raises(UsageError):
        ids.codazzi_rhs_linear(ss, np.ones(3), np.ones(3))
