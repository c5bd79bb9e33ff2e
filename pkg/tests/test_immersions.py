import numpy as np
import pytest

from kahlerprod import fd, immersions
from kahlerprod.errors import UsageError


@pytest.mark.parametrize("make", [immersions.flat_slice, immersions.chart_sphere, immersions.random_graph,
                                  immersions.factor2_hyperplane])
@pytest.mark.parametrize("d", [4, 6])
def test_closed_form_derivatives_match_fd(make, d, rng):
    imm = make(d=d)
    u = imm.sample_u(rng)
    assert imm.coords(u).shape == (d,)
    J = imm.jac(u)
    assert np.allclose(J, fd.partials(imm.coords, u).T, atol=1e-9)
    Hfd = np.transpose(fd.partials(imm.jac, u), (1, 2, 0))
    assert np.allclose(imm.hess(u), Hfd, atol=1e-8)


def test_sphere_lies_on_sphere(rng):
    imm = immersions.chart_sphere(r=0.7)
    for _ in range(5):
        assert np.linalg.norm(imm.coords(imm.sample_u(rng))) == pytest.approx(0.7)


def test_graph_is_seeded():
    u = np.array([0.1, -0.2, 0.3])
    a = immersions.random_graph(seed=3).coords(u)
    assert np.array_equal(a, immersions.random_graph(seed=3).coords(u))
    assert not np.array_equal(a, immersions.random_graph(seed=4).coords(u))


def test_parse_immersion():
    assert immersions.parse_immersion("e1").name == "e1"
    assert immersions.parse_immersion("e2(r=0.25)").params == {"r": 0.25}
    assert immersions.parse_immersion(" e3( seed=9, amp=0.05 )").params == {"seed": 9, "amp": 0.05}
    assert immersions.parse_immersion("e2", d=6).ambient_dim == 6
    for bad in ("e4", "e2(q=1)", "e3(seed=x)", "e2(r)", "e2(r=-1)"):
        with pytest.raises(UsageError):
            immersions.parse_immersion(bad)
