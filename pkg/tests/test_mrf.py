import itertools

import numpy as np
import pytest

from haarlab.algebra import Group
from haarlab.errors import CapExceededError, InvalidArgumentError
from haarlab.mrf import (GridMrf, Interaction, ising_mrf, lamination_fidelity,
                         lamination_kernels, make_grid_mrf, row_mrf_check, sandwich_measure,
                         sandwich_rows, uhm_ehm_check, verify_mrf_property)

Z2 = Group.cyclic(2)
NN = [(0, 0), (1, 0), (0, 1)]


def ising_by_hand(W, H, agree, disagree, torus):
    """Unnormalized weights from an explicit loop over bonds."""
    out = np.zeros((2,) * (W * H))
    for conf in itertools.product(range(2), repeat=W * H):
        g = lambda x, y: conf[(y % H) * W + (x % W)]  # noqa: E731
        w = 1.0
        for y in range(H):
            for x in range(W):
                w *= agree if g(x, y) == g(x + 1, y) else disagree
                if torus or y + 1 < H:
                    w *= agree if g(x, y) == g(x, y + 1) else disagree
        out[conf] = w
    return out / out.sum()


def _uniform(W=3, H=3, boundary="torus"):
    return make_grid_mrf(Z2, W, H, NN, np.ones((2, 2, 2)), boundary)


@pytest.mark.parametrize("boundary", ["torus", "strip"])
def test_ising_joint_matches_direct_normalization(boundary):
    mu = ising_mrf(3, 3, 2.0, 1.0, boundary)
    want = ising_by_hand(3, 3, 2.0, 1.0, boundary == "torus")
    assert np.allclose(mu.joint, want, atol=1e-14, rtol=0)
    assert mu.full_support and not np.allclose(mu.joint, 1 / 512)
    assert abs(mu.joint.sum() - 1) < 1e-10


def test_uniform_potentials_give_haar():
    mu = _uniform()
    assert np.allclose(mu.joint, 1 / 512)


def test_construction_errors():
    with pytest.raises(InvalidArgumentError):
        make_grid_mrf(Z2, 2, 2, NN, np.array([[[1, 1], [1, 0]], [[1, 1], [1, 1]]]))
    with pytest.raises(CapExceededError):
        ising_mrf(5, 5)
    with pytest.raises(InvalidArgumentError):
        make_grid_mrf(Z2, 3, 3, [(0, 0), (0, 2)], np.ones((2, 2)))
    with pytest.raises(InvalidArgumentError):
        make_grid_mrf(Z2, 3, 3, [(1, 0), (0, 1)], np.ones((2, 2)))


def test_site_dependent_potentials():
    tables = {(x, y): np.array([[1 + x, 1], [1, 2 + y]]) for x in range(2) for y in range(2)}
    mu = make_grid_mrf(Z2, 2, 2, [(0, 0), (1, 0)], tables, "strip")
    assert mu.full_support
    assert verify_mrf_property(mu, [(0, 0)]).holds


def _regions(mu):
    single = [[c] for c in mu.cells()]
    pairs = [[(x, y), ((x + 1) % mu.W, y)] for x, y in mu.cells()]
    return single + pairs


@pytest.mark.parametrize("mu", [
    ising_mrf(3, 3, 2, 1, "torus"), ising_mrf(3, 3, 2, 1, "strip"),
    ising_mrf(3, 2, 5, 1, "strip"), _uniform(),
    make_grid_mrf(Z2, 3, 3, NN, np.arange(1, 9).reshape(2, 2, 2), "torus"),
    make_grid_mrf(Group.cyclic(3), 2, 3, [(0, 0), (1, 0), (0, 1)],
                  np.random.default_rng(5).random((3, 3, 3)) + 0.1, "strip"),
], ids=["ising-torus", "ising-strip", "ising-3x2", "uniform", "triangle", "z3"])
def test_gibbs_fields_are_markov(mu):
    for region in _regions(mu):
        r = verify_mrf_property(mu, region)
        assert r.holds, (region, r.deviation)


def test_uniform_ci_deviation_is_zero():
    assert verify_mrf_property(_uniform(), [(1, 1)]).deviation < 1e-16


def test_perturbed_joint_fails():
    mu = ising_mrf(3, 3, 2, 1, "torus")
    j = mu.joint.copy()
    j[(0,) * 9] += 1e-3
    bad = mu.with_joint(j / j.sum())
    assert not all(verify_mrf_property(bad, r).holds for r in _regions(bad))
    assert not verify_mrf_property(bad, [(1, 1)]).holds


def test_lamination_uniform_and_two_rows():
    for K in lamination_kernels(_uniform(3, 3, "strip")):
        assert np.allclose(K.matrix, 1 / 8)
    mu = ising_mrf(3, 2, 3, 1, "strip")
    (K,) = lamination_kernels(mu)
    J = mu.joint.reshape(8, 8)  # [row0, row1]
    for a in range(8):
        for b in range(8):
            assert K.matrix[b, a] == pytest.approx(J[a, b] / J[a].sum(), abs=1e-14)
    assert np.allclose(K.matrix.sum(axis=0), 1, atol=1e-12)


def test_lamination_round_trip_strip():
    mu = ising_mrf(3, 3, 2, 1, "strip")
    assert lamination_fidelity(mu) <= 1e-10
    K0, K1 = (K.matrix for K in lamination_kernels(mu))
    R = mu.joint.reshape(8, 8, 8)
    r0 = R.sum(axis=(1, 2))
    for a, b, c in itertools.product(range(8), repeat=3):
        assert r0[a] * K0[b, a] * K1[c, b] == pytest.approx(R[a, b, c], abs=1e-14)


def test_sandwich_uniform():
    mu = _uniform()
    for k in sandwich_rows(mu):
        for a, c in ((0, 0), (3, 5)):
            assert np.allclose(sandwich_measure(mu, k, a, c).dist, 1 / 8)


@pytest.mark.parametrize("boundary", ["torus", "strip"])
def test_sandwich_direct_conditioning(boundary):
    mu = ising_mrf(3, 3, 2, 1, boundary)
    R = mu.joint.reshape(8, 8, 8)
    sw = sandwich_measure(mu, 1, 0, 0)
    want = R[0, :, 0] / R[0, :, 0].sum()
    assert np.allclose(sw.dist, want, atol=1e-14)
    assert int(np.argmax(sw.dist)) == 0
    assert sw.outer_dependence < 1e-12


def test_sandwich_full_support_and_row_mrf():
    for mu in (ising_mrf(3, 3, 2, 1, "strip"), ising_mrf(3, 4, 2, 1, "strip"),
               ising_mrf(3, 3, 4, 1, "torus")):
        for k in sandwich_rows(mu):
            for a in range(8):
                for c in range(8):
                    sw = sandwich_measure(mu, k, a, c)
                    assert np.all(sw.dist > 0)
                    assert sw.outer_dependence < 1e-10
                    assert row_mrf_check(mu, sw.dist).holds


def test_sandwich_strip_edge_rows_rejected():
    mu = ising_mrf(3, 3, 2, 1, "strip")
    with pytest.raises(InvalidArgumentError):
        sandwich_measure(mu, 0, 0, 0)


def test_uhm_ehm_uniform():
    rep = uhm_ehm_check(_uniform(3, 3, "strip"), 3)
    assert rep.lambda_sandwich == float("inf")
    assert rep.uhm_holds and rep.ehm_holds


@pytest.mark.parametrize("boundary", ["strip", "torus"])
def test_uhm_ehm_ising(boundary):
    rep = uhm_ehm_check(ising_mrf(3, 3, 2, 1, boundary), 4)
    assert rep.lambda_sandwich > 0
    assert rep.uhm_holds and rep.ehm_holds
    assert rep.triplex_deviation < 1e-12
    assert rep.sandwich_min_prob > 0


def test_uhm_ehm_near_deterministic():
    rep = uhm_ehm_check(ising_mrf(3, 3, 1e6, 1, "strip"), 4)
    # the exact value is ~1e-12, below double resolution of 1 - |mu^|
    assert 0 <= rep.lambda_sandwich < 1e-3
    assert rep.uhm_holds and rep.ehm_holds


def test_ehm_follows_uhm_on_random_fields():
    rng = np.random.default_rng(17)
    for _ in range(4):
        table = rng.random((2, 2, 2)) + 0.2
        rep = uhm_ehm_check(make_grid_mrf(Z2, 3, 3, NN, table, "strip"), 3)
        if rep.uhm_holds:
            assert rep.ehm_holds


def test_from_joint_accepts_any_law():
    mu = GridMrf.from_joint(Z2, 2, 2, np.full(16, 1 / 16), "strip")
    assert mu.full_support and verify_mrf_property(mu, [(0, 0)]).holds
    with pytest.raises(InvalidArgumentError):
        GridMrf.from_joint(Z2, 2, 2, np.full(16, 1 / 8), "strip")
    with pytest.raises(InvalidArgumentError):
        GridMrf.from_interactions(Z2, 2, 2, [Interaction(((0, 0),), np.ones(2))], "klein")
