import itertools

import pytest

from haarlab.algebra import Character, Endo, Group
from haarlab.diffusion import (RankTrajectory, build_example_separating, calca_coefficient,
                               density_report, example_automaton, example_group,
                               ledrappier_matrix, ledrappier_phi, rank_trajectory,
                               verify_separating)
from haarlab.errors import InvalidArgumentError, NotAMemberError
from haarlab.lca import compose_char, lca_power_coeffs, make_lca, Lca
from haarlab.numtheory import digit_dominates

Z2, Z8 = Group.cyclic(2), Group.cyclic(8)
LIND = make_lca(Z2, 1, {-1: 1, 1: 1})


def test_rank_trajectory_examples():
    G = make_lca(Z2, 1, {0: 1, 1: 1})
    t = rank_trajectory(Character(Z2, {0: 1}), G, 16)
    assert t.rank(3) == 4 and t.rank(4) == 2
    assert all(t.rank(N) == 2 ** bin(N).count("1") for N in range(1, 17))
    c = rank_trajectory(Character(Z8, {0: 1}), make_lca(Z8, 1, {0: 1, 1: 2}), 64)
    assert all(c.rank(4 * k) == 1 for k in range(1, 17))
    chi = Character(Z8, {0: 3, 2: 1})
    F = make_lca(Z8, 1, {0: 1, -1: 5})
    assert rank_trajectory(chi, F, 1).rank(1) == compose_char(chi, F).rank
    with pytest.raises(InvalidArgumentError):
        rank_trajectory(Character(Z2, {}), G, 4)


def test_trajectory_matches_power_coefficients():
    g = Group.cyclic(6)
    F = make_lca(g, 1, {-1: 1, 0: 2, 2: 5})
    chi = Character(g, {0: 1, 1: 4})
    t = rank_trajectory(chi, F, 32)
    for N in range(1, 33):
        G = Lca(g, 1, lca_power_coeffs(F, N))
        assert t.rank(N) == compose_char(chi, G).rank


def test_density_report_examples():
    const = RankTrajectory("f", "c", (1, 1, 1, 1))
    assert density_report(const, [2]) == {2: 0.0}
    assert density_report(const, [0]) == {0: 1.0}
    t = rank_trajectory(Character(Z2, {0: 1}), LIND, 255)
    want = sum(bin(N).count("1") >= 3 for N in range(1, 256)) / 255
    assert density_report(t, [8])[8] == want
    d = density_report(t, [1, 2, 4, 8, 16, 32])
    vals = list(d.values())
    assert vals == sorted(vals, reverse=True)


def test_counterexample_density_bounded():
    t = rank_trajectory(Character(Z8, {0: 1}), make_lca(Z8, 1, {0: 1, 1: 2}), 256)
    for Nmax in range(4, 257, 4):
        sub = RankTrajectory("", "", t.ranks[:Nmax])
        assert density_report(sub, [2])[2] <= 0.75


def test_verify_separating_examples():
    coeffs = {(0,): Endo.scalar(Z2, 1), (4,): Endo.scalar(Z2, 1)}
    assert verify_separating(coeffs, [(4,)], [(1,), (2,), (3,)]).verified
    assert verify_separating(coeffs, [(0,), (4,)], []).verified
    bad = {(0,): Endo.scalar(Z8, 1), (1,): Endo.scalar(Z8, 2)}
    assert not verify_separating(bad, [(1,)], []).verified
    with pytest.raises(InvalidArgumentError):
        verify_separating(coeffs, [(4,)], [(0,)])


def test_calca_examples():
    assert calca_coefficient(3, (1, 1), 2) == 1
    assert calca_coefficient(9, (0, 0, 0), 3) == 1
    assert calca_coefficient(4, (2, 1), 2) == 0


@pytest.mark.parametrize("p", [2, 3])
def test_calca_nonvanishing_is_chained_domination(p):
    for J in range(0, 65):
        for U in (1, 2, 3):
            for k in itertools.product(range(0, min(J, 8) + 1), repeat=U):
                chain = [J, *k]
                dominated = all(digit_dominates(b, a, p) for a, b in zip(chain, chain[1:]))
                assert (calca_coefficient(J, k, p) != 0) == dominated


def test_ledrappier_phi_examples():
    assert ledrappier_phi(4, 1, 5) == 0
    assert ledrappier_phi(4, 2, 2) == 1
    assert ledrappier_phi(2, 0, 3) == 1


def test_ledrappier_matrix_examples():
    g = example_group(2)
    assert ledrappier_matrix(2, 1, 2) == Endo.matrix(g, [[0, 1], [1, 0]])
    assert ledrappier_matrix(5, 9, 2).is_zero
    assert ledrappier_matrix(0, 0, 3) == Endo.identity(example_group(3))
    with pytest.raises(InvalidArgumentError):
        ledrappier_matrix(-1, 0, 2)


def test_separating_example_words():
    j = 2**6 + 2**7 + 2**11 + 2**14
    ex = build_example_separating(j, 2, 3, 4)
    assert ex.i0 == 6 and ex.i_list == (10, 13)
    assert ex.words == (128, 1152, 8320, 9344)
    assert ex.certificate.verified and len(ex.certificate.W) == 4


def test_separating_needs_pattern():
    with pytest.raises(NotAMemberError):
        build_example_separating(2**10, 2, 1, 1)
    with pytest.raises(NotAMemberError):
        # "011" present but no "10" word above it
        build_example_separating(2**4 + 2**5, 2, 1, 2)


@pytest.mark.parametrize("j,p,V,R", [(38, 2, 1, 2), (2 + 4 + 32 + 128, 2, 1, 4),
                                     (2**6 + 2**7 + 2**11 + 2**14, 2, 3, 4)])
def test_separating_cross_module(j, p, V, R):
    ex = build_example_separating(j, p, V, R)
    assert ex.certificate.verified
    method = "fold" if j < 500 else "square"
    coeffs = lca_power_coeffs(example_automaton(p), 2 * j, method=method)
    assert verify_separating(coeffs, ex.certificate.W, ex.certificate.V, j).verified


def test_separating_odd_prime_is_reported_unverified():
    # for odd p, 2w carries a digit 2 where j+w has a carry-out 0
    j = 1 * 3 + 2 * 9 + 3**5
    ex = build_example_separating(j, 3, 1, 2)
    assert not ex.certificate.verified and ex.certificate.failures
    coeffs = lca_power_coeffs(example_automaton(3), 2 * j, method="fold")
    assert not verify_separating(coeffs, ex.certificate.W, ex.certificate.V, j).verified


@pytest.mark.parametrize("p", [2, 3])
def test_ledrappier_matches_direct_power(p):
    F = example_automaton(p)
    acc = {(0,): Endo.identity(example_group(p))}
    for N in range(0, 65):
        if N:
            acc = _step(acc, F)
        for m in range(0, N + 1):
            want = acc.get((m,), Endo.zero(example_group(p)))
            assert ledrappier_matrix(N, m, p) == want


def _step(acc, F):
    out = {}
    for (u,), f in acc.items():
        for (v,), g in F.coeffs.items():
            h = f.compose(g)
            out[(u + v,)] = out[(u + v,)] + h if (u + v,) in out else h
    return {k: v for k, v in out.items() if not v.is_zero}
