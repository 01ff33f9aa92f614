import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from haarlab.algebra import (Character, Endo, Group, Phase, char_eval, char_rank,
                             endo_adjoint, endo_apply, factorize, is_automorphism, pair)
from haarlab.errors import GroupMismatchError, InvalidArgumentError
from haarlab.lca import Configuration

GROUPS = [Group.cyclic(2), Group.cyclic(6), Group.cyclic(8), Group.vector(2, 1, 2),
          Group.vector(3, 2, 2), Group.vector(2, 2, 3)]


@pytest.mark.parametrize("n,expected", [
    (8, [(2, 3)]), (6, [(2, 1), (3, 1)]), (360, [(2, 3), (3, 2), (5, 1)]),
    (97, [(97, 1)]), (2, [(2, 1)]),
])
def test_factorize(n, expected):
    assert factorize(n) == expected
    assert math.prod(p**k for p, k in expected) == n


@pytest.mark.parametrize("n", [0, 1, -4])
def test_factorize_rejects_small(n):
    with pytest.raises(InvalidArgumentError):
        factorize(n)


@given(st.integers(2, 10**6))
def test_factorize_roundtrip(n):
    f = factorize(n)
    assert math.prod(p**k for p, k in f) == n
    assert [p for p, _ in f] == sorted({p for p, _ in f})


def test_group_validation():
    with pytest.raises(InvalidArgumentError):
        Group.cyclic(1)
    with pytest.raises(InvalidArgumentError):
        Group.vector(4, 1, 2)
    g = Group.vector(3, 2, 2)
    assert g.exponent == 9 and g.order == 81
    assert g.crt_decompose() == [(3, 2)]


def test_endo_apply_examples():
    z8 = Group.cyclic(8)
    assert endo_apply(Endo.scalar(z8, 2), 5) == (2,)
    v = Group.vector(2, 1, 2)
    swap = Endo.matrix(v, [[0, 1], [1, 0]])
    assert endo_apply(swap, (1, 0)) == (0, 1)
    for g in GROUPS:
        ident = Endo.identity(g)
        for a in g.elements()[:20]:
            assert endo_apply(ident, a) == a


def test_endo_group_mismatch():
    with pytest.raises(GroupMismatchError):
        Endo.matrix(Group.cyclic(4), [[1]])
    with pytest.raises(GroupMismatchError):
        Endo.scalar(Group.vector(2, 1, 2), 1)
    with pytest.raises(GroupMismatchError):
        endo_apply(Endo.scalar(Group.cyclic(4), 1), (1, 2))


def test_adjoint_examples():
    z8 = Group.cyclic(8)
    assert endo_adjoint(Endo.scalar(z8, 3)) == Endo.scalar(z8, 3)
    v = Group.vector(2, 1, 2)
    d = Endo.matrix(v, [[0, 0], [0, 1]])
    assert endo_adjoint(d) == d
    assert endo_adjoint(Endo.matrix(v, [[1, 1], [0, 1]])) == Endo.matrix(v, [[1, 0], [1, 1]])


def _random_endo(g, rng):
    return Endo(g, rng.integers(0, g.exponent, size=(g.dim, g.dim)).tolist())


def _random_elt(g, rng):
    return tuple(int(x) for x in rng.integers(0, g.exponent, size=g.dim))


@pytest.mark.parametrize("g", GROUPS, ids=str)
def test_adjoint_identity(g, rng):
    for _ in range(1000):
        f, c, a = _random_endo(g, rng), _random_elt(g, rng), _random_elt(g, rng)
        assert pair(endo_adjoint(f).apply(c), a, g) == pair(c, endo_apply(f, a), g)


def test_is_automorphism_examples():
    z8 = Group.cyclic(8)
    assert is_automorphism(Endo.scalar(z8, 3))
    assert not is_automorphism(Endo.scalar(z8, 2))
    v = Group.vector(2, 1, 2)
    assert is_automorphism(Endo.matrix(v, [[0, 1], [1, 0]]))
    assert not is_automorphism(Endo.matrix(v, [[1, 1], [1, 1]]))


@pytest.mark.parametrize("g", [Group.cyclic(8), Group.cyclic(12), Group.vector(2, 1, 2),
                               Group.vector(3, 1, 2), Group.vector(2, 2, 2)], ids=str)
def test_is_automorphism_matches_inverse_search(g, rng):
    # order <= 16: look for a two-sided inverse among all endomorphisms
    q, J = g.exponent, g.dim
    all_endos = [Endo(g, np.array(e).reshape(J, J).tolist())
                 for e in itertools.product(range(q), repeat=J * J)]
    ident = Endo.identity(g)
    picks = rng.choice(len(all_endos), size=min(40, len(all_endos)), replace=False)
    for i in picks:
        f = all_endos[i]
        has_inverse = any(f.compose(h) == ident and h.compose(f) == ident for h in all_endos)
        assert is_automorphism(f) == has_inverse


def test_pair_examples():
    z4 = Group.cyclic(4)
    assert pair(1, 3, z4) == Phase(3, 4)
    assert pair(0, 3, z4) == Phase(0, 4)
    v = Group.vector(2, 1, 2)
    assert pair((1, 1), (1, 1), v) == Phase(0, 2)


@given(st.integers(-50, 50), st.integers(1, 30), st.integers(-50, 50), st.integers(1, 30))
def test_phase_arithmetic_matches_complex(a, m, b, n):
    x, y = Phase(a, m), Phase(b, n)
    assert abs((x + y).to_complex() - x.to_complex() * y.to_complex()) < 1e-12
    assert (x + y).modulus == math.lcm(m, n)
    assert x - x == Phase(0, 1)


def test_phase_equality_is_fractional():
    assert Phase(1, 2) == Phase(3, 6)
    assert Phase(5, 5) == Phase(0, 1)
    assert hash(Phase(1, 2)) == hash(Phase(2, 4))


def test_char_eval_examples():
    z2 = Group.cyclic(2)
    a = Configuration(z2, [1, 0, 1])
    assert char_eval(Character(z2, {}), a) == Phase(0, 1)
    assert char_eval(Character(z2, {0: 1}), a) == Phase(1, 2)
    z6 = Group.cyclic(6)
    chi = Character(z6, {0: 2, 1: 3})
    b = Configuration(z6, [1, 1, 0, 0])
    ph = char_eval(chi, b)
    assert ph == Phase(5, 6)
    direct = cmath.exp(2j * math.pi * 2 / 6) * cmath.exp(2j * math.pi * 3 / 6)
    assert abs(ph.to_complex() - direct) < 1e-12


def test_char_eval_window_checks():
    z2 = Group.cyclic(2)
    a = Configuration(z2, [1, 0, 1])
    chi = Character(z2, {5: 1})
    assert char_eval(chi, a) == Phase(1, 2)  # site 5 wraps to 2, where a = 1
    with pytest.raises(InvalidArgumentError):
        char_eval(chi, a, torus=False)


def test_char_rank_examples():
    z4 = Group.cyclic(4)
    assert char_rank(Character(z4, {})) == 0
    assert char_rank(Character(z4, {3: 2})) == 1
    assert char_rank(Character(z4, {0: 1, 5: 3})) == 2
    assert char_rank(Character(z4, {0: 4})) == 0


@given(st.dictionaries(st.integers(-5, 5), st.integers(0, 5), max_size=6),
       st.integers(-5, 5), st.integers(1, 5))
def test_rank_invariant_under_add_then_subtract(coeffs, site, value):
    g = Group.cyclic(6)
    chi = Character(g, coeffs)
    delta = Character(g, {site: value})
    again = (chi + delta) - delta
    assert again == chi and again.rank == chi.rank
