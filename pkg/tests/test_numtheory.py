import re

import pytest
from hypothesis import given, strategies as st

from haarlab.errors import InvalidArgumentError
from haarlab.numtheory import digit_dominates, gap_census, lucas_binom, p_ary


def pascal_mod(Nmax, p):
    rows = [[1]]
    for N in range(1, Nmax + 1):
        prev = rows[-1]
        rows.append([1] + [(prev[k - 1] + prev[k]) % p for k in range(1, N)] + [1])
    return rows


def test_p_ary_examples():
    assert p_ary(34, 3).digits == (1, 2, 0, 1)
    assert str(p_ary(34, 3)) == "1021"
    assert p_ary(0, 2).digits == ()
    assert p_ary(7, 2).digits == (1, 1, 1)
    with pytest.raises(InvalidArgumentError):
        p_ary(5, 4)


@given(st.integers(0, 10**12), st.sampled_from([2, 3, 5, 7, 11]))
def test_p_ary_roundtrip(n, p):
    d = p_ary(n, p)
    assert d.value == n
    assert not d.digits or d.digits[-1] != 0


def test_lucas_examples():
    assert lucas_binom(34, 7, 3) == 1
    assert lucas_binom(9, 0, 5) == 1
    assert lucas_binom(4, 2, 2) == 0
    assert lucas_binom(3, 5, 2) == 0


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_lucas_and_domination_against_pascal(p):
    rows = pascal_mod(120, p)
    for N, row in enumerate(rows):
        for n, v in enumerate(row):
            assert lucas_binom(N, n, p) == v
            assert digit_dominates(n, N, p) == (v != 0)


def test_digit_dominates_examples():
    assert digit_dominates(5, 7, 2)
    assert not digit_dominates(2, 5, 2)
    for n in range(30):
        assert digit_dominates(n, n, 3)


def _scan_gaps(j, p, gamma):
    # independent scanner: regex over the written (most significant first) form
    text = str(p_ary(j, p)) if j else ""
    runs = re.finditer(r"(?<=[1-9])0+(?=[1-9])", text)
    return sum(1 for m in runs if len(m.group()) >= gamma)


def test_gap_census_examples():
    assert gap_census(34, 3, 1).gap_count == 1
    assert gap_census(2**6, 2, 5).gap_count == 0
    assert gap_census(3**4, 3, 3).gap_count == 0
    assert gap_census(7, 2, 1).gap_count == 0


@given(st.integers(0, 2**40), st.sampled_from([2, 3, 5]), st.integers(1, 4))
def test_gap_census_matches_regex_scanner(j, p, gamma):
    assert gap_census(j, p, gamma).gap_count == _scan_gaps(j, p, gamma)


def test_pattern_positions():
    j = 2**6 + 2**7 + 2**11 + 2**14
    pats = gap_census(j, 2, 1).pattern_positions
    assert 6 in pats["0q1"]
    assert 10 in pats["10"] and 13 in pats["10"]
    # base 3: digits (low first) 1,2,0 spell "0q1" at index 0
    assert gap_census(1 + 2 * 3, 3, 1).pattern_positions["0q1"] == [0]


def test_census_density_nondecreasing():
    gamma, R = 1, 2
    prev = -1.0
    for L in range(gamma * R + 2 * R, 15):
        frac = sum(gap_census(j, 2, gamma).gap_count >= R for j in range(2**L)) / 2**L
        assert frac >= prev
        prev = frac
