"""Base-p digit machinery: expansions, Lucas' theorem, digit domination, gaps."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .algebra import is_prime
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class DigitString:
    base: int
    digits: tuple[int, ...]  # least significant first, no high zeros

    @property
    def value(self) -> int:
        v = 0
        for d in reversed(self.digits):
            v = v * self.base + d
        return v

    def __len__(self):
        return len(self.digits)

    def __getitem__(self, i: int) -> int:
        # positions past the top read as zero
        return self.digits[i] if 0 <= i < len(self.digits) else 0

    def __str__(self):
        # most significant first, the usual way to write a number
        return "".join(str(d) for d in reversed(self.digits)) or "0"


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise InvalidArgumentError(f"base {p} is not prime")


def p_ary(n: int, p: int) -> DigitString:
    _check_prime(p)
    if n < 0:
        raise InvalidArgumentError("p_ary needs n >= 0")
    digits = []
    while n:
        n, d = divmod(n, p)
        digits.append(d)
    return DigitString(p, tuple(digits))


def lucas_binom(N: int, n: int, p: int) -> int:
    """``C(N, n) mod p`` as the digitwise product of small binomials."""
    _check_prime(p)
    if n < 0 or N < 0 or n > N:
        return 0
    out = 1
    while n:
        N, a = divmod(N, p)
        n, b = divmod(n, p)
        if b > a:
            return 0
        out = out * math.comb(a, b) % p
    return out


def digit_dominates(n: int, N: int, p: int) -> bool:
    """True iff every base-p digit of ``n`` is at most the matching digit of ``N``."""
    _check_prime(p)
    if n < 0 or N < 0:
        return False
    while n:
        N, a = divmod(N, p)
        n, b = divmod(n, p)
        if b > a:
            return False
    return True


@dataclass(frozen=True)
class GapCensus:
    gap_count: int
    gaps: tuple[tuple[int, int], ...]  # (start index, run length)
    pattern_positions: dict


def find_word(digits: DigitString, word_high_to_low: str) -> list[int]:
    """Low indices ``i`` where the word (written high digit first) sits.

    ``"0q1"`` at ``i`` means digit ``i`` is 1, ``i+1`` is ``q = p-1`` and
    ``i+2`` is 0.  Positions above the top digit read as zero, but the word
    must touch at least one stored digit.
    """
    p = digits.base
    word = [p - 1 if ch == "q" else int(ch) for ch in reversed(word_high_to_low)]
    k = len(word)
    return [i for i in range(len(digits))
            if all(digits[i + t] == word[t] for t in range(k))]


def gap_census(j: int, p: int, gamma: int) -> GapCensus:
    if gamma < 1:
        raise InvalidArgumentError("gamma must be >= 1")
    P = p_ary(j, p)
    gaps = []
    i, L = 0, len(P)
    while i < L:
        if P[i] != 0:
            i += 1
            continue
        start = i
        while i < L and P[i] == 0:
            i += 1
        # a run touching index 0 has no nonzero below it; the top digit is
        # nonzero by construction so every interior run is closed above
        if start > 0 and i < L and i - start >= gamma:
            gaps.append((start, i - start))
    patterns = {"0q1": find_word(P, "0q1"), "10": find_word(P, "10")}
    return GapCensus(len(gaps), tuple(gaps), patterns)
