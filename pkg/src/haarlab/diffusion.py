"""Rank growth of pulled-back characters and separating-set certificates.

Nothing here declares an automaton diffusive.  Trajectories give finite-N
densities; :func:`diffusion_hypothesis` and the separating-set tools say
whether a known sufficient condition applies.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .algebra import Character, Endo, Group, Site, _site
from .errors import InvalidArgumentError, NotAMemberError
from .lca import CharOrbit, Lca, lca_power_coeffs
from .numtheory import digit_dominates, find_word, lucas_binom, p_ary


def _digest(obj) -> str:
    return hashlib.sha256(repr(obj).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RankTrajectory:
    lca_id: str
    char_id: str
    ranks: tuple[int, ...]  # ranks[N-1] is the rank after N steps

    @property
    def Nmax(self) -> int:
        return len(self.ranks)

    def rank(self, N: int) -> int:
        return self.ranks[N - 1]

    def rows(self):
        return [(N, r) for N, r in enumerate(self.ranks, start=1)]


def rank_trajectory(chi: Character, F: Lca, Nmax: int) -> RankTrajectory:
    if Nmax < 1:
        raise InvalidArgumentError("Nmax must be >= 1")
    if chi.is_trivial:
        raise InvalidArgumentError("rank of the trivial character is identically 0")
    orbit = CharOrbit(chi, F)
    ranks = []
    for _ in range(Nmax):
        orbit.step()
        ranks.append(orbit.rank)
    return RankTrajectory(_digest(F), _digest(chi), tuple(ranks))


def density_report(traj: RankTrajectory, thresholds: Sequence[int]) -> dict[int, float]:
    """Fraction of ``N <= Nmax`` whose rank is at least each threshold."""
    if not traj.ranks:
        raise InvalidArgumentError("empty trajectory")
    r = np.asarray(traj.ranks)
    return {int(R): float(np.count_nonzero(r >= R)) / r.size for R in thresholds}


@dataclass(frozen=True)
class SeparatingCertificate:
    j: int | None
    V: tuple[Site, ...]
    W: tuple[Site, ...]
    verified: bool
    failures: tuple[str, ...] = field(default=())


def verify_separating(coeffs: Mapping[Site, Endo], W, V, j: int | None = None
                      ) -> SeparatingCertificate:
    """Check ``g_w`` automorphic for every ``w`` in W and ``g_{w-v} = 0`` for v in V."""
    W = tuple(_site(w) for w in W)
    V = tuple(_site(v) for v in V)
    if any(all(x == 0 for x in v) for v in V):
        raise InvalidArgumentError("0 must not belong to V")
    coeffs = {_site(s): f for s, f in coeffs.items()}
    failures = []
    for w in W:
        g = coeffs.get(w)
        if g is None or not g.is_automorphism():
            failures.append(f"coefficient at {w} is not an automorphism")
        for v in V:
            s = tuple(a - b for a, b in zip(w, v))
            h = coeffs.get(s)
            if h is not None and not h.is_zero:
                failures.append(f"coefficient at {s} = {w} - {v} is nonzero")
    return SeparatingCertificate(j, V, W, not failures, tuple(failures))


def calca_coefficient(J: int, kvec: Sequence[int], p: int) -> int:
    """``C(J,k1) C(k1,k2) ... C(k_{U-1},k_U) mod p``."""
    out = 1
    top = J
    for k in kvec:
        out = out * lucas_binom(top, k, p) % p
        if not out:
            return 0
        top = k
    return out


def ledrappier_phi(N: int, m: int, p: int) -> int:
    if N < 0 or m < 0 or (N - m) % 2:
        return 0
    return lucas_binom((N + m) // 2, m, p)


def example_group(p: int) -> Group:
    return Group.vector(p, 1, 2)


def example_automaton(p: int) -> Lca:
    """The automaton with local rule ``(x, y) -> (y_0, x_0 + y_1)`` over ``(Z/p)^2``."""
    g = example_group(p)
    return Lca(g, 1, {0: Endo.matrix(g, [[0, 1], [1, 0]]),
                      1: Endo.matrix(g, [[0, 0], [0, 1]])})


def ledrappier_matrix(N: int, m: int, p: int) -> Endo:
    """Closed-form site-``m`` coefficient of the N-th power of :func:`example_automaton`."""
    if N < 0:
        raise InvalidArgumentError("N must be >= 0")
    if N == 0:
        # the formula would need phi^(-2); F^0 is the identity
        return Endo.identity(example_group(p))
    a, b, c = (ledrappier_phi(N - 2, m, p), ledrappier_phi(N - 1, m, p),
               ledrappier_phi(N, m, p))
    return Endo.matrix(example_group(p), [[a, b], [b, c]])


@dataclass(frozen=True)
class ExampleConstruction:
    certificate: SeparatingCertificate
    i0: int
    i_list: tuple[int, ...]
    words: tuple[int, ...]  # the w values; certificate sites are 2w
    checks: dict


def _example_checks(j: int, w: int, p: int, V_extent: int) -> list[str]:
    bad = []
    if not (digit_dominates(2 * w, j + w, p) and digit_dominates(2 * w, j + w - 1, p)):
        bad.append(f"w={w}: 2w not dominated by j+w and j+w-1")
    for u in range(1, V_extent + 1):
        n = 2 * w - 2 * u
        if digit_dominates(n, j + w - u, p) or digit_dominates(n, j + w - u - 1, p):
            bad.append(f"w={w}, v={2 * u}: 2w-v dominated")
    # odd offsets v = 2u+1 stay inside (0, 2V] only for u < V
    for u in range(0, V_extent):
        n = 2 * w - 2 * u - 1
        if digit_dominates(n, j + w - u - 1, p):
            bad.append(f"w={w}, v={2 * u + 1}: 2w-v dominated")
    return bad


def _ceil_log(x: int, base: int) -> int:
    k = 0
    while base**k < x:
        k += 1
    return k


def build_example_separating(j: int, p: int, V_extent: int, R: int,
                             cross_check: bool = False) -> ExampleConstruction:
    """Separating set for the 2j-th power of :func:`example_automaton`.

    Needs the word ``0q1`` (``q = p-1``) at a low index ``i0 >= L_V`` of the
    base-p expansion of j and ``L_R = ceil(log2 R)`` disjoint ``10`` words above
    it.  Each w puts a 1 right above the ``1`` of ``0q1`` and, at each chosen
    ``10`` position, a 0 or a 1 under its ``1``; that gives ``2^L_R`` words.
    """
    if V_extent < 1 or R < 1:
        raise InvalidArgumentError("V_extent and R must be positive")
    P = p_ary(j, p)
    L_V = _ceil_log(V_extent, p) + 1
    L_R = _ceil_log(R, 2)
    starts = [i for i in find_word(P, "0q1") if i >= L_V]
    if not starts:
        raise NotAMemberError(f"{j} has no '0{p - 1}1' word at index >= {L_V} in base {p}")
    tens = find_word(P, "10")
    for i0 in starts:
        chosen, floor = [], i0 + 3
        for i in tens:
            if len(chosen) == L_R:
                break
            if i >= floor:
                chosen.append(i)
                floor = i + 2
        if len(chosen) == L_R:
            break
    else:
        raise NotAMemberError(f"{j} has fewer than {L_R} '10' words above a '0{p - 1}1' word")
    words = []
    for k in range(L_R + 1):
        for S in combinations(chosen, k):
            words.append(p ** (i0 + 1) + sum(p**i for i in S))
    words.sort()
    checks = {w: _example_checks(j, w, p, V_extent) for w in words}
    failures = tuple(msg for w in words for msg in checks[w])
    W = tuple((2 * w,) for w in words)
    V = tuple((v,) for v in range(1, 2 * V_extent + 1))
    cert = SeparatingCertificate(j, V, W, not failures, failures)
    if cross_check and cert.verified:
        coeffs = lca_power_coeffs(example_automaton(p), 2 * j, method="square")
        cert = verify_separating(coeffs, W, V, j)
    return ExampleConstruction(cert, i0, tuple(chosen), tuple(words),
                               {w: not bad for w, bad in checks.items()})
