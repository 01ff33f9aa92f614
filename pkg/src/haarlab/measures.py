"""Exactly evaluable shift-space measures and harmonic-mixing analytics.

Every measure reduces Fourier coefficients and cylinder probabilities to one
primitive, :meth:`_Measure.expect_product`: the expectation of
``prod_t w[t, a_{start+t}]`` for per-site letter weight vectors ``w``.  A
character uses its phase columns as weights, a cylinder uses indicators.

Orientation: transition matrices are column-stochastic and act on column
distributions, ``eta_{n+1} = Q^{(n)} @ eta_n``; ``Q[b, a] = P(next = b | now = a)``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from ._parallel import worker_count
from .algebra import Character, Group, Phase, character_table, pair
from .errors import (CapExceededError, InvalidArgumentError, UnsupportedError,
                     WindowOverflowError)
from .lca import CharOrbit, Lca, char_power

TOL = 1e-12
BIT_CAP = 24


def _table(group: Group) -> np.ndarray:
    return character_table(group)


def _stochastic_columns(Q: np.ndarray, what: str) -> None:
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise InvalidArgumentError(f"{what} must be square")
    if np.any(Q < -TOL) or np.any(np.abs(Q.sum(axis=0) - 1) > TOL):
        raise InvalidArgumentError(f"{what} is not column-stochastic")


def _stationary(Q: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eig(Q)
    k = int(np.argmin(np.abs(vals - 1)))
    v = np.real(vecs[:, k])
    v = np.abs(v) / np.abs(v).sum()
    # polish against eigensolver noise
    for _ in range(50):
        v = Q @ v
    return v / v.sum()


class _Measure:
    group: Group

    @property
    def alphabet_size(self) -> int:
        return self.group.order

    def expect_product(self, start: int, weights: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def fourier(self, chi: Character) -> complex:
        if chi.group != self.group:
            raise InvalidArgumentError(f"character over {chi.group}, measure over {self.group}")
        if chi.is_trivial:
            return 1.0 + 0j
        if chi.dimension != 1:
            raise UnsupportedError("shift-space measures live on Z")
        sites = [s[0] for s in chi.coeffs]
        s0, s1 = sites[0], sites[-1]
        idx = np.zeros(s1 - s0 + 1, dtype=np.int64)
        for s, c in chi.coeffs.items():
            idx[s[0] - s0] = self.group.index(c)
        return complex(self.fourier_window(s0, idx[None, :])[0])

    def fourier_window(self, start: int, coeff_idx: np.ndarray) -> np.ndarray:
        """Batch of characters given as dual-element indices per site, shape (B, T)."""
        coeff_idx = np.asarray(coeff_idx, dtype=np.int64)
        return self.expect_product(start, _table(self.group)[coeff_idx])

    def cylinder(self, assignment: Mapping) -> float:
        """Probability that ``a_s = value`` for every ``s -> value`` in ``assignment``."""
        if not assignment:
            return 1.0
        items = {_int_site(s): self.group.index(self.group.element(v))
                 for s, v in assignment.items()}
        s0, s1 = min(items), max(items)
        w = np.ones((1, s1 - s0 + 1, self.alphabet_size))
        for s, i in items.items():
            w[0, s - s0, :] = 0
            w[0, s - s0, i] = 1
        return float(np.real(self.expect_product(s0, w)[0]))


def _int_site(s) -> int:
    if isinstance(s, (tuple, list)):
        if len(s) != 1:
            raise UnsupportedError("shift-space measures live on Z")
        s = s[0]
    return int(s)


class Bernoulli(_Measure):
    kind = "bernoulli"

    def __init__(self, group: Group, weights):
        if isinstance(weights, Mapping):
            w = np.zeros(group.order)
            for a, p in weights.items():
                w[group.index(group.element(a))] += p
        else:
            w = np.asarray(weights, dtype=float)
        if w.shape != (group.order,):
            raise InvalidArgumentError(f"need {group.order} weights, got {w.shape}")
        if np.any(w < 0) or abs(w.sum() - 1) > TOL:
            raise InvalidArgumentError("weights must be nonnegative and sum to 1")
        self.group = group
        self.weights = w
        self.full_support = bool(np.all(w > 0))
        self.letter_transform = _table(group) @ w

    def expect_product(self, start, weights):
        return np.prod(np.asarray(weights) @ self.weights, axis=1)

    def fourier(self, chi):
        if chi.group != self.group:
            raise InvalidArgumentError(f"character over {chi.group}, measure over {self.group}")
        counts: dict[int, int] = {}
        for c in chi.coeffs.values():
            i = self.group.index(c)
            counts[i] = counts.get(i, 0) + 1
        out = 1.0 + 0j
        for i, k in counts.items():
            out *= self.letter_transform[i] ** k
        return complex(out)

    def ehm_lambda(self) -> float:
        m = float(np.max(np.abs(self.letter_transform[1:])))
        return math.inf if m < TOL else -math.log(m)

    def sample(self, uniforms: np.ndarray) -> np.ndarray:
        cdf = np.cumsum(self.weights)
        cdf[-1] = 1.0
        return np.searchsorted(cdf, uniforms, side="right").clip(0, self.alphabet_size - 1)


def haar(group: Group) -> Bernoulli:
    return Bernoulli(group, np.full(group.order, 1.0 / group.order))


def haar_cylinder(group: Group, k: int) -> float:
    return group.order ** (-k)


class MarkovChain(_Measure):
    """Markov chain on ``A^Z`` with a cycled family of transition matrices.

    ``transitions[n % k]`` moves site n to site n+1.  Without ``eta0`` the
    chain starts from the stationary law of the cycle product, making the
    one-site laws periodic with period k.

    ``block > 1`` marks a chain whose states are length-``block`` words
    (lexicographic index) as produced by :meth:`NStepMarkov.recode`; a state at
    site n is the word ending at n.
    """

    kind = "markov"

    def __init__(self, group: Group, transitions, eta0=None, block: int = 1):
        Qs = np.asarray(transitions, dtype=float)
        if Qs.ndim == 2:
            Qs = Qs[None]
        S = group.order**block
        if Qs.ndim != 3 or Qs.shape[1:] != (S, S):
            raise InvalidArgumentError(f"transition matrices must be {S}x{S}")
        for i, Q in enumerate(Qs):
            _stochastic_columns(Q, f"transition {i}")
        if eta0 is None:
            cyc = np.eye(S)
            for Q in Qs:
                cyc = Q @ cyc
            eta0 = _stationary(cyc)
        eta0 = np.asarray(eta0, dtype=float)
        if eta0.shape != (S,) or np.any(eta0 < -TOL) or abs(eta0.sum() - 1) > TOL:
            raise InvalidArgumentError("initial distribution is not a probability vector")
        etas = [eta0]
        for Q in Qs[:-1]:
            etas.append(Q @ etas[-1])
        self.group = group
        self.block = block
        self.transitions = Qs
        self.etas = np.array(etas)
        self.periodic = bool(np.allclose(Qs[-1] @ etas[-1], eta0, atol=1e-10))
        self.full_support = bool(np.all(Qs > 0) and np.all(self.etas > 0))
        self.semistationary_closed = self._closed()
        A = group.order
        self._letters = np.array(list(itertools.product(range(A), repeat=block)),
                                 dtype=np.int64).reshape(S, block)

    def _closed(self) -> bool:
        for Q in self.transitions:
            for eta in self.etas:
                nxt = Q @ eta
                if not any(np.allclose(nxt, e, atol=1e-10) for e in self.etas):
                    return False
        return True

    @property
    def period(self) -> int:
        return len(self.transitions)

    def eta_at(self, n: int) -> np.ndarray:
        """One-site (or one-word) law at site ``n``."""
        k = self.period
        if self.periodic:
            return self.etas[n % k]
        if n < 0:
            raise InvalidArgumentError("a non-periodic chain starts at site 0")
        eta = self.etas[0]
        for t in range(n):
            eta = self.transitions[t % k] @ eta
        return eta

    def expect_product(self, start, weights):
        weights = np.asarray(weights)
        B, T, _ = weights.shape
        U, k = self.block, self.period
        if T < U:
            weights = np.concatenate([weights, np.ones((B, U - T, weights.shape[2]))], axis=1)
            T = U
        L = self._letters
        first = np.ones((B, L.shape[0]), dtype=np.complex128)
        for t in range(U):
            first *= weights[:, t, :][:, L[:, t]]
        rest = weights[:, U:, :][:, :, L[:, U - 1]]
        mult = np.concatenate([first[:, None, :], rest], axis=1)
        t0 = start + U - 1
        qindex = np.array([(t0 + t) % k for t in range(mult.shape[1] - 1)], dtype=np.intp)
        return kernels.transfer_forward(self.eta_at(t0), self.transitions, qindex, mult)

    def ehm_lambda(self) -> float:
        if self.block != 1:
            raise UnsupportedError("use ehm_lambda with an explicit group for recoded chains")
        return ehm_lambda(self.transitions, self.group)

    def sample_path(self, uniforms: np.ndarray, start: int = 0) -> np.ndarray:
        """Letters at sites ``start .. start+T-1`` from (S, T) uniforms."""
        S, T = uniforms.shape
        U, k = self.block, self.period
        t0 = start + U - 1
        state = _inverse_cdf(np.cumsum(self.eta_at(t0)), uniforms[:, 0])
        letters = np.empty((S, T), dtype=np.int64)
        head = self._letters[state]
        m = min(U, T)
        letters[:, :m] = head[:, :m]
        cdfs = np.cumsum(self.transitions, axis=1)  # cdfs[q, :, a] over next states
        for t in range(U, T):
            qi = (t0 + t - U) % k
            state = _column_inverse_cdf(cdfs[qi], state, uniforms[:, t - U + 1])
            letters[:, t] = self._letters[state, U - 1]
        return letters


def _inverse_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def _column_inverse_cdf(cdf: np.ndarray, state: np.ndarray, u: np.ndarray) -> np.ndarray:
    cols = cdf[:, state].T  # (S, n)
    return np.minimum((cols <= u[:, None]).sum(axis=1), cdf.shape[0] - 1)


class NStepMarkov(_Measure):
    """Stationary U-step chain given by its (U+1)-letter block law."""

    kind = "nstep"

    def __init__(self, group: Group, U: int, block_probs):
        A = group.order
        P = np.asarray(block_probs, dtype=float).reshape((A,) * (U + 1))
        if U < 1:
            raise InvalidArgumentError("U must be >= 1")
        if np.any(P < 0) or abs(P.sum() - 1) > TOL:
            raise InvalidArgumentError("block probabilities must be a distribution")
        lead, trail = P.sum(axis=-1), P.sum(axis=0)
        if np.max(np.abs(lead - trail)) > TOL:
            raise InvalidArgumentError("overlapping U-letter marginals disagree")
        self.group, self.U, self.block_probs = group, U, P
        self.full_support = bool(np.all(P > 0))
        self._marginal = lead

    @classmethod
    def from_kernel(cls, group: Group, U: int, kernel) -> "NStepMarkov":
        """Build from ``kernel[a_0..a_{U-1}, a_U] = P(a_U | previous U letters)``."""
        A = group.order
        K = np.asarray(kernel, dtype=float).reshape(A**U, A)
        S = A**U
        Q = np.zeros((S, S))
        for s in range(S):
            for b in range(A):
                Q[(s * A + b) % S, s] += K[s, b]
        pi = _stationary(Q)
        return cls(group, U, (pi[:, None] * K).reshape((A,) * (U + 1)))

    def word_prob(self, word: Sequence[int]) -> float:
        """Probability of consecutive letters (indices) by the chain rule."""
        U = self.U
        word = tuple(int(x) for x in word)
        if len(word) <= U + 1:
            m = self.block_probs
            for _ in range(U + 1 - len(word)):
                m = m.sum(axis=-1)
            return float(m[word]) if word else 1.0
        p = float(self.block_probs[word[:U + 1]])
        for t in range(U + 1, len(word)):
            denom = self._marginal[word[t - U:t]]
            if denom == 0:
                return 0.0
            p *= self.block_probs[word[t - U:t + 1]] / denom
        return p

    def expect_product(self, start, weights):
        weights = np.asarray(weights)
        B, T, A = weights.shape
        if A**T > 4096:
            return self.recode().expect_product(start, weights)
        # short windows: sum over words straight from the block law
        out = np.zeros(B, dtype=np.complex128)
        for word in itertools.product(range(A), repeat=T):
            p = self.word_prob(word)
            if p:
                out += p * np.prod(weights[:, np.arange(T), list(word)], axis=1)
        return out

    def recode(self) -> MarkovChain:
        """Equivalent 1-step chain on length-U words."""
        if getattr(self, "_recoded", None) is None:
            self._recoded = self._build_recoding()
        return self._recoded

    def _build_recoding(self) -> MarkovChain:
        A, U = self.group.order, self.U
        S = A**U
        P = self.block_probs.reshape(S, A)
        marg = self._marginal.reshape(S)
        Q = np.zeros((S, S))
        for s in range(S):
            if marg[s] > 0:
                row = P[s] / marg[s]
            else:
                row = np.full(A, 1.0 / A)
            for b in range(A):
                Q[(s * A + b) % S, s] += row[b]
        return MarkovChain(self.group, Q, eta0=marg, block=U)

    def ehm_lambda(self) -> float:
        chain = self.recode()
        return ehm_lambda(chain.transitions, None)


def make_measure(spec: Mapping):
    """Build a measure from a plain mapping (the CLI's ``measure`` section)."""
    kind = spec.get("kind")
    group = spec["group"]
    if kind == "bernoulli":
        return Bernoulli(group, spec["weights"])
    if kind == "haar":
        return haar(group)
    if kind == "markov":
        return MarkovChain(group, spec["transitions"], spec.get("initial"))
    if kind == "nstep":
        if "block_probs" in spec:
            return NStepMarkov(group, spec["U"], spec["block_probs"])
        return NStepMarkov.from_kernel(group, spec["U"], spec["kernel"])
    raise InvalidArgumentError(f"unknown measure kind {kind!r}")


@dataclass(frozen=True)
class FourierReport:
    character: str
    value: complex
    modulus: float
    rank: int


def measure_fourier(mu: _Measure, chi: Character) -> FourierReport:
    v = mu.fourier(chi)
    return FourierReport(repr(chi), v, abs(v), chi.rank)


def ehm_lambda(family, group: Group | None = None) -> float:
    """``-1/2 log`` of the largest ``||diag(xi) Q^T diag(chi) P^T||_inf``.

    The max runs over all characters ``xi``, nontrivial ``chi`` and ordered
    pairs ``(Q, P)`` from ``family``.  Without ``group``, states are read as
    ``Z/S``.  A vanishing maximum gives ``inf``.
    """
    Qs = [np.asarray(Q, dtype=float) for Q in (family if not isinstance(family, np.ndarray)
                                               or family.ndim == 3 else [family])]
    if not Qs:
        raise InvalidArgumentError("empty transition family")
    S = Qs[0].shape[0]
    for i, Q in enumerate(Qs):
        if Q.shape != (S, S):
            raise InvalidArgumentError("transition matrices differ in size")
        _stochastic_columns(Q, f"transition {i}")
    group = group or Group.cyclic(S)
    if group.order != S:
        raise InvalidArgumentError(f"{group} has {group.order} elements, matrices are {S}x{S}")
    T = _table(group)
    best = 0.0
    for Q in Qs:
        for P in Qs:
            # (chi, S, S) stack of Q^T diag(chi) P^T over nontrivial chi
            inner = (Q.T[None, :, :] * T[1:, None, :]) @ P.T
            for xi in T:
                norms = np.abs(xi[None, :, None] * inner).sum(axis=2).max(axis=1)
                best = max(best, float(norms.max()))
    if best < TOL:
        return math.inf
    return -0.5 * math.log(best)


def pushforward_fourier(mu: _Measure, chi: Character, F: Lca, N: int,
                        window: int | None = None) -> FourierReport:
    """Fourier coefficient of the N-step pushforward, via ``chi o F^N``."""
    pulled = char_power(chi, F, N)
    if window is not None and not pulled.is_trivial:
        sites = [s[0] for s in pulled.coeffs]
        if sites[-1] - sites[0] + 1 > window:
            raise WindowOverflowError(
                f"pulled-back support spans {sites[-1] - sites[0] + 1} sites > window {window}")
    return measure_fourier(mu, pulled)


# ---------------------------------------------------------------------------
# Cesaro scans

@dataclass
class CesaroReport:
    Ns: list[int]
    values: list[float]
    cesaro: list[float]
    haar_value: float
    density: dict
    subsequence: list[tuple[int, float]] = field(default_factory=list)


def _characters_on(group: Group, sites: Sequence[int]):
    els = group.elements()
    for combo in itertools.product(els, repeat=len(sites)):
        yield Character(group, {(s,): c for s, c in zip(sites, combo)}, 1)


def cesaro_scan(mu: _Measure, target, F: Lca, Nmax: int, subsequence="pow2",
                tol: float = 0.01) -> CesaroReport:
    """Per-N value of a cylinder (or character) under ``F^N mu`` for N = 1..Nmax.

    ``target`` is a :class:`Character` (its Fourier coefficient modulus is
    tracked) or a mapping ``site -> value`` (the cylinder probability, by
    Fourier inversion over characters supported on those sites).
    """
    if Nmax < 1:
        raise InvalidArgumentError("Nmax must be >= 1")
    group = mu.group
    if isinstance(target, Character):
        orbits = [(CharOrbit(target, F), 1.0)]
        haar_value = 1.0 if target.is_trivial else 0.0
        absolute = True
    else:
        cyl = {_int_site(s): group.element(v) for s, v in target.items()}
        sites = sorted(cyl)
        bits = len(sites) * math.log2(group.order)
        if bits > BIT_CAP:
            raise CapExceededError(f"inversion over {bits:.0f} bits exceeds {BIT_CAP}")
        norm = group.order ** (-len(sites))
        orbits = []
        for chi in _characters_on(group, sites):
            phase = Phase(0, 1)
            for s, c in chi.coeffs.items():
                phase = phase + pair(c, cyl[s[0]], group)
            orbits.append((CharOrbit(chi, F), norm * np.conj(phase.to_complex())))
        haar_value = norm
        absolute = False
    values = []
    for _ in range(Nmax):
        total = 0j
        for orbit, w in orbits:
            orbit.step()
            total += w * mu.fourier(orbit.character())
        values.append(abs(total) if absolute else float(np.real(total)))
    Ns = list(range(1, Nmax + 1))
    csum = np.cumsum(values)
    cesaro = (csum / np.arange(1, Nmax + 1)).tolist()
    vals = np.asarray(values)
    density = {
        "tol": tol,
        "fraction_within_tol": float(np.mean(np.abs(vals - haar_value) <= tol)),
        "cesaro_final": cesaro[-1],
        "cesaro_error": abs(cesaro[-1] - haar_value),
    }
    if subsequence == "pow2":
        sub = [2**k for k in range(Nmax.bit_length()) if 2**k <= Nmax]
    elif subsequence is None:
        sub = []
    else:
        sub = [int(n) for n in subsequence if 1 <= int(n) <= Nmax]
    return CesaroReport(Ns, values, cesaro, haar_value, density,
                        [(n, values[n - 1]) for n in sub])


# ---------------------------------------------------------------------------
# Harmonic-mixing scans

@dataclass
class HmScanReport:
    rows: list[tuple[int, float, float | None]]  # (rank, max modulus, envelope)
    mode: str
    checked: int


def hm_scan(mu: _Measure, max_rank: int, window: int, budget: int = 1000,
            seed: int | None = None, lam: float | None = None,
            chunk: int = 1 << 16) -> HmScanReport:
    """Largest ``|mu^(chi)|`` per rank over characters on sites ``0..window-1``."""
    A = mu.alphabet_size
    best = np.zeros(max_rank + 1)
    best[0] = 1.0
    checked = 0
    if window * math.log2(A) <= BIT_CAP:
        mode = "exhaustive"
        total = A**window
        place = A ** np.arange(window - 1, -1, -1, dtype=np.int64)
        for lo in range(0, total, chunk):
            ids = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
            idx = (ids[:, None] // place[None, :]) % A
            ranks = np.count_nonzero(idx, axis=1)
            keep = ranks <= max_rank
            if not keep.any():
                continue
            idx, ranks = idx[keep], ranks[keep]
            mods = np.abs(mu.fourier_window(0, idx))
            np.maximum.at(best, ranks, mods)
            checked += len(ids[keep])
    else:
        if seed is None:
            raise InvalidArgumentError("sampling mode needs a seed")
        mode = "sampled"
        rng = np.random.default_rng(seed)
        for r in range(1, max_rank + 1):
            idx = np.zeros((budget, window), dtype=np.int64)
            for b in range(budget):
                pos = rng.choice(window, size=r, replace=False)
                idx[b, pos] = rng.integers(1, A, size=r)
            mods = np.abs(mu.fourier_window(0, idx))
            best[r] = mods.max()
            checked += budget
    rows = []
    for r in range(max_rank + 1):
        env = None if lam is None else math.exp(-lam * r)
        rows.append((r, float(best[r]), env))
    return HmScanReport(rows, mode, checked)


# ---------------------------------------------------------------------------
# Monte-Carlo cross-check

@dataclass
class MonteCarloReport:
    window: int
    samples: int
    rows: list[tuple[int, float, float]]  # (N, frequency, binomial sigma)


def _uniforms(seed: int, first: int, count: int, L: int) -> np.ndarray:
    """Uniforms for samples ``first .. first+count-1``, one Philox block run per sample."""
    blocks = -(-L // 4)
    bg = np.random.Philox(key=seed, counter=first * blocks)
    raw = bg.random_raw(4 * blocks * count).reshape(count, 4 * blocks)[:, :L]
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _sample_window(mu: _Measure, u: np.ndarray, start: int) -> np.ndarray:
    if isinstance(mu, Bernoulli):
        return mu.sample(u)
    if isinstance(mu, MarkovChain):
        return mu.sample_path(u, start)
    if isinstance(mu, NStepMarkov):
        return mu.recode().sample_path(u, start)
    raise UnsupportedError(f"cannot sample {type(mu).__name__}")


def monte_carlo_check(mu: _Measure, F: Lca, N_list: Sequence[int], cylinder: Mapping,
                      samples: int, seed: int, window: int | None = None,
                      workers: int | None = None, chunk: int = 8192) -> MonteCarloReport:
    """Empirical frequency of ``cylinder`` under ``F^N mu`` for each N in ``N_list``."""
    if samples < 1:
        raise InvalidArgumentError("samples must be >= 1")
    if seed is None:
        raise InvalidArgumentError("a seed is required")
    if F.dimension != 1:
        raise UnsupportedError("Monte-Carlo check runs on Z")
    group = mu.group
    cyl = {_int_site(s): group.index(group.element(v)) for s, v in cylinder.items()}
    Ns = sorted(set(int(n) for n in N_list))
    if not Ns or Ns[0] < 0:
        raise InvalidArgumentError("N_list must hold nonnegative integers")
    lo_c, hi_c = min(cyl), max(cyl)
    reach = Ns[-1] * F.radius
    need = 2 * reach + (hi_c - lo_c + 1) + 1
    L = need if window is None else window
    if L < need:
        raise WindowOverflowError(f"window {L} < {need} needed to avoid wrap-around")
    start = lo_c - reach
    offsets = np.array([u[0] for u in F.coeffs], dtype=np.int64)
    coeffs = np.array([f.as_array() for f in F.coeffs.values()], dtype=np.int64)
    els = np.array(group.elements(), dtype=np.int64)
    q = group.exponent
    pos = np.array([s - start for s in sorted(cyl)])
    want = np.array([cyl[s] for s in sorted(cyl)])
    place = np.array([group.exponent ** k for k in range(group.dim - 1, -1, -1)])

    def run(first: int, count: int) -> np.ndarray:
        u = _uniforms(seed, first, count, L)
        state = els[_sample_window(mu, u, start)]  # (count, L, J)
        hits = np.zeros(len(Ns), dtype=np.int64)
        n_done = 0
        for k, N in enumerate(Ns):
            for _ in range(N - n_done):
                state = kernels.lca_step_1d(state, offsets, coeffs, q)
            n_done = N
            letters = state[:, pos, :] @ place
            hits[k] = np.count_nonzero(np.all(letters == want, axis=1))
        return hits

    jobs = [(i, min(chunk, samples - i)) for i in range(0, samples, chunk)]
    nw = worker_count(workers)
    if nw == 1 or len(jobs) == 1:
        parts = [run(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=nw) as ex:
            parts = list(ex.map(lambda j: run(*j), jobs))
    hits = np.sum(parts, axis=0)
    rows = []
    for N, h in zip(Ns, hits):
        f = h / samples
        rows.append((N, float(f), math.sqrt(max(f * (1 - f), 0.0) / samples)))
    return MonteCarloReport(L, samples, rows)


def binomial_sigma(q: float, samples: int) -> float:
    return math.sqrt(q * (1 - q) / samples)


__all__ = [
    "Bernoulli", "MarkovChain", "NStepMarkov", "FourierReport", "CesaroReport",
    "HmScanReport", "MonteCarloReport", "haar", "haar_cylinder", "make_measure",
    "measure_fourier", "ehm_lambda", "pushforward_fourier", "cesaro_scan", "hm_scan",
    "monte_carlo_check", "binomial_sigma",
]
