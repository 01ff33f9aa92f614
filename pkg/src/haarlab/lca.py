"""Linear cellular automata on Z^D (D = 1 or 2) over a finite abelian group.

An automaton is a finite map ``site u -> endomorphism f_u`` acting by
``F(a)_m = sum_u f_u(a_{m+u})``.  Characters are pulled back through it
(``chi o F``), and powers are computed on dense Laurent arrays with exact
modular convolutions from :mod:`haarlab.kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .algebra import Character, Endo, Group, Site, _same_group, _site
from .errors import GroupMismatchError, InvalidArgumentError, UnsupportedError


class Configuration:
    """Cells on a finite torus window, stored as an int64 array ``(*window, dim)``."""

    __slots__ = ("group", "cells")

    def __init__(self, group: Group, cells):
        cells = np.asarray(cells, dtype=np.int64)
        if group.is_cyclic and (cells.ndim == 0 or cells.shape[-1] != 1):
            cells = cells[..., None]
        if cells.ndim < 2 or cells.shape[-1] != group.dim:
            raise GroupMismatchError(f"cells of shape {cells.shape} do not fit {group}")
        self.group = group
        self.cells = np.mod(cells, group.exponent)
        self.cells.setflags(write=False)

    @classmethod
    def zeros(cls, group: Group, window) -> "Configuration":
        window = _site(window)
        return cls(group, np.zeros(window + (group.dim,), dtype=np.int64))

    @classmethod
    def delta(cls, group: Group, window, site, value) -> "Configuration":
        window = _site(window)
        cells = np.zeros(window + (group.dim,), dtype=np.int64)
        idx = tuple(s % L for s, L in zip(_site(site, len(window)), window))
        cells[idx] = group.element(value)
        return cls(group, cells)

    @classmethod
    def random(cls, group: Group, window, rng: np.random.Generator) -> "Configuration":
        window = _site(window)
        return cls(group, rng.integers(0, group.exponent, size=window + (group.dim,)))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells.shape[:-1]

    @property
    def dimension(self) -> int:
        return self.cells.ndim - 1

    def __getitem__(self, site) -> tuple[int, ...]:
        site = _site(site, self.dimension)
        idx = tuple(s % L for s, L in zip(site, self.shape))
        return tuple(int(x) for x in self.cells[idx])

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.group == other.group and np.array_equal(self.cells, other.cells)

    def __repr__(self):
        body = self.cells[..., 0] if self.group.is_cyclic else self.cells
        return f"Configuration[{self.group}]({body.tolist()})"


class Lca:
    """Finite-support map ``site -> Endo``; zero endomorphisms are dropped."""

    __slots__ = ("group", "dimension", "_coeffs")

    def __init__(self, group: Group, dimension: int, coeffs: Mapping | Iterable = ()):
        if dimension not in (1, 2):
            raise UnsupportedError("only Z^1 and Z^2 lattices are supported")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[Site, Endo] = {}
        for site, f in items:
            site = _site(site, dimension)
            f = Endo.coerce(group, f)
            acc[site] = acc[site] + f if site in acc else f
        self.group = group
        self.dimension = dimension
        self._coeffs = {s: acc[s] for s in sorted(acc) if not acc[s].is_zero}

    @property
    def coeffs(self) -> Mapping[Site, Endo]:
        return MappingProxyType(self._coeffs)

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def is_nontrivial(self) -> bool:
        # more than one nonzero coefficient
        return len(self._coeffs) > 1

    def support_bounds(self) -> tuple[Site, Site]:
        if not self._coeffs:
            z = (0,) * self.dimension
            return z, z
        sites = np.array(list(self._coeffs))
        return tuple(sites.min(0).tolist()), tuple(sites.max(0).tolist())

    @property
    def radius(self) -> int:
        lo, hi = self.support_bounds()
        return max([abs(x) for x in lo + hi] + [0])

    def __eq__(self, other):
        if not isinstance(other, Lca):
            return NotImplemented
        return (self.group, self.dimension, self._coeffs) == (other.group, other.dimension,
                                                              other._coeffs)

    def __hash__(self):
        return hash((self.group, self.dimension, tuple(self._coeffs.items())))

    def __repr__(self):
        body = ", ".join(f"{s if len(s) > 1 else s[0]}:{f}" for s, f in self._coeffs.items())
        return f"Lca[{self.group}]{{{body}}}"

    def __call__(self, a: Configuration) -> Configuration:
        return apply_lca(self, a)

    def __matmul__(self, other: "Lca") -> "Lca":
        return compose_lca(self, other)


def make_lca(group: Group, dimension: int, coefficients) -> Lca:
    return Lca(group, dimension, coefficients)


def identity_lca(group: Group, dimension: int = 1) -> Lca:
    return Lca(group, dimension, {(0,) * dimension: Endo.identity(group)})


def shift_lca(group: Group, e) -> Lca:
    e = _site(e)
    return Lca(group, len(e), {e: Endo.identity(group)})


def apply_lca(F: Lca, a: Configuration, steps: int = 1) -> Configuration:
    _same_group(F.group, a.group)
    if a.dimension != F.dimension:
        raise InvalidArgumentError(f"{F.dimension}-D automaton on {a.dimension}-D window")
    lo, hi = F.support_bounds()
    for L, l, h in zip(a.shape, lo, hi):
        if L < h - l + 1:
            raise InvalidArgumentError(
                f"window length {L} is smaller than the automaton span {h - l + 1}")
    q = F.group.exponent
    cells = a.cells
    mats = [(u, f.as_array()) for u, f in F.coeffs.items()]
    axes = tuple(range(F.dimension))
    for _ in range(steps):
        out = np.zeros_like(cells)
        for u, f in mats:
            out += np.roll(cells, tuple(-x for x in u), axis=axes) @ f.T
            out %= q
        cells = out
    return Configuration(F.group, cells)


def compose_lca(F: Lca, G: Lca) -> Lca:
    """``F o G``: coefficient at ``m`` is ``sum_{u+v=m} f_u g_v``."""
    _same_group(F.group, G.group)
    out: dict[Site, Endo] = {}
    for u, f in F.coeffs.items():
        for v, g in G.coeffs.items():
            m = tuple(x + y for x, y in zip(u, v))
            fg = f.compose(g)
            out[m] = out[m] + fg if m in out else fg
    return Lca(F.group, F.dimension, out)


def compose_char(chi: Character, F: Lca) -> Character:
    """``chi o F``: coefficient at ``n`` is ``sum_u adjoint(f_u)(c_{n-u})``."""
    _same_group(chi.group, F.group)
    if chi.is_trivial:
        return Character(chi.group, {}, F.dimension)
    if chi.dimension != F.dimension:
        raise InvalidArgumentError("character and automaton live on different lattices")
    out = []
    for n, c in chi.coeffs.items():
        for u, f in F.coeffs.items():
            out.append((tuple(x + y for x, y in zip(n, u)), f.adjoint().apply(c)))
    return Character(chi.group, out, chi.dimension)


# ---------------------------------------------------------------------------
# Dense Laurent arrays.  ``arr`` has shape (*extent, J) for characters and
# (*extent, J, J) for automata; ``offset`` is the site of arr[0, ...].

@dataclass
class _Dense:
    offset: tuple[int, ...]
    arr: np.ndarray

    def trimmed(self) -> "_Dense":
        D = len(self.offset)
        nz = np.nonzero(np.any(self.arr != 0, axis=tuple(range(D, self.arr.ndim))))
        if nz[0].size == 0:
            return _Dense((0,) * D, self.arr[tuple(slice(0, 0) for _ in range(D))])
        lo = [int(ix.min()) for ix in nz]
        hi = [int(ix.max()) + 1 for ix in nz]
        return _Dense(tuple(o + l for o, l in zip(self.offset, lo)),
                      self.arr[tuple(slice(l, h) for l, h in zip(lo, hi))])

    @property
    def empty(self) -> bool:
        return self.arr.size == 0


def _conv(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    if a.ndim == 1:
        return kernels.convolve_mod_1d(a, b, q)
    return kernels.convolve_mod_2d(a, b, q)


def _dense_lca(F: Lca) -> _Dense:
    lo, hi = F.support_bounds()
    J = F.group.dim
    arr = np.zeros(tuple(h - l + 1 for l, h in zip(lo, hi)) + (J, J), dtype=np.int64)
    for u, f in F.coeffs.items():
        arr[tuple(x - l for x, l in zip(u, lo))] = f.as_array()
    return _Dense(lo, arr)


def _dense_char(chi: Character) -> _Dense:
    D, J = chi.dimension, chi.group.dim
    if chi.is_trivial:
        return _Dense((0,) * D, np.zeros((0,) * D + (J,), dtype=np.int64))
    sites = np.array(list(chi.coeffs))
    lo, hi = sites.min(0), sites.max(0)
    arr = np.zeros(tuple((hi - lo + 1).tolist()) + (J,), dtype=np.int64)
    for s, c in chi.coeffs.items():
        arr[tuple(np.array(s) - lo)] = c
    return _Dense(tuple(lo.tolist()), arr)


def _char_from_dense(group: Group, dense: _Dense, D: int) -> Character:
    items = []
    for idx in zip(*np.nonzero(np.any(dense.arr != 0, axis=-1))):
        site = tuple(int(i) + o for i, o in zip(idx, dense.offset))
        items.append((site, dense.arr[idx]))
    return Character(group, items, D)


def _lca_from_dense(group: Group, dense: _Dense, D: int) -> Lca:
    items = []
    for idx in zip(*np.nonzero(np.any(dense.arr != 0, axis=(-2, -1)))):
        site = tuple(int(i) + o for i, o in zip(idx, dense.offset))
        items.append((site, Endo(group, dense.arr[idx].tolist())))
    return Lca(group, D, items)


def _lca_mul(A: _Dense, B: _Dense, q: int) -> _Dense:
    if A.empty or B.empty:
        return _Dense(A.offset, A.arr[tuple(slice(0, 0) for _ in A.offset)])
    J = A.arr.shape[-1]
    D = len(A.offset)
    ext = tuple(a + b - 1 for a, b in zip(A.arr.shape[:D], B.arr.shape[:D]))
    out = np.zeros(ext + (J, J), dtype=np.int64)
    for i in range(J):
        for k in range(J):
            acc = np.zeros(ext, dtype=np.int64)
            for j in range(J):
                a, b = A.arr[..., i, j], B.arr[..., j, k]
                if a.any() and b.any():
                    acc = (acc + _conv(a, b, q)) % q
            out[..., i, k] = acc
    return _Dense(tuple(x + y for x, y in zip(A.offset, B.offset)), out).trimmed()


def _char_mul(C: _Dense, A: _Dense, q: int) -> _Dense:
    """Pull a dense character back through a dense automaton."""
    if C.empty or A.empty:
        return _Dense(C.offset, C.arr[tuple(slice(0, 0) for _ in C.offset)])
    J = C.arr.shape[-1]
    D = len(C.offset)
    ext = tuple(a + b - 1 for a, b in zip(C.arr.shape[:D], A.arr.shape[:D]))
    out = np.zeros(ext + (J,), dtype=np.int64)
    for k in range(J):
        acc = np.zeros(ext, dtype=np.int64)
        for j in range(J):
            c, f = C.arr[..., j], A.arr[..., j, k]
            if c.any() and f.any():
                acc = (acc + _conv(c, f, q)) % q
        out[..., k] = acc
    return _Dense(tuple(x + y for x, y in zip(C.offset, A.offset)), out).trimmed()


def _dense_power(A: _Dense, N: int, q: int, J: int, method: str) -> _Dense:
    D = len(A.offset)
    ident = np.zeros((1,) * D + (J, J), dtype=np.int64)
    ident[(0,) * D] = np.eye(J, dtype=np.int64)
    result = _Dense((0,) * D, ident)
    if method == "fold":
        for _ in range(N):
            result = _lca_mul(result, A, q)
        return result
    # squaring is fine for matrices too: the product is associative and
    # every factor is a power of the same A, so the factors commute
    base = A
    while N:
        if N & 1:
            result = _lca_mul(result, base, q)
        N >>= 1
        if N:
            base = _lca_mul(base, base, q)
    return result


def _resolve_method(group: Group, method: str) -> str:
    if method == "auto":
        return "square" if group.is_cyclic else "fold"
    if method not in ("square", "fold"):
        raise InvalidArgumentError(f"unknown power method {method!r}")
    return method


def lca_power_coeffs(F: Lca, N: int, method: str = "auto") -> dict[Site, Endo]:
    """Coefficients of ``F^N``.

    ``method`` is ``"square"`` (binary powering), ``"fold"`` (N successive
    products) or ``"auto"``: squaring for scalar groups, folding for matrices.
    """
    return dict(lca_power(F, N, method).coeffs)


def lca_power(F: Lca, N: int, method: str = "auto") -> Lca:
    if N < 0:
        raise InvalidArgumentError("power must be nonnegative")
    method = _resolve_method(F.group, method)
    dense = _dense_power(_dense_lca(F), N, F.group.exponent, F.group.dim, method)
    return _lca_from_dense(F.group, dense, F.dimension)


def char_power(chi: Character, F: Lca, N: int, method: str = "auto") -> Character:
    """``chi o F^N``; scalar groups go through the squared power of ``F``."""
    _same_group(chi.group, F.group)
    if N < 0:
        raise InvalidArgumentError("power must be nonnegative")
    if N == 0 or chi.is_trivial:
        return chi
    if chi.dimension != F.dimension:
        raise InvalidArgumentError("character and automaton live on different lattices")
    method = _resolve_method(F.group, method)
    q, J = F.group.exponent, F.group.dim
    C, A = _dense_char(chi), _dense_lca(F)
    if method == "square":
        C = _char_mul(C, _dense_power(A, N, q, J, "square"), q)
    else:
        for _ in range(N):
            C = _char_mul(C, A, q)
            if C.empty:
                break
    return _char_from_dense(chi.group, C, chi.dimension)


class CharOrbit:
    """Iterates ``chi o F^N`` for N = 1, 2, ... one pullback per step."""

    def __init__(self, chi: Character, F: Lca):
        _same_group(chi.group, F.group)
        self.group, self.dimension = chi.group, chi.dimension
        self._C = _dense_char(chi)
        self._A = _dense_lca(F)
        self._q = F.group.exponent
        self.N = 0

    def step(self) -> None:
        if not self._C.empty:
            self._C = _char_mul(self._C, self._A, self._q)
        self.N += 1

    @property
    def rank(self) -> int:
        if self._C.empty:
            return 0
        return int(np.count_nonzero(np.any(self._C.arr != 0, axis=-1)))

    def character(self) -> Character:
        return _char_from_dense(self.group, self._C, self.dimension)


# ---------------------------------------------------------------------------
# CRT splitting of cyclic-group objects

def _components(group: Group) -> list[int]:
    if not group.is_cyclic:
        return [group.exponent]
    return [p**r for p, r in group.crt_decompose()]


def crt_split(obj):
    """Split a ``Z/n`` group, character, automaton or configuration by prime power.

    Automaton and configuration data are reduced mod ``q_j``.  A character
    coefficient ``c`` goes to ``c * (n/q_j)^-1 mod q_j``, the unique choice
    that keeps every evaluation equal to the sum of the component evaluations.
    Prime-power input returns ``[obj]`` unchanged.
    """
    group = obj if isinstance(obj, Group) else obj.group
    qs = _components(group)
    if len(qs) == 1:
        return [obj]
    n = group.exponent
    if isinstance(obj, Group):
        return [Group.cyclic(q) for q in qs]
    out = []
    for q in qs:
        g = Group.cyclic(q)
        if isinstance(obj, Character):
            u = pow(n // q, -1, q)
            out.append(Character(g, {s: (c[0] * u,) for s, c in obj.coeffs.items()},
                                 obj.dimension))
        elif isinstance(obj, Lca):
            out.append(Lca(g, obj.dimension, {s: f.value for s, f in obj.coeffs.items()}))
        elif isinstance(obj, Configuration):
            out.append(Configuration(g, obj.cells % q))
        else:
            raise UnsupportedError(f"cannot split {type(obj).__name__}")
    return out


def crt_combine(parts: list):
    """Inverse of :func:`crt_split`."""
    if len(parts) == 1:
        return parts[0]
    qs = [(p if isinstance(p, Group) else p.group).exponent for p in parts]
    n = math.prod(qs)
    g = Group.cyclic(n)
    first = parts[0]
    if isinstance(first, Group):
        return g
    if isinstance(first, Character):
        acc: dict[Site, int] = {}
        for part, q in zip(parts, qs):
            for s, c in part.coeffs.items():
                acc[s] = acc.get(s, 0) + c[0] * (n // q)
        return Character(g, acc, first.dimension)
    idem = [(n // q) * pow(n // q, -1, q) for q in qs]
    if isinstance(first, Lca):
        acc = {}
        for part, e in zip(parts, idem):
            for s, f in part.coeffs.items():
                acc[s] = acc.get(s, 0) + f.value * e
        return Lca(g, first.dimension, acc)
    if isinstance(first, Configuration):
        cells = sum(p.cells * e for p, e in zip(parts, idem))
        return Configuration(g, cells)
    raise UnsupportedError(f"cannot combine {type(first).__name__}")


@dataclass(frozen=True)
class HypothesisReport:
    coprime_counts: dict
    satisfied: bool


def diffusion_hypothesis(F: Lca) -> HypothesisReport:
    """Per prime ``p | n``: how many coefficients are prime to ``p`` (need >= 2 each)."""
    if not F.group.is_cyclic:
        raise UnsupportedError("coefficient census needs a cyclic group; "
                               "use separating-set tools for matrix automata")
    counts = {}
    for p, _ in F.group.crt_decompose():
        counts[p] = sum(1 for f in F.coeffs.values() if f.value % p != 0)
    return HypothesisReport(counts, all(c >= 2 for c in counts.values()))
