"""Finite abelian groups, endomorphisms, characters and exact phases.

Two group shapes are supported: cyclic ``Z/n`` and prime-power vector
groups ``(Z/p^r)^J``.  Group elements are plain tuples of residues (length 1
for cyclic groups) so they hash and compare cheaply; :meth:`Group.element`
normalizes user input into that form.

Endomorphisms are stored uniformly as ``dim x dim`` residue matrices; a
cyclic-group endomorphism is a 1x1 matrix, i.e. a scalar.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import GroupMismatchError, InvalidArgumentError

Site = tuple[int, ...]
Element = tuple[int, ...]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of ``n >= 2`` as ``[(prime, multiplicity), ...]``."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidArgumentError(f"factorize needs an integer n >= 2, got {n!r}")
    n = int(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            k = 0
            while n % d == 0:
                n //= d
                k += 1
            out.append((d, k))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


@dataclass(frozen=True)
class Group:
    """``Z/n`` (kind ``"cyclic"``) or ``(Z/p^r)^J`` (kind ``"vector"``)."""

    kind: str
    exponent: int
    dim: int = 1
    p: int | None = None
    r: int | None = None

    @classmethod
    def cyclic(cls, n: int) -> "Group":
        if n < 2:
            raise InvalidArgumentError(f"cyclic group needs n >= 2, got {n}")
        return cls("cyclic", int(n), 1)

    @classmethod
    def vector(cls, p: int, r: int, J: int) -> "Group":
        if not is_prime(p):
            raise InvalidArgumentError(f"{p} is not prime")
        if r < 1 or J < 1:
            raise InvalidArgumentError("vector group needs r >= 1 and J >= 1")
        return cls("vector", int(p) ** int(r), int(J), int(p), int(r))

    @property
    def order(self) -> int:
        return self.exponent**self.dim

    @property
    def is_cyclic(self) -> bool:
        return self.kind == "cyclic"

    def crt_decompose(self) -> list[tuple[int, int]]:
        if self.kind == "vector":
            return [(self.p, self.r)]
        return factorize(self.exponent)

    def element(self, value) -> Element:
        if isinstance(value, (int, np.integer)):
            value = (int(value),)
        value = tuple(int(v) % self.exponent for v in value)
        if len(value) != self.dim:
            raise GroupMismatchError(
                f"element {value} has {len(value)} residues; group needs {self.dim}"
            )
        return value

    def zero(self) -> Element:
        return (0,) * self.dim

    def elements(self) -> list[Element]:
        """All elements in lexicographic order; index ``i`` <-> :meth:`index`."""
        return list(itertools.product(range(self.exponent), repeat=self.dim))

    def index(self, a: Element) -> int:
        i = 0
        for x in a:
            i = i * self.exponent + x
        return i

    def add(self, a: Element, b: Element) -> Element:
        return tuple((x + y) % self.exponent for x, y in zip(a, b))

    def neg(self, a: Element) -> Element:
        return tuple(-x % self.exponent for x in a)

    def __str__(self):
        if self.kind == "cyclic":
            return f"Z/{self.exponent}"
        return f"(Z/{self.exponent})^{self.dim}"


@dataclass(frozen=True)
class Endo:
    """Group endomorphism as a residue matrix acting on column vectors."""

    group: Group
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        q, d = self.group.exponent, self.group.dim
        rows = tuple(tuple(int(x) % q for x in row) for row in self.entries)
        if len(rows) != d or any(len(row) != d for row in rows):
            raise GroupMismatchError(f"endomorphism of {self.group} must be {d}x{d}")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def scalar(cls, group: Group, f: int) -> "Endo":
        if not group.is_cyclic:
            raise GroupMismatchError(f"scalar coefficient given for {group}")
        return cls(group, ((f,),))

    @classmethod
    def matrix(cls, group: Group, rows: Sequence[Sequence[int]]) -> "Endo":
        if group.is_cyclic:
            raise GroupMismatchError(f"matrix coefficient given for cyclic {group}")
        return cls(group, tuple(tuple(r) for r in rows))

    @classmethod
    def identity(cls, group: Group) -> "Endo":
        d = group.dim
        return cls(group, tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))

    @classmethod
    def zero(cls, group: Group) -> "Endo":
        return cls(group, ((0,) * group.dim,) * group.dim)

    @classmethod
    def coerce(cls, group: Group, value) -> "Endo":
        """Accept an Endo, an int (scalar) or a nested sequence (matrix)."""
        if isinstance(value, Endo):
            if value.group != group:
                raise GroupMismatchError(f"endomorphism over {value.group}, expected {group}")
            return value
        if isinstance(value, (int, np.integer)):
            if group.is_cyclic:
                return cls.scalar(group, int(value))
            return cls(group, tuple(tuple(int(value) * (i == j) for j in range(group.dim))
                                    for i in range(group.dim)))
        return cls.matrix(group, value)

    @property
    def value(self) -> int:
        if not self.group.is_cyclic:
            raise GroupMismatchError("value is only defined for scalar endomorphisms")
        return self.entries[0][0]

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def apply(self, a: Element) -> Element:
        q = self.group.exponent
        return tuple(sum(m * x for m, x in zip(row, a)) % q for row in self.entries)

    def compose(self, other: "Endo") -> "Endo":
        """``self o other`` (apply ``other`` first)."""
        _same_group(self.group, other.group)
        d = self.group.dim
        return Endo(self.group, tuple(
            tuple(sum(self.entries[i][k] * other.entries[k][j] for k in range(d))
                  for j in range(d)) for i in range(d)))

    def __add__(self, other: "Endo") -> "Endo":
        _same_group(self.group, other.group)
        return Endo(self.group, tuple(tuple(x + y for x, y in zip(r, s))
                                      for r, s in zip(self.entries, other.entries)))

    def adjoint(self) -> "Endo":
        return Endo(self.group, tuple(zip(*self.entries)))

    def is_automorphism(self) -> bool:
        g = self.group
        if g.is_cyclic:
            return math.gcd(self.value, g.exponent) == 1
        return _det_mod_p(self.entries, g.p) != 0

    def __str__(self):
        if self.group.is_cyclic:
            return str(self.value)
        return "[" + ";".join(",".join(map(str, r)) for r in self.entries) + "]"


def _same_group(g: Group, h: Group) -> None:
    if g != h:
        raise GroupMismatchError(f"{g} vs {h}")


def _det_mod_p(rows, p: int) -> int:
    m = [[x % p for x in r] for r in rows]
    n = len(m)
    det = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det = det * m[col][col] % p
        inv = pow(m[col][col], -1, p)
        for r in range(col + 1, n):
            f = m[r][col] * inv % p
            if f:
                m[r] = [(x - f * y) % p for x, y in zip(m[r], m[col])]
    return det % p


def endo_apply(f: Endo, a) -> Element:
    return f.apply(f.group.element(a))


def endo_adjoint(f: Endo) -> Endo:
    return f.adjoint()


def is_automorphism(f: Endo) -> bool:
    return f.is_automorphism()


@dataclass(frozen=True, eq=False)
class Phase:
    """The unit complex number ``exp(2*pi*i * numerator / modulus)``, kept exact."""

    numerator: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise InvalidArgumentError("phase modulus must be positive")
        object.__setattr__(self, "numerator", self.numerator % self.modulus)

    def __add__(self, other: "Phase") -> "Phase":
        m = math.lcm(self.modulus, other.modulus)
        return Phase(self.numerator * (m // self.modulus)
                     + other.numerator * (m // other.modulus), m)

    def __neg__(self) -> "Phase":
        return Phase(-self.numerator, self.modulus)

    def __sub__(self, other: "Phase") -> "Phase":
        return self + (-other)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.modulus)

    def __eq__(self, other):
        if not isinstance(other, Phase):
            return NotImplemented
        return self.as_fraction() == other.as_fraction()

    def __hash__(self):
        return hash(self.as_fraction())

    def to_complex(self) -> complex:
        t = 2 * math.pi * self.numerator / self.modulus
        return complex(math.cos(t), math.sin(t))

    def __repr__(self):
        return f"Phase({self.numerator}, {self.modulus})"


def pair(c, a, group: Group | None = None) -> Phase:
    """Pairing of a dual coefficient with an element; both over the same group."""
    if group is not None:
        c, a = group.element(c), group.element(a)
        q = group.exponent
    else:
        raise InvalidArgumentError("pair needs the group to fix the modulus")
    return Phase(sum(x * y for x, y in zip(c, a)), q)


def _site(s, dimension: int | None = None) -> Site:
    if isinstance(s, (int, np.integer)):
        s = (int(s),)
    s = tuple(int(x) for x in s)
    if dimension is not None and len(s) != dimension:
        raise InvalidArgumentError(f"site {s} is not {dimension}-dimensional")
    return s


class Character:
    """Finite-support coefficient system ``site -> dual coefficient``.

    Zero coefficients are dropped on construction, so ``rank`` is simply the
    number of stored entries.
    """

    __slots__ = ("group", "dimension", "_coeffs")

    def __init__(self, group: Group, coeffs: Mapping | Iterable = (), dimension: int | None = None):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        clean: dict[Site, Element] = {}
        zero = group.zero()
        for site, c in items:
            site = _site(site, dimension)
            if dimension is None:
                dimension = len(site)
            c = group.element(c)
            if site in clean:
                c = group.add(clean[site], c)
            clean[site] = c
        self.group = group
        self.dimension = 1 if dimension is None else dimension
        self._coeffs = {s: clean[s] for s in sorted(clean) if clean[s] != zero}

    @property
    def coeffs(self) -> Mapping[Site, Element]:
        return MappingProxyType(self._coeffs)

    @property
    def rank(self) -> int:
        return len(self._coeffs)

    @property
    def is_trivial(self) -> bool:
        return not self._coeffs

    def translate(self, e) -> "Character":
        e = _site(e, self.dimension)
        return Character(self.group, {tuple(x + y for x, y in zip(s, e)): c
                                      for s, c in self._coeffs.items()}, self.dimension)

    def __add__(self, other: "Character") -> "Character":
        _same_group(self.group, other.group)
        return Character(self.group, list(self._coeffs.items()) + list(other._coeffs.items()),
                         self.dimension)

    def __neg__(self) -> "Character":
        return Character(self.group, {s: self.group.neg(c) for s, c in self._coeffs.items()},
                         self.dimension)

    def __sub__(self, other: "Character") -> "Character":
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, Character):
            return NotImplemented
        return (self.group, self.dimension, self._coeffs) == (other.group, other.dimension,
                                                              other._coeffs)

    def __hash__(self):
        return hash((self.group, self.dimension, tuple(self._coeffs.items())))

    def __repr__(self):
        body = ", ".join(f"{_fmt_site(s)}:{_fmt_elt(c)}" for s, c in self._coeffs.items())
        return f"Character[{self.group}]{{{body}}}"

    def __call__(self, config, torus: bool = True) -> Phase:
        return char_eval(self, config, torus)


def _fmt_site(s: Site) -> str:
    return str(s[0]) if len(s) == 1 else "(" + ",".join(map(str, s)) + ")"


def _fmt_elt(c: Element) -> str:
    return str(c[0]) if len(c) == 1 else "(" + ",".join(map(str, c)) + ")"


def char_eval(chi: Character, config, torus: bool = True) -> Phase:
    """Evaluate ``chi`` on a :class:`~haarlab.lca.Configuration` as one exact phase."""
    if config.group != chi.group:
        raise GroupMismatchError(f"character over {chi.group}, configuration over {config.group}")
    shape = config.shape
    total = Phase(0, 1)
    for site, c in chi._coeffs.items():
        if len(site) != len(shape):
            raise InvalidArgumentError(f"site {site} does not match window {shape}")
        if not torus and any(not 0 <= x < L for x, L in zip(site, shape)):
            raise InvalidArgumentError(f"site {site} lies outside window {shape}")
        a = config[site]
        total = total + pair(c, a, chi.group)
    return total


def char_rank(chi: Character) -> int:
    return chi.rank


def character_table(group: Group) -> np.ndarray:
    """``T[c, a] = exp(2*pi*i <c,a> / q)`` over :meth:`Group.elements` order."""
    els = np.array(group.elements(), dtype=np.int64)
    q = group.exponent
    phases = (els @ els.T) % q
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    # exact values at quarter turns so uniform weights cancel to 0
    for k, v in ((0, 1), (q / 4, 1j), (q / 2, -1), (3 * q / 4, -1j)):
        if float(k).is_integer():
            roots[int(k)] = v
    return roots[phases]
