"""Markov random fields on small W x H grids, handled by exact enumeration.

A field is built in Gibbs form from strictly positive patch weights, so the
joint law is materialized as a tensor with one axis per cell (axis
``y*W + x``).  Boundaries are ``"torus"`` (both directions periodic) or
``"strip"`` (periodic in x, free in y).  Rows play the role of layers: the
row process ``row_0, row_1, ...`` is the lamination chain, and the law of one
row given its two neighbours is the sandwich measure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .algebra import Group, character_table
from .errors import CapExceededError, InvalidArgumentError

CAP = 1 << 24
CI_TOL = 1e-10

Cell = tuple[int, int]


@dataclass(frozen=True)
class Interaction:
    offsets: tuple[Cell, ...]
    weights: object  # ndarray over A^|offsets|, or callable (x, y) -> ndarray


class GridMrf:
    def __init__(self, group: Group, W: int, H: int, joint: np.ndarray,
                 boundary: str, patches: Sequence[Sequence[Cell]],
                 interactions: Sequence[Interaction] = ()):
        if boundary not in ("torus", "strip"):
            raise InvalidArgumentError(f"boundary must be 'torus' or 'strip', not {boundary!r}")
        A = group.order
        joint = np.asarray(joint, dtype=float)
        if joint.shape != (A,) * (W * H):
            joint = joint.reshape((A,) * (W * H))
        if np.any(joint < 0) or abs(joint.sum() - 1) > 1e-10:
            raise InvalidArgumentError("joint law must be nonnegative and sum to 1")
        self.group, self.W, self.H, self.boundary = group, W, H, boundary
        self.joint = joint
        self.interactions = tuple(interactions)
        self.patches = [tuple(p) for p in patches]  # cell tuples actually coupled
        self.full_support = bool(np.all(joint > 0))
        self._adj = {c: set() for c in self.cells()}
        for patch in self.patches:
            for a in patch:
                self._adj[a].update(b for b in patch if b != a)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_interactions(cls, group: Group, W: int, H: int,
                          interactions: Sequence[Interaction], boundary: str = "torus"
                          ) -> "GridMrf":
        A = group.order
        if W < 1 or H < 1:
            raise InvalidArgumentError("grid must be at least 1x1")
        if W * H * math.log2(A) > 24:
            raise CapExceededError(f"|A|^(W*H) = {A}^{W * H} exceeds 2^24")
        joint = np.ones((A,) * (W * H))
        patches = []
        for inter in interactions:
            offs = [tuple(int(v) for v in o) for o in inter.offsets]
            dys = [o[1] for o in offs]
            if max(dys) - min(dys) > 1:
                raise InvalidArgumentError(
                    "interaction spans more than two rows; block rows together first")
            for y in range(H):
                for x in range(W):
                    cells = _place(offs, x, y, W, H, boundary)
                    if cells is None:
                        continue
                    table = inter.weights(x, y) if callable(inter.weights) else inter.weights
                    table = np.asarray(table, dtype=float).reshape((A,) * len(offs))
                    if np.any(table <= 0):
                        raise InvalidArgumentError("potentials must be strictly positive")
                    joint = joint * _broadcast(table, cells, W, W * H)
                    patches.append(cells)
        joint /= joint.sum()
        return cls(group, W, H, joint, boundary, patches, interactions)

    @classmethod
    def from_joint(cls, group: Group, W: int, H: int, joint, boundary: str,
                   offsets: Sequence[Cell] = ((0, 0), (1, 0), (0, 1))) -> "GridMrf":
        """Wrap an arbitrary joint law; ``offsets`` fixes the neighbourhood used
        for boundaries in :func:`verify_mrf_property`."""
        offs = [tuple(o) for o in offsets]
        patches = []
        for y in range(H):
            for x in range(W):
                cells = _place(offs, x, y, W, H, boundary)
                if cells is not None:
                    patches.append(cells)
        return cls(group, W, H, joint, boundary, patches)

    def with_joint(self, joint) -> "GridMrf":
        return GridMrf(self.group, self.W, self.H, joint, self.boundary, self.patches,
                       self.interactions)

    # -- geometry ----------------------------------------------------------

    def cells(self) -> list[Cell]:
        return [(x, y) for y in range(self.H) for x in range(self.W)]

    def axis(self, cell: Cell) -> int:
        x, y = cell
        return y * self.W + x

    def neighbours(self, cells) -> set[Cell]:
        out = set()
        for c in cells:
            out |= self._adj[c]
        return out - set(cells)

    @property
    def row_alphabet(self) -> int:
        return self.group.order**self.W

    def row_law(self) -> np.ndarray:
        """Joint law of the rows, shape ``(A^W,) * H``."""
        return self.joint.reshape((self.row_alphabet,) * self.H)

    def fourier(self, coeffs: Mapping[Cell, int]) -> complex:
        """Fourier coefficient for a grid character ``cell -> dual element index``."""
        if not coeffs:
            return 1.0 + 0j
        cells = sorted(coeffs, key=self.axis)
        axes = [self.axis(c) for c in cells]
        drop = tuple(i for i in range(self.joint.ndim) if i not in axes)
        marg = self.joint.sum(axis=drop)
        T = character_table(self.group)
        val = marg.astype(complex)
        # contract one support cell at a time
        for c in reversed(cells):
            val = val @ T[coeffs[c]]
        return complex(val)


def _place(offs, x, y, W, H, boundary) -> tuple[Cell, ...] | None:
    out = []
    for dx, dy in offs:
        yy = y + dy
        if boundary == "strip":
            if not 0 <= yy < H:
                return None
        else:
            yy %= H
        out.append(((x + dx) % W, yy))
    if len(set(out)) != len(out):
        raise InvalidArgumentError(f"patch {offs} folds onto itself on a {W}x{H} grid")
    return tuple(out)


def _broadcast(table: np.ndarray, cells, W: int, n_cells: int) -> np.ndarray:
    """Lift a patch table to the grid: its k-th axis lands on cell k's grid axis."""
    axes = [y * W + x for x, y in cells]
    order = np.argsort(axes)
    t = np.transpose(table, order)
    shape = [1] * n_cells
    for k, i in enumerate(order):
        shape[axes[i]] = t.shape[k]
    return t.reshape(shape)


def make_grid_mrf(group: Group, W: int, H: int, U: Sequence[Cell], potentials,
                  boundary: str = "torus") -> GridMrf:
    """Gibbs field with one interaction: weights over the contents of ``U``.

    ``potentials`` is one table over ``A^|U|`` (same everywhere), a mapping
    ``(x, y) -> table`` or a callable ``(x, y) -> table``.
    """
    U = [tuple(u) for u in U]
    if (0, 0) not in U:
        raise InvalidArgumentError("neighbourhood U must contain (0, 0)")
    weights = potentials
    if isinstance(potentials, Mapping):
        weights = lambda x, y: potentials[(x, y)]  # noqa: E731
    return GridMrf.from_interactions(group, W, H, [Interaction(tuple(U), weights)], boundary)


def ising_mrf(W: int, H: int, agree: float = 2.0, disagree: float = 1.0,
              boundary: str = "torus", group: Group | None = None) -> GridMrf:
    """Nearest-neighbour agreement field on ``Z/2`` (or any small group)."""
    group = group or Group.cyclic(2)
    A = group.order
    pair = np.where(np.eye(A, dtype=bool), agree, disagree)
    return GridMrf.from_interactions(group, W, H, [
        Interaction(((0, 0), (1, 0)), pair),
        Interaction(((0, 0), (0, 1)), pair),
    ], boundary)


# ---------------------------------------------------------------------------
# conditional independence

def _ci_deviation(joint: np.ndarray, inside, boundary, outside) -> float:
    """max |P(in, out | bd) - P(in | bd) P(out | bd)| over positive-probability ``bd``."""
    A = joint.shape[0] if joint.ndim else 1
    used = list(boundary) + list(inside) + list(outside)
    drop = tuple(i for i in range(joint.ndim) if i not in used)
    marg = joint.sum(axis=drop) if drop else joint
    kept = [i for i in range(joint.ndim) if i not in drop]
    perm = [kept.index(i) for i in used]
    t = np.transpose(marg, perm).reshape(A ** len(boundary), A ** len(inside),
                                         A ** len(outside))
    pb = t.sum(axis=(1, 2))
    ok = pb > 0
    cond = t[ok] / pb[ok, None, None]
    prod = cond.sum(axis=2)[:, :, None] * cond.sum(axis=1)[:, None, :]
    return float(np.max(np.abs(cond - prod))) if cond.size else 0.0


@dataclass(frozen=True)
class CiResult:
    holds: bool
    deviation: float


def verify_mrf_property(mu: GridMrf, region: Sequence[Cell]) -> CiResult:
    region = [tuple(c) for c in region]
    bd = mu.neighbours(region)
    outside = [c for c in mu.cells() if c not in bd and c not in region]
    dev = _ci_deviation(mu.joint, [mu.axis(c) for c in region],
                        [mu.axis(c) for c in sorted(bd)], [mu.axis(c) for c in outside])
    return CiResult(dev <= CI_TOL, dev)


# ---------------------------------------------------------------------------
# layers

@dataclass(frozen=True)
class LayerKernel:
    n: int
    matrix: np.ndarray  # [b, a] = P(row n+1 = b | row n = a)


def lamination_kernels(mu: GridMrf) -> list[LayerKernel]:
    R = mu.row_law()
    H = mu.H
    out = []
    for n in range(H - 1):
        drop = tuple(i for i in range(H) if i not in (n, n + 1))
        pair = R.sum(axis=drop) if drop else R  # [row n, row n+1]
        pa = pair.sum(axis=1)
        if np.any(pa <= 0):
            raise InvalidArgumentError(f"row {n} has a content of zero probability")
        out.append(LayerKernel(n, (pair / pa[:, None]).T))
    return out


def initial_row_law(mu: GridMrf) -> np.ndarray:
    R = mu.row_law()
    return R.sum(axis=tuple(range(1, mu.H))) if mu.H > 1 else R


def lamination_fidelity(mu: GridMrf) -> float:
    """Largest gap between the row law and its kernel-chain reconstruction."""
    R = mu.row_law()
    rec = initial_row_law(mu)
    for K in lamination_kernels(mu):
        rec = rec[..., None] * K.matrix.T.reshape((1,) * (rec.ndim - 1) + K.matrix.T.shape)
    return float(np.max(np.abs(rec - R)))


@dataclass(frozen=True)
class Sandwich:
    k: int
    below: int
    above: int
    dist: np.ndarray  # over row contents, lexicographic
    outer_dependence: float  # max change when rows beyond k+-1 are also fixed


def _sandwich_rows(mu: GridMrf, k: int) -> tuple[int, int]:
    H = mu.H
    if mu.boundary == "torus":
        if H < 3:
            raise InvalidArgumentError("torus sandwiches need H >= 3")
        return (k - 1) % H, (k + 1) % H
    if not 1 <= k <= H - 2:
        raise InvalidArgumentError(f"row {k} has no two neighbours in a strip of height {H}")
    return k - 1, k + 1


def sandwich_measure(mu: GridMrf, k: int, a: int, c: int) -> Sandwich:
    """Law of row ``k`` given row ``k-1 = a`` and row ``k+1 = c`` (row indices)."""
    lo, hi = _sandwich_rows(mu, k)
    R = mu.row_law()
    others = [i for i in range(mu.H) if i not in (lo, k, hi)]
    perm = [lo, hi, k] + others
    t = np.transpose(R, perm)[a, c]  # (row k, *others)
    S = mu.row_alphabet
    t = t.reshape(S, -1)
    total = t.sum()
    if total <= 0:
        raise InvalidArgumentError("conditioning rows have zero probability")
    dist = t.sum(axis=1) / total
    dev = 0.0
    if t.shape[1] > 1:
        colsum = t.sum(axis=0)
        pos = colsum > 0
        full = t[:, pos] / colsum[pos]
        dev = float(np.max(np.abs(full - dist[:, None])))
    return Sandwich(k, a, c, dist, dev)


def sandwich_rows(mu: GridMrf) -> list[int]:
    if mu.boundary == "torus":
        return list(range(mu.H)) if mu.H >= 3 else []
    return list(range(1, mu.H - 1))


def row_mrf_check(mu: GridMrf, dist: np.ndarray) -> CiResult:
    """A sandwich law as a field on the row cycle ``Z/W`` with the horizontal
    part of the neighbourhood; every single cell and adjacent pair is tested."""
    A, W = mu.group.order, mu.W
    t = np.asarray(dist).reshape((A,) * W)
    adj = {x: set() for x in range(W)}
    for patch in mu.patches:
        for (x1, y1) in patch:
            for (x2, y2) in patch:
                if y1 == y2 and x1 != x2:
                    adj[x1].add(x2)
    worst = 0.0
    regions = [[x] for x in range(W)] + [[x, (x + 1) % W] for x in range(W) if W > 2]
    for reg in regions:
        bd = set().union(*(adj[x] for x in reg)) - set(reg)
        out = [x for x in range(W) if x not in bd and x not in reg]
        worst = max(worst, _ci_deviation(t, reg, sorted(bd), out))
    return CiResult(worst <= CI_TOL, worst)


# ---------------------------------------------------------------------------
# the bound chain

def _row_characters(group: Group, W: int, max_rank: int):
    """(rank, row character table) for every nontrivial row character of rank <= max_rank."""
    A = group.order
    T = character_table(group)
    rows = list(itertools.product(range(A), repeat=W))
    for coeff in itertools.product(range(A), repeat=W):
        r = sum(1 for c in coeff if c)
        if r == 0 or r > max_rank:
            continue
        vals = np.array([np.prod([T[c, a] for c, a in zip(coeff, row)]) for row in rows])
        yield coeff, r, vals


@dataclass
class UhmEhmReport:
    boundary: str
    lambda_sandwich: float
    uhm_holds: bool
    uhm_worst_slack: float
    ehm_holds: bool
    ehm_worst_slack: float
    triplex_deviation: float
    sandwich_min_prob: float
    local_marginals: int
    checked_characters: int
    notes: list[str] = field(default_factory=list)


def _triplex_deviation(mu: GridMrf, k: int, phi: Callable[[int], float]) -> float:
    """``E[1{row k = b} phi(row k+1) | row k-1 = u]`` against the sandwich mixture."""
    lo, hi = _sandwich_rows(mu, k)
    R = mu.row_law()
    S = mu.row_alphabet
    others = [i for i in range(mu.H) if i not in (lo, k, hi)]
    t = np.transpose(R, [lo, k, hi] + others).reshape(S, S, S, -1).sum(axis=3)
    pu = t.sum(axis=(1, 2))
    phis = np.array([phi(w) for w in range(S)])
    worst = 0.0
    for u in range(S):
        lhs = (t[u] * phis[None, :]).sum(axis=1) / pu[u]
        rhs = np.zeros(S)
        for w in range(S):
            pw = t[u, :, w].sum() / pu[u]
            if pw > 0:
                rhs += phis[w] * sandwich_measure(mu, k, u, w).dist * pw
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def _local_marginal_count(mu: GridMrf) -> int:
    seen: list[np.ndarray] = []
    for patch in mu.patches:
        axes = [mu.axis(c) for c in patch]
        drop = tuple(i for i in range(mu.joint.ndim) if i not in axes)
        m = mu.joint.sum(axis=drop)
        order = np.argsort(axes)
        m = np.transpose(m, np.argsort(order))  # axes back in patch order
        if not any(s.shape == m.shape and np.allclose(s, m, atol=1e-10) for s in seen):
            seen.append(m)
    return len(seen)


def uhm_ehm_check(mu: GridMrf, max_rank: int) -> UhmEhmReport:
    S, W = mu.row_alphabet, mu.W
    rows = sandwich_rows(mu)
    notes = []
    if not rows:
        raise InvalidArgumentError("grid has no row with two neighbouring rows")
    row_chars = list(_row_characters(mu.group, W, min(max_rank, W)))

    # empirical EHM constant of all sandwiches
    lam = math.inf
    min_prob = 1.0
    sandwiches = {}
    for k in rows:
        for a in range(S):
            for c in range(S):
                sw = sandwich_measure(mu, k, a, c)
                sandwiches[k, a, c] = sw.dist
                min_prob = min(min_prob, float(sw.dist.min()))
                best = {}
                for _, r, vals in row_chars:
                    best[r] = max(best.get(r, 0.0), abs(complex(vals @ sw.dist)))
                for r, m in best.items():
                    if m > 0:
                        # moduli within rounding of 1 give 0.0, not -0.0
                        lam = min(lam, -math.log(min(m, 1.0)) / r + 0.0)

    # UHM: ||Q_k^T diag(chi) Q_{k+1}^T||_inf for the layer pair around each sandwich
    kernels = {K.n: K.matrix for K in lamination_kernels(mu)}
    if mu.boundary == "torus":
        notes.append("torus rows are not a one-sided chain; kernels are row-pair marginals")
    uhm_slack = math.inf
    for k in rows:
        lo, hi = _sandwich_rows(mu, k)
        if lo not in kernels or k not in kernels:
            continue
        Qa, Qb = kernels[lo], kernels[k]
        for _, r, vals in row_chars:
            op = Qa.T @ (vals[:, None] * Qb.T)
            norm = float(np.abs(op).sum(axis=1).max())
            bound = math.exp(-lam * r) if math.isfinite(lam) else 0.0
            uhm_slack = min(uhm_slack, bound + 1e-10 - norm)
    uhm_holds = uhm_slack >= 0

    # EHM at half the rate over all grid characters of rank <= max_rank
    A = mu.group.order
    cells = mu.cells()
    ehm_slack = math.inf
    checked = 0
    half = lam / 2
    for r in range(1, min(max_rank, len(cells)) + 1):
        for support in itertools.combinations(cells, r):
            for coeffs in itertools.product(range(1, A), repeat=r):
                v = abs(mu.fourier(dict(zip(support, coeffs))))
                bound = math.exp(-half * r) if math.isfinite(half) else 0.0
                ehm_slack = min(ehm_slack, bound + 1e-10 - v)
                checked += 1
    ehm_holds = ehm_slack >= 0

    phi = lambda w: 1.5 + math.cos(0.7 * w + 0.3)  # noqa: E731
    trip = max(_triplex_deviation(mu, k, phi) for k in rows)
    return UhmEhmReport(mu.boundary, lam, uhm_holds, uhm_slack, ehm_holds, ehm_slack, trip,
                        min_prob, _local_marginal_count(mu), checked, notes)
