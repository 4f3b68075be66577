"""Rips and Dowker persistent homology of finite directed networks.

Filtrations are stored per dimension as integer vertex arrays plus values.
Persistence is computed by the standard left-to-right column reduction over
the two-element field; each column is a Python ``int`` used as a bitset over
the faces of one dimension, so a column addition is a single XOR.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import as_network, check_weights
from .exceptions import BudgetExceededError, NetworkValidationError
from .network import modified_weights

SIMPLEX_BUDGET_ENV = "DIRNET_SIMPLEX_BUDGET"
DEFAULT_SIMPLEX_BUDGET = 2_000_000
MAX_HOMOLOGY_DIM = 3
_CHUNK = 1 << 15


def simplex_budget():
    raw = os.environ.get(SIMPLEX_BUDGET_ENV)
    if raw is None:
        return DEFAULT_SIMPLEX_BUDGET
    try:
        return int(float(raw))
    except ValueError:
        raise NetworkValidationError(f"{SIMPLEX_BUDGET_ENV}={raw!r} is not a number") from None


@dataclass(frozen=True, eq=False)
class Filtration:
    """Simplices up to dimension ``maxdim + 1`` with their entry values.

    ``simplices[d]`` is an ``(count, d + 1)`` array of ascending vertex
    indices, ``values[d]`` the matching filtration values. ``maxdim`` is the
    top homology dimension the filtration is meant to resolve.
    """

    simplices: tuple
    values: tuple
    maxdim: int

    @property
    def n_simplices(self):
        return sum(len(v) for v in self.values)

    def __iter__(self):
        for d, (simp, vals) in enumerate(zip(self.simplices, self.values)):
            for s, v in zip(simp, vals):
                yield tuple(int(i) for i in s), float(v)

    @classmethod
    def from_pairs(cls, pairs, maxdim):
        """Build from ``(vertex tuple, value)`` pairs; checks face closure and monotonicity."""
        by_dim = {}
        for simplex, value in pairs:
            s = tuple(sorted(int(i) for i in simplex))
            if len(set(s)) != len(s) or not s:
                raise NetworkValidationError(f"bad simplex {simplex!r}")
            by_dim.setdefault(len(s) - 1, {})[s] = float(value)
        top = max(by_dim) if by_dim else 0
        simplices, values = [], []
        for d in range(top + 1):
            items = sorted(by_dim.get(d, {}).items())
            simplices.append(np.array([s for s, _ in items], dtype=np.int64).reshape(-1, d + 1))
            values.append(np.array([v for _, v in items], dtype=np.float64))
        filt = cls(tuple(simplices), tuple(values), int(maxdim))
        check_filtration(filt)
        return filt


def check_filtration(filt):
    """Raise unless every face is present with value at most its coface's."""
    lookup = [dict() for _ in filt.simplices]
    for d, (simp, vals) in enumerate(zip(filt.simplices, filt.values)):
        for s, v in zip(simp.tolist(), vals.tolist()):
            lookup[d][tuple(s)] = v
    for d in range(1, len(filt.simplices)):
        for s, v in lookup[d].items():
            for face in combinations(s, d):
                fv = lookup[d - 1].get(face)
                if fv is None:
                    raise NetworkValidationError(f"face {face} of {s} missing from filtration")
                if fv > v:
                    raise NetworkValidationError(f"face {face} enters after coface {s}")


def _n_simplices(n, top):
    return sum(math.comb(n, k + 1) for k in range(top + 1))


def _enumerate(n, maxdim, budget):
    if isinstance(maxdim, bool) or not isinstance(maxdim, (int, np.integer)) or maxdim < 0:
        raise NetworkValidationError(f"maxdim must be a nonnegative integer, got {maxdim!r}")
    if maxdim > MAX_HOMOLOGY_DIM:
        raise NetworkValidationError(f"maxdim above {MAX_HOMOLOGY_DIM} is not supported")
    if budget is None:
        budget = simplex_budget()
    top = min(maxdim + 1, n - 1)
    total = _n_simplices(n, top)
    if total > budget:
        raise BudgetExceededError(
            SIMPLEX_BUDGET_ENV, f"filtration needs {total} simplices (budget {budget})"
        )
    out = [np.arange(n, dtype=np.int64).reshape(n, 1)]
    for _ in range(top):
        out.append(_extend(out[-1], n))
    return out


def _extend(simp, n):
    """All ascending ``(d + 2)``-tuples extending the rows of ``simp`` by a larger vertex."""
    last = simp[:, -1]
    reps = n - 1 - last
    rows = np.repeat(simp, reps, axis=0)
    # within each group of repeated rows, the appended vertex runs last+1 .. n-1
    starts = np.repeat(np.cumsum(reps) - reps, reps)
    tail = np.repeat(last + 1, reps) + (np.arange(rows.shape[0]) - starts)
    return np.column_stack([rows, tail])


def rips_filtration(net, maxdim=1, budget=None):
    """Rips filtration: a simplex enters at the largest weight among its ordered vertex pairs.

    The pairs include ``x = x'``, so self-weights raise vertex entry values.
    """
    w = check_weights(net)
    simplices = _enumerate(w.shape[0], maxdim, budget)
    ebar = modified_weights(w)
    pair = np.maximum(ebar, ebar.T)
    values = [np.diag(w).copy()]
    for simp in simplices[1:]:
        val = np.full(len(simp), -np.inf)
        for a, b in combinations(range(simp.shape[1]), 2):
            np.maximum(val, pair[simp[:, a], simp[:, b]], out=val)
        values.append(val)
    return Filtration(tuple(simplices), tuple(values), int(maxdim))


def _dowker(w, maxdim, budget):
    simplices = _enumerate(w.shape[0], maxdim, budget)
    values = []
    for simp in simplices:
        val = np.empty(len(simp))
        for lo in range(0, len(simp), _CHUNK):
            block = simp[lo:lo + _CHUNK]
            reach = w[block[:, 0]]
            for c in range(1, block.shape[1]):
                reach = np.maximum(reach, w[block[:, c]])
            val[lo:lo + _CHUNK] = reach.min(axis=1)
        values.append(val)
    return Filtration(tuple(simplices), tuple(values), int(maxdim))


def dowker_sink_filtration(net, maxdim=1, budget=None):
    """Sink filtration: ``min_p max_{x in sigma} e(x, p)`` over witnesses ``p`` in the network."""
    return _dowker(check_weights(net), maxdim, budget)


def dowker_source_filtration(net, maxdim=1, budget=None):
    """Source filtration: ``min_p max_{x in sigma} e(p, x)``."""
    return _dowker(check_weights(net).T, maxdim, budget)


@dataclass(frozen=True, eq=False)
class Diagram:
    """Persistence diagram in one dimension; ``pairs`` is ``(k, 2)``, deaths may be ``inf``."""

    dim: int
    pairs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=np.float64).reshape(-1, 2)
        if np.any(np.isnan(p)) or np.any(np.isinf(p[:, 0])):
            raise NetworkValidationError("births must be finite and no entry may be NaN")
        if np.any(p[:, 0] > p[:, 1]):
            raise NetworkValidationError("birth exceeds death")
        p = p[p[:, 0] != p[:, 1]]
        p = p[np.lexsort((p[:, 1], p[:, 0]))]
        p.setflags(write=False)
        object.__setattr__(self, "pairs", p)

    def __len__(self):
        return len(self.pairs)

    def __eq__(self, other):
        if not isinstance(other, Diagram):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.pairs, other.pairs)

    def __repr__(self):
        return f"Diagram(dim={self.dim}, pairs={self.pairs.tolist()})"

    def to_dict(self):
        return {
            "dim": self.dim,
            "pairs": [[b, "inf" if math.isinf(d) else d] for b, d in self.pairs.tolist()],
        }

    @classmethod
    def from_dict(cls, data):
        pairs = [[float(b), math.inf if d == "inf" else float(d)] for b, d in data["pairs"]]
        return cls(int(data["dim"]), np.array(pairs, dtype=np.float64).reshape(-1, 2))

    def barcode(self):
        """One ``[b, d)`` line per bar, sorted by birth."""
        return "\n".join(f"[{b!r}, {d!r})" for b, d in self.pairs.tolist())


def persistence(filt):
    """Diagrams in dimensions ``0..filt.maxdim``.

    Simplices are ordered by (value, dimension, vertex tuple); the boundary
    matrix is reduced left to right and each pivot pairs a creator with a
    destroyer. Reduction stops once every simplex of dimension at most
    ``maxdim`` is in and no ``maxdim`` class is still open, since the
    remaining top-dimensional simplices can only create untracked classes.
    """
    maxdim = filt.maxdim
    dims = len(filt.simplices)
    counts = [len(v) for v in filt.values]
    all_vals = np.concatenate(filt.values)
    all_dims = np.concatenate([np.full(c, d) for d, c in enumerate(counts)])
    width = dims
    padded = np.zeros((len(all_vals), width), dtype=np.int64)
    offset = 0
    for d, simp in enumerate(filt.simplices):
        padded[offset:offset + counts[d], : d + 1] = simp
        offset += counts[d]
    keys = tuple(padded[:, c] for c in reversed(range(width))) + (all_dims, all_vals)
    order = np.lexsort(keys)

    starts = np.concatenate([[0], np.cumsum(counts)])
    # rank[d][local] = position among dimension-d simplices in filtration order
    rank = []
    for d in range(dims):
        sel = order[(order >= starts[d]) & (order < starts[d + 1])] - starts[d]
        r = np.empty(counts[d], dtype=np.int64)
        r[sel] = np.arange(counts[d])
        rank.append(r)
    n_ids = int(filt.simplices[0].max()) + 1 if counts[0] else 0
    vertex_rank = np.full(n_ids, -1, dtype=np.int64)
    vertex_rank[filt.simplices[0][:, 0]] = rank[0]
    face_rank = [None]
    for d in range(1, dims):
        simp = filt.simplices[d]
        if simp.size and simp.max() >= n_ids:
            raise NetworkValidationError("filtration is missing vertices")
        cols = []
        if d == 2:
            table = np.full((n_ids, n_ids), -1, dtype=np.int64)
            e = filt.simplices[1]
            table[e[:, 0], e[:, 1]] = rank[1]
        elif d > 2:
            index = {tuple(s): r for s, r in zip(filt.simplices[d - 1].tolist(), rank[d - 1])}
        for drop in range(d + 1):
            faces = np.delete(simp, drop, axis=1)
            if d == 1:
                fr = vertex_rank[faces[:, 0]]
            elif d == 2:
                fr = table[faces[:, 0], faces[:, 1]]
            else:
                fr = np.array([index.get(tuple(f), -1) for f in faces.tolist()], dtype=np.int64)
            if np.any(fr < 0):
                raise NetworkValidationError(f"filtration is missing faces in dimension {d - 1}")
            cols.append(fr)
        face_rank.append(np.stack(cols, axis=1))

    # values in filtration order per dimension, for reading off births
    sorted_vals = []
    for d in range(dims):
        inv = np.empty(counts[d], dtype=np.int64)
        inv[rank[d]] = np.arange(counts[d])
        sorted_vals.append(filt.values[d][inv])
    for d in range(1, dims):
        face_vals = sorted_vals[d - 1][face_rank[d]]
        if np.any(face_vals.max(axis=1) > filt.values[d]):
            raise NetworkValidationError(f"filtration not monotone in dimension {d}")

    pending = sum(c for d, c in enumerate(counts) if d <= maxdim)
    open_top = 0
    pivots = [dict() for _ in range(dims)]
    killed = [set() for _ in range(dims)]
    destroyers = [set() for _ in range(dims)]
    pairs = [[] for _ in range(maxdim + 1)]
    order_dims = all_dims[order]
    order_local = order - starts[order_dims]

    for d, local in zip(order_dims.tolist(), order_local.tolist()):
        if d <= maxdim:
            pending -= 1
        col = 0
        if d > 0:
            for f in face_rank[d][local].tolist():
                col ^= 1 << f
            piv = pivots[d]
            while col:
                other = piv.get(col.bit_length() - 1)
                if other is None:
                    break
                col ^= other
        if col:
            low = col.bit_length() - 1
            pivots[d][low] = col
            killed[d - 1].add(low)
            destroyers[d].add(int(rank[d][local]))
            if d - 1 <= maxdim:
                birth = sorted_vals[d - 1][low]
                death = filt.values[d][local]
                if birth != death:
                    pairs[d - 1].append((birth, death))
            if d - 1 == maxdim:
                open_top -= 1
        elif d == maxdim:
            open_top += 1
        if pending == 0 and open_top == 0:
            break

    diagrams = []
    for d in range(maxdim + 1):
        pts = list(pairs[d])
        if d < dims:
            for r in range(counts[d]):
                if r not in killed[d] and r not in destroyers[d]:
                    pts.append((sorted_vals[d][r], math.inf))
        diagrams.append(Diagram(d, np.array(pts, dtype=np.float64).reshape(-1, 2)))
    return diagrams


def _essential_part(a, b):
    ea = np.sort(a[np.isinf(a[:, 1]), 0])
    eb = np.sort(b[np.isinf(b[:, 1]), 0])
    if len(ea) != len(eb):
        return math.inf
    if len(ea) == 0:
        return 0.0
    return float(np.abs(ea - eb).max())


def _feasible(a, b, t):
    """Perfect matching of the diagonal-augmented bipartite graph at threshold ``t``."""
    n, m = len(a), len(b)
    size = n + m
    rows, cols = [], []
    if n and m:
        cost = np.maximum(np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1]))
        i, j = np.nonzero(cost <= t)
        rows.extend(i.tolist())
        cols.extend(j.tolist())
    half_a = (a[:, 1] - a[:, 0]) / 2
    half_b = (b[:, 1] - b[:, 0]) / 2
    # left: a_0..a_{n-1}, diag copies of b; right: b_0..b_{m-1}, diag copies of a
    for i in np.nonzero(half_a <= t)[0].tolist():
        rows.append(i)
        cols.append(m + i)
    for j in np.nonzero(half_b <= t)[0].tolist():
        rows.append(n + j)
        cols.append(j)
    for j in range(m):
        for i in range(n):
            rows.append(n + j)
            cols.append(m + i)
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck(d1, d2):
    """Bottleneck distance between two diagrams (``Diagram`` or ``(k, 2)`` arrays).

    Points at infinity must be matched among themselves; unequal counts give
    ``inf``. Finite points may match each other at L-infinity cost or the
    diagonal at half their persistence. The optimum is found by bisection on
    the finite set of candidate costs.
    """
    a = d1.pairs if isinstance(d1, Diagram) else Diagram(0, d1).pairs
    b = d2.pairs if isinstance(d2, Diagram) else Diagram(0, d2).pairs
    ess = _essential_part(a, b)
    if math.isinf(ess):
        return math.inf
    fa = a[np.isfinite(a[:, 1])]
    fb = b[np.isfinite(b[:, 1])]
    if len(fa) + len(fb) == 0:
        return ess
    cands = [(fa[:, 1] - fa[:, 0]) / 2, (fb[:, 1] - fb[:, 0]) / 2]
    if len(fa) and len(fb):
        cands.append(
            np.maximum(
                np.abs(fa[:, None, 0] - fb[None, :, 0]), np.abs(fa[:, None, 1] - fb[None, :, 1])
            ).ravel()
        )
    cands = np.unique(np.concatenate(cands))
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(fa, fb, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(ess, float(cands[lo]))


def compute_diagrams(kind, net, maxdim=1, budget=None):
    """Diagrams for ``kind`` in ``{"rips", "dowker-si", "dowker-so"}``."""
    builders = {
        "rips": rips_filtration,
        "dowker-si": dowker_sink_filtration,
        "dowker-so": dowker_source_filtration,
    }
    try:
        build = builders[kind]
    except KeyError:
        raise NetworkValidationError(f"unknown filtration {kind!r}") from None
    return persistence(build(net, maxdim, budget))


def dowker_duality_check(net, maxdim=1, budget=None):
    """True iff sink and source diagrams coincide exactly in every dimension."""
    sink = compute_diagrams("dowker-si", net, maxdim, budget)
    source = compute_diagrams("dowker-so", net, maxdim, budget)
    return all(a == b for a, b in zip(sink, source))


class _BasePersistence(TransformerMixin, BaseEstimator):
    def _kind(self):
        raise NotImplementedError

    def fit(self, X, y=None):
        net = as_network(X)
        self.n_features_in_ = net.n_nodes
        self.diagrams_ = compute_diagrams(self._kind(), net.weights, self.maxdim)
        return self

    def transform(self, X):
        """Diagrams of ``X`` for dimensions ``0..maxdim``."""
        return compute_diagrams(self._kind(), as_network(X).weights, self.maxdim)

    def fit_transform(self, X, y=None):
        return self.fit(X).diagrams_


class RipsPersistence(_BasePersistence):
    """Rips persistence diagrams of a network.

    Parameters
    ----------
    maxdim : int, default=1
        Highest homology dimension reported.
    """

    def __init__(self, maxdim=1):
        self.maxdim = maxdim

    def _kind(self):
        return "rips"


class DowkerPersistence(_BasePersistence):
    """Dowker persistence diagrams; ``direction`` is ``"sink"`` or ``"source"``.

    Sink and source give the same diagrams, so the choice only affects
    which filtration gets built.
    """

    def __init__(self, maxdim=1, direction="sink"):
        self.maxdim = maxdim
        self.direction = direction

    def _kind(self):
        if self.direction not in ("sink", "source"):
            raise NetworkValidationError(f"direction must be 'sink' or 'source', got {self.direction!r}")
        return "dowker-si" if self.direction == "sink" else "dowker-so"
