"""Nonreciprocal and reciprocal hierarchical clustering of directed networks.

Both methods reduce to minimax path problems over the modified weight
``ebar(x, x') = max(e(x, x), e(x, x'), e(x', x'))``:

* nonreciprocal: ``u(x, x') = max(m(x, x'), m(x', x))`` where ``m`` is the
  directed minimax chain cost;
* reciprocal: minimax chain cost of the symmetrised weight
  ``max(ebar(x, x'), ebar(x', x))``.

A chain consisting of the single point ``x`` costs ``ebar(x, x) = e(x, x)``,
so the diagonal of every output equals the input self-weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_network, check_weights
from .exceptions import NetworkValidationError
from .network import FiniteNetwork, induced_lambda, induced_nu, modified_weights

ULTRAMETRIC_SLACK = 1e-12


def _minimax_closure(m):
    """Floyd-Warshall over the (min, max) semiring, in place."""
    for k in range(m.shape[0]):
        np.minimum(m, np.maximum(m[:, k, None], m[None, k, :]), out=m)
    return m


def minimax_directed_cost(net):
    """Matrix of minimal directed chain costs ``m[i, j]``."""
    return _minimax_closure(modified_weights(check_weights(net)).copy())


@dataclass(frozen=True, eq=False)
class Ultrametric:
    """Output of a clustering method: node list and symmetric ultrametric matrix."""

    nodes: tuple
    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=np.float64)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "nodes", tuple(self.nodes))

    def as_network(self):
        return FiniteNetwork(self.nodes, self.u)

    def labels_at(self, resolution):
        """Flat clusters at ``resolution``: ``x ~ x'`` iff ``u(x, x') <= resolution``.

        Nodes whose self-value exceeds ``resolution`` are not yet born and
        get label ``-1``.
        """
        n = len(self.nodes)
        labels = np.full(n, -1, dtype=int)
        nxt = 0
        for i in range(n):
            if labels[i] >= 0 or self.u[i, i] > resolution:
                continue
            members = np.flatnonzero(self.u[i] <= resolution)
            labels[members] = nxt
            nxt += 1
        return labels


def nonreciprocal(net):
    net = as_network(net)
    m = minimax_directed_cost(net.weights)
    return Ultrametric(net.nodes, np.maximum(m, m.T))


def reciprocal(net):
    net = as_network(net)
    ebar = modified_weights(net.weights)
    return Ultrametric(net.nodes, _minimax_closure(np.maximum(ebar, ebar.T)))


def validate_ultrametric(u, slack=ULTRAMETRIC_SLACK):
    """Check the strong triangle inequality.

    Returns
    -------
    ok : bool
    triple : tuple of int or None
        First violating ``(i, j, k)`` in lexicographic order, i.e.
        ``u[i, k] > max(u[i, j], u[j, k]) + slack``.
    """
    if isinstance(u, Ultrametric):
        u = u.u
    u = check_weights(u, "u")
    if not np.array_equal(u, u.T):
        raise NetworkValidationError("ultrametric matrix must be symmetric")
    # bound[i, j, k] = max(u[i, j], u[j, k]); compare with u[i, k]
    bound = np.maximum(u[:, :, None], u[None, :, :])
    bad = u[:, None, :] > bound + slack
    if not bad.any():
        return True, None
    i, j, k = np.argwhere(bad)[0]
    return False, (int(i), int(j), int(k))


@dataclass(frozen=True)
class MergeTree:
    """Dendrogram encoding of an ultrametric.

    ``merges`` holds ``(height, blocks)`` events with non-decreasing height;
    each event fuses the listed blocks (lists of leaf ids) into one.
    """

    leaves: tuple
    merges: tuple

    def to_dict(self):
        return {
            "leaves": list(self.leaves),
            "merges": [
                {"height": h, "blocks": [list(b) for b in blocks]} for h, blocks in self.merges
            ],
        }

    @classmethod
    def from_dict(cls, data):
        merges = tuple(
            (float(m["height"]), tuple(tuple(b) for b in m["blocks"])) for m in data["merges"]
        )
        return cls(tuple(data["leaves"]), merges)

    def cophenetic(self, diagonal=None):
        """Rebuild the ultrametric: lowest common merge height per pair.

        The tree does not record self-values; pass ``diagonal`` to restore them
        (zeros otherwise).
        """
        pos = {v: i for i, v in enumerate(self.leaves)}
        n = len(self.leaves)
        u = np.zeros((n, n)) if diagonal is None else np.diag(np.asarray(diagonal, float))
        for h, blocks in self.merges:
            idx = [[pos[v] for v in b] for b in blocks]
            for a in range(len(idx)):
                for b in range(a + 1, len(idx)):
                    u[np.ix_(idx[a], idx[b])] = h
                    u[np.ix_(idx[b], idx[a])] = h
        return u


def merge_tree(ult):
    """Dendrogram of an :class:`Ultrametric` (off-diagonal structure)."""
    ok, triple = validate_ultrametric(ult.u)
    if not ok:
        raise NetworkValidationError(f"not an ultrametric: violated at {triple}")
    u = ult.u
    n = u.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    iu, ju = np.triu_indices(n, 1)
    merges = []
    for h in np.unique(u[iu, ju]):
        groups = {}
        for i, j in zip(iu[u[iu, ju] == h], ju[u[iu, ju] == h]):
            ri, rj = find(i), find(j)
            if ri != rj:
                groups.setdefault(ri, set()).add(rj)
                groups.setdefault(rj, set()).add(ri)
        if not groups:
            continue
        # connected pieces of the "merges with" graph at this height
        seen = set()
        for root in sorted(groups):
            if root in seen:
                continue
            stack, comp = [root], []
            seen.add(root)
            while stack:
                r = stack.pop()
                comp.append(r)
                for s in groups[r]:
                    if s not in seen:
                        seen.add(s)
                        stack.append(s)
            blocks = sorted(
                (tuple(ult.nodes[k] for k in range(n) if find(k) == r) for r in comp),
                key=lambda b: [ult.nodes.index(v) for v in b],
            )
            merges.append((float(h), tuple(blocks)))
            for r in comp[1:]:
                parent[find(r)] = find(comp[0])
    return MergeTree(ult.nodes, tuple(merges))


def component_target_nr(m):
    """Nonreciprocal clustering of the component network built from minimum modified weights."""
    return nonreciprocal(induced_nu(m))


def component_target_r(m):
    """Reciprocal clustering of the symmetric component network."""
    return reciprocal(induced_lambda(m))


class _BaseHierarchical(ClusterMixin, TransformerMixin, BaseEstimator):
    _method = None

    def __init__(self, resolution=None):
        self.resolution = resolution

    def fit(self, X, y=None):
        """Compute the ultrametric of ``X`` (square weight matrix or FiniteNetwork)."""
        net = as_network(X)
        self.ultrametric_ = type(self)._method(net)
        self.n_features_in_ = net.n_nodes
        if self.resolution is not None:
            self.labels_ = self.ultrametric_.labels_at(self.resolution)
        return self

    def transform(self, X):
        """Return the ultrametric matrix of ``X``."""
        return type(self)._method(as_network(X)).u.copy()

    def fit_transform(self, X, y=None):
        return self.fit(X).ultrametric_.u.copy()

    def merge_tree(self):
        check_is_fitted(self, "ultrametric_")
        return merge_tree(self.ultrametric_)


class NonreciprocalClustering(_BaseHierarchical):
    """Two nodes merge at the resolution where chains run both ways.

    Parameters
    ----------
    resolution : float, optional
        When given, ``fit`` also sets ``labels_`` to the flat clustering at
        that height.

    Attributes
    ----------
    ultrametric_ : Ultrametric
    labels_ : ndarray of int
    """

    _method = staticmethod(nonreciprocal)


class ReciprocalClustering(_BaseHierarchical):
    """Single linkage on the symmetrised modified weight ``max(ebar, ebar.T)``.

    Same parameters and attributes as :class:`NonreciprocalClustering`.
    """

    _method = staticmethod(reciprocal)
