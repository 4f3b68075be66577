"""Finite directed networks, measured networks and the directed circle model.

A network is a node list together with an arbitrary real weight matrix
``weights[i, j] = e(x_i, x_j)``. Nothing metric is assumed: weights may be
asymmetric, negative, and the diagonal carries information (self-weights
enter the modified weight and hence every chain cost).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_index, check_index_set, check_weights
from .exceptions import NetworkValidationError

TWO_PI = 2.0 * math.pi


def _frozen(arr):
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FiniteNetwork:
    """A finite network ``(X, e_X)``.

    Parameters
    ----------
    nodes : sequence of str
        Unique node identifiers. Order is significant: row ``i`` of
        ``weights`` belongs to ``nodes[i]``.
    weights : array_like of shape (n, n)
        Finite real weights, any sign, diagonal included.
    """

    nodes: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = check_weights(self.weights)
        nodes = tuple(str(v) for v in self.nodes)
        if len(nodes) != w.shape[0]:
            raise NetworkValidationError(
                f"{len(nodes)} node ids for a {w.shape[0]}x{w.shape[0]} weight matrix"
            )
        if len(set(nodes)) != len(nodes):
            raise NetworkValidationError("node ids must be unique")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def from_matrix(cls, weights, nodes=None):
        w = check_weights(weights)
        if nodes is None:
            nodes = [str(i) for i in range(w.shape[0])]
        return cls(tuple(nodes), w)

    def __len__(self):
        return len(self.nodes)

    @property
    def n_nodes(self):
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, FiniteNetwork):
            return NotImplemented
        return self.nodes == other.nodes and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.nodes, self.weights.tobytes()))

    def __repr__(self):
        return f"FiniteNetwork(n_nodes={self.n_nodes})"


@dataclass(frozen=True, eq=False)
class MeasuredNetwork:
    """A finite network with a probability vector and optional components.

    ``components`` is a partition of node indices into disjoint nonempty
    blocks. Components are declared, never inferred: on finite data every
    point is its own topological component, so the caller states which
    blocks play the role of path-connected components.
    """

    network: FiniteNetwork
    measure: np.ndarray
    components: Optional[tuple] = None

    def __post_init__(self):
        n = self.network.n_nodes
        mu = np.asarray(self.measure, dtype=np.float64)
        if mu.shape != (n,):
            raise NetworkValidationError(f"measure must have length {n}, got shape {mu.shape}")
        if not np.all(np.isfinite(mu)) or np.any(mu < 0) or np.any(mu > 1):
            raise NetworkValidationError("measure entries must lie in [0, 1]")
        if abs(mu.sum() - 1.0) > 1e-12:
            raise NetworkValidationError(f"measure sums to {mu.sum()!r}, expected 1")
        object.__setattr__(self, "measure", _frozen(mu))
        if self.components is not None:
            blocks = tuple(tuple(check_index_set(b, n, "component")) for b in self.components)
            seen = [i for b in blocks for i in b]
            if len(seen) != len(set(seen)):
                raise NetworkValidationError("components must be disjoint")
            if set(seen) != set(range(n)):
                raise NetworkValidationError("components must cover every node")
            object.__setattr__(self, "components", blocks)

    @classmethod
    def uniform(cls, network, components=None):
        n = network.n_nodes
        return cls(network, np.full(n, 1.0 / n), components)

    @property
    def support(self):
        """Indices of nodes with positive mass, in node order."""
        return [i for i, m in enumerate(self.measure) if m > 0]

    def support_network(self):
        """Restriction to the support, keeping masses and components aligned."""
        supp = self.support
        pos = {i: k for k, i in enumerate(supp)}
        comps = None
        if self.components is not None:
            comps = tuple(
                tuple(pos[i] for i in b if i in pos) for b in self.components
            )
            comps = tuple(b for b in comps if b)
        mu = self.measure[supp]
        return MeasuredNetwork(subnetwork(self.network, supp), mu / mu.sum(), comps)


@dataclass(frozen=True)
class DirectedCircle:
    """The directed unit circle, continuous (``n=None``) or on ``n`` grid nodes."""

    n: Optional[int] = None

    @property
    def is_continuous(self):
        return self.n is None

    def weight(self, theta1, theta2):
        return circle_weights(np.array([theta1, theta2]))[0, 1]

    def network(self):
        if self.n is None:
            raise NetworkValidationError("the continuous circle has no finite weight matrix")
        return directed_circle(self.n)


def circle_weights(angles):
    """Counterclockwise arc length between every ordered pair of angles in [0, 2pi)."""
    theta = np.asarray(angles, dtype=np.float64)
    diff = theta[None, :] - theta[:, None]
    return np.where(diff >= 0, diff, TWO_PI + diff)


def directed_circle(n):
    """The directed circle network on ``n`` evenly spaced nodes."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise NetworkValidationError(f"directed_circle needs a positive integer, got {n!r}")
    j = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    fwd = TWO_PI * (k - j) / n
    back = TWO_PI - TWO_PI * (j - k) / n
    return FiniteNetwork.from_matrix(np.where(j <= k, fwd, back))


def cycle_network(n):
    """Cycle network on ``n`` nodes: weight ``(k - j) mod n``, largest weight ``n - 1``."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise NetworkValidationError(f"cycle_network needs a positive integer, got {n!r}")
    idx = np.arange(n)
    return FiniteNetwork.from_matrix(((idx[None, :] - idx[:, None]) % n).astype(float))


def modified_weight(net, i, j):
    """``max(e(x_i, x_i), e(x_i, x_j), e(x_j, x_j))``."""
    w = net.weights
    i = check_index(i, w.shape[0])
    j = check_index(j, w.shape[0])
    return float(max(w[i, i], w[i, j], w[j, j]))


def modified_weights(weights):
    """Vectorised modified weight over all ordered pairs."""
    w = check_weights(weights)
    d = np.diag(w)
    return np.maximum(np.maximum(w, d[:, None]), d[None, :])


def subnetwork(net, subset):
    """Restriction of ``net`` to ``subset``; rows follow the order of ``subset``."""
    idx = check_index_set(subset, net.n_nodes)
    if len(set(idx)) != len(idx):
        raise NetworkValidationError("subset contains repeated indices")
    nodes = [net.nodes[i] for i in idx]
    return FiniteNetwork(tuple(nodes), net.weights[np.ix_(idx, idx)])


def _require_components(m):
    if m.components is None:
        raise NetworkValidationError("measured network has no declared components")
    return m.components


def _component_names(m):
    nodes = m.network.nodes
    return tuple("+".join(nodes[i] for i in block) for block in m.components)


def induced_nu(m):
    """Component-level network: minimum modified weight between blocks."""
    blocks = _require_components(m)
    ebar = modified_weights(m.network.weights)
    k = len(blocks)
    out = np.empty((k, k))
    for a, ba in enumerate(blocks):
        for b, bb in enumerate(blocks):
            out[a, b] = ebar[np.ix_(ba, bb)].min()
    return FiniteNetwork(_component_names(m), out)


def induced_lambda(m):
    """Symmetric component-level network: min over pairs of the two-way modified weight."""
    blocks = _require_components(m)
    ebar = modified_weights(m.network.weights)
    sym = np.maximum(ebar, ebar.T)
    k = len(blocks)
    out = np.empty((k, k))
    for a, ba in enumerate(blocks):
        for b, bb in enumerate(blocks):
            out[a, b] = sym[np.ix_(ba, bb)].min()
    return FiniteNetwork(_component_names(m), out)


def is_dissimilarity(net):
    w = net.weights
    off = ~np.eye(w.shape[0], dtype=bool)
    return bool(np.all(np.diag(w) == 0) and np.all(w[off] > 0))


def reversibility(net):
    """Largest forward/backward weight ratio over ordered pairs of distinct nodes.

    Raises
    ------
    NetworkValidationError
        If ``net`` does not carry dissimilarity weights.
    """
    if not is_dissimilarity(net):
        raise NetworkValidationError("reversibility is defined only for dissimilarity networks")
    w = net.weights
    if w.shape[0] == 1:
        return 1.0
    off = ~np.eye(w.shape[0], dtype=bool)
    return float((w[off] / w.T[off]).max())


def component_constants(m):
    """Per-component self-weight constant, or None where a block's diagonal varies.

    A path-connected component has a single self-weight shared by all its
    points; on declared finite components this is only a sanity check.
    """
    blocks = _require_components(m)
    diag = np.diag(m.network.weights)
    out = []
    for block in blocks:
        vals = diag[list(block)]
        out.append(float(vals[0]) if np.all(vals == vals[0]) else None)
    return out


# -- JSON -----------------------------------------------------------------

def network_to_dict(net):
    """Serialise a FiniteNetwork or MeasuredNetwork to the network JSON schema."""
    if isinstance(net, MeasuredNetwork):
        base = net.network
        out = {"nodes": list(base.nodes), "weights": base.weights.tolist()}
        out["measure"] = net.measure.tolist()
        if net.components is not None:
            out["components"] = [[base.nodes[i] for i in b] for b in net.components]
        return out
    return {"nodes": list(net.nodes), "weights": net.weights.tolist()}


def network_from_dict(data):
    """Parse the network JSON schema.

    Returns a :class:`MeasuredNetwork` when ``measure`` or ``components`` is
    present, otherwise a :class:`FiniteNetwork`. Missing ``measure`` with
    declared components defaults to uniform.
    """
    if not isinstance(data, dict):
        raise NetworkValidationError("network JSON must be an object")
    for key in ("nodes", "weights"):
        if key not in data:
            raise NetworkValidationError(f"network JSON: missing field '{key}'")
    nodes = data["nodes"]
    if not isinstance(nodes, list) or not all(isinstance(v, str) for v in nodes):
        raise NetworkValidationError("network JSON: field 'nodes' must be a list of strings")
    rows = data["weights"]
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise NetworkValidationError("network JSON: field 'weights' must be a list of rows")
    for r, row in enumerate(rows):
        if len(row) != len(rows):
            raise NetworkValidationError(
                f"network JSON: field 'weights' row {r} has {len(row)} entries, expected {len(rows)}"
            )
        for c, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise NetworkValidationError(f"network JSON: weights[{r}][{c}] is not a number")
    net = FiniteNetwork(tuple(nodes), np.array(rows, dtype=np.float64).reshape(len(rows), len(rows)))
    measure = data.get("measure")
    comps = data.get("components")
    if measure is None and comps is None:
        return net
    pos = {v: i for i, v in enumerate(net.nodes)}
    blocks = None
    if comps is not None:
        if not isinstance(comps, list):
            raise NetworkValidationError("network JSON: field 'components' must be a list of lists")
        blocks = []
        for b in comps:
            if not isinstance(b, list) or not b:
                raise NetworkValidationError("network JSON: each component must be a nonempty list")
            try:
                blocks.append(tuple(pos[v] for v in b))
            except KeyError as exc:
                raise NetworkValidationError(
                    f"network JSON: component mentions unknown node {exc.args[0]!r}"
                ) from None
    if measure is None:
        measure = np.full(net.n_nodes, 1.0 / net.n_nodes)
    return MeasuredNetwork(net, np.asarray(measure, dtype=np.float64), tuple(blocks) if blocks else None)


def dumps_network(net):
    return json.dumps(network_to_dict(net))


def loads_network(text):
    return network_from_dict(json.loads(text))
