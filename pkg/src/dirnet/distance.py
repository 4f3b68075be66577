"""Correspondences, distortion and the network distance ``d_N``.

The exact distance is computed through the map-pair reformulation: minimise
``0.5 * max(dis(phi), dis(psi), C_XY(phi, psi), C_YX(psi, phi))`` over all
pairs of maps ``phi: X -> Y`` and ``psi: Y -> X``. The search is a
depth-first branch and bound over the map values, so the worst case is
``|Y|**|X| * |X|**|Y|`` leaves; a budget guard refuses larger instances.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ._validation import check_index_set, check_weights
from .exceptions import BudgetExceededError, NetworkValidationError

DN_BUDGET_ENV = "DIRNET_DN_BUDGET"
DEFAULT_DN_BUDGET = 6**6 * 6**6


def dn_budget():
    raw = os.environ.get(DN_BUDGET_ENV)
    if raw is None:
        return DEFAULT_DN_BUDGET
    try:
        return int(float(raw))
    except ValueError:
        raise NetworkValidationError(f"{DN_BUDGET_ENV}={raw!r} is not a number") from None


def _w(net):
    return check_weights(net)


@dataclass(frozen=True)
class Correspondence:
    """A relation between node indices of two networks with surjective projections."""

    pairs: frozenset
    n_x: int
    n_y: int

    def __post_init__(self):
        pairs = frozenset((int(a), int(b)) for a, b in self.pairs)
        for a, b in pairs:
            if not (0 <= a < self.n_x and 0 <= b < self.n_y):
                raise NetworkValidationError(f"pair {(a, b)} out of range")
        if {a for a, _ in pairs} != set(range(self.n_x)):
            raise NetworkValidationError("correspondence leaves a node of X uncovered")
        if {b for _, b in pairs} != set(range(self.n_y)):
            raise NetworkValidationError("correspondence leaves a node of Y uncovered")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_maps(cls, phi, psi):
        """The correspondence ``{(x, phi(x))} | {(psi(y), y)}``."""
        pairs = {(x, y) for x, y in enumerate(phi)} | {(x, y) for y, x in enumerate(psi)}
        return cls(frozenset(pairs), len(phi), len(psi))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))


def distortion_correspondence(X, Y, R):
    """Largest ``|e_X(x, x') - e_Y(y, y')|`` over pairs of pairs in ``R``."""
    wx, wy = _w(X), _w(Y)
    if not isinstance(R, Correspondence):
        R = Correspondence(frozenset(R), wx.shape[0], wy.shape[0])
    elif (R.n_x, R.n_y) != (wx.shape[0], wy.shape[0]):
        raise NetworkValidationError("correspondence sizes do not match the networks")
    pairs = sorted(R.pairs)
    xs = [a for a, _ in pairs]
    ys = [b for _, b in pairs]
    return float(np.abs(wx[np.ix_(xs, xs)] - wy[np.ix_(ys, ys)]).max())


def _check_map(f, n_from, n_to, name):
    f = check_index_set(f, n_to, name, allow_empty=True)
    if len(f) != n_from:
        raise NetworkValidationError(f"{name} must assign a target to each of {n_from} nodes")
    return f


def distortion_map(X, Y, phi):
    """``max |e_X(x, x') - e_Y(phi(x), phi(x'))|``."""
    wx, wy = _w(X), _w(Y)
    phi = _check_map(phi, wx.shape[0], wy.shape[0], "phi")
    return float(np.abs(wx - wy[np.ix_(phi, phi)]).max())


def codistortion(X, Y, phi, psi):
    """The two co-distortion terms ``(C_XY(phi, psi), C_YX(psi, phi))``."""
    wx, wy = _w(X), _w(Y)
    phi = _check_map(phi, wx.shape[0], wy.shape[0], "phi")
    psi = _check_map(psi, wy.shape[0], wx.shape[0], "psi")
    # rows index x, columns index y
    c_xy = np.abs(wx[:, psi] - wy[phi, :]).max()
    c_yx = np.abs(wy[:, phi] - wx[psi, :]).max()
    return float(c_xy), float(c_yx)


def map_pair_cost(X, Y, phi, psi):
    """Half the largest of the four distortion terms; an upper bound on ``d_N``."""
    c_xy, c_yx = codistortion(X, Y, phi, psi)
    return 0.5 * max(distortion_map(X, Y, phi), distortion_map(Y, X, psi), c_xy, c_yx)


def _greedy_maps(wx, wy):
    nx, ny = wx.shape[0], wy.shape[0]
    if nx == ny:
        return list(range(nx)), list(range(ny))
    dx, dy = np.diag(wx), np.diag(wy)
    phi = [int(np.argmin(np.abs(dy - dx[i]))) for i in range(nx)]
    psi = [int(np.argmin(np.abs(dx - dy[j]))) for j in range(ny)]
    return phi, psi


def _twice_cost(wx, wy, phi, psi):
    return max(
        np.abs(wx - wy[np.ix_(phi, phi)]).max(),
        np.abs(wy - wx[np.ix_(psi, psi)]).max(),
        np.abs(wx[:, psi] - wy[phi, :]).max(),
        np.abs(wy[:, phi] - wx[psi, :]).max(),
    )


def _search(wx, wy):
    """Return (twice the optimum, phi, psi) with the lexicographically first optimal maps."""
    nx, ny = wx.shape[0], wy.shape[0]
    ex, ey = wx.tolist(), wy.tolist()
    phi0, psi0 = _greedy_maps(wx, wy)
    best = [float(_twice_cost(wx, wy, phi0, psi0)), None]
    phi = [0] * nx
    psi = [0] * ny

    def beaten(cur):
        return cur > best[0] or (best[1] is not None and cur >= best[0])

    # phi(x_k) = y adds |e_X(k, j) - e_Y(y, phi j)| both ways for j <= k
    def assign_phi(k, cur):
        rowk = ex[k]
        for y in range(ny):
            rowy = ey[y]
            c = cur
            v = abs(rowk[k] - rowy[y])
            if v > c:
                c = v
            for j in range(k):
                pj = phi[j]
                v = abs(rowk[j] - rowy[pj])
                if v > c:
                    c = v
                v = abs(ex[j][k] - ey[pj][y])
                if v > c:
                    c = v
            if beaten(c):
                continue
            phi[k] = y
            if k + 1 < nx:
                assign_phi(k + 1, c)
            else:
                assign_psi(0, c)

    # psi(y_m) = x adds dis(psi) terms and both co-distortion terms over all of X
    def assign_psi(m, cur):
        rowm = ey[m]
        for x in range(nx):
            rowx = ex[x]
            c = cur
            v = abs(rowm[m] - rowx[x])
            if v > c:
                c = v
            for j in range(m):
                qj = psi[j]
                v = abs(rowm[j] - rowx[qj])
                if v > c:
                    c = v
                v = abs(ey[j][m] - ex[qj][x])
                if v > c:
                    c = v
            if beaten(c):
                continue
            for i in range(nx):
                pi = phi[i]
                v = abs(ex[i][x] - ey[pi][m])
                if v > c:
                    c = v
                v = abs(rowm[pi] - rowx[i])
                if v > c:
                    c = v
            if beaten(c):
                continue
            psi[m] = x
            if m + 1 < ny:
                assign_psi(m + 1, c)
            else:
                best[0] = c
                best[1] = (tuple(phi), tuple(psi))

    assign_phi(0, 0.0)
    if best[1] is None:
        best[1] = (tuple(phi0), tuple(psi0))
    return best[0], list(best[1][0]), list(best[1][1])


def dn_exact(X, Y, budget=None, return_witness=False):
    """Exact network distance between two finite networks.

    Parameters
    ----------
    X, Y : FiniteNetwork or array_like
    budget : int, optional
        Maximum admissible ``|X|**|Y| * |Y|**|X|``. Defaults to the
        ``DIRNET_DN_BUDGET`` environment variable, else ``6**6 * 6**6``.
    return_witness : bool
        Also return an optimal ``(phi, psi)``, the first one found in
        lexicographic map order.

    Raises
    ------
    BudgetExceededError
        When the map-pair space exceeds ``budget``.
    """
    wx, wy = _w(X), _w(Y)
    nx, ny = wx.shape[0], wy.shape[0]
    if budget is None:
        budget = dn_budget()
    size = nx**ny * ny**nx
    if size > budget:
        raise BudgetExceededError(
            DN_BUDGET_ENV,
            f"exact d_N on {nx}x{ny} nodes needs {size} map pairs (budget {budget})",
        )
    twice, phi, psi = _search(wx, wy)
    value = 0.5 * twice
    if return_witness:
        return value, (phi, psi)
    return value


def dn_to_point(X, alpha):
    """Distance to the one-node network with self-weight ``alpha``."""
    w = _w(X)
    return 0.5 * float(np.abs(w - float(alpha)).max())


def dn_upper_linf(X, Xprime_weights):
    """Half the entrywise sup-distance: the diagonal correspondence bound."""
    a = _w(X)
    b = check_weights(Xprime_weights, "Xprime_weights")
    if a.shape != b.shape:
        raise NetworkValidationError(f"shape mismatch {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).max())


def correspondence_from_cover(X, cover, sample):
    """Correspondence between ``X`` and the subnetwork on ``sample``.

    Every pair lands inside a single cover element. Each element ``U_i``
    picks a representative ``s_i`` (its first sample point); the elements
    are then disjointified in order, each keeping its own representative,
    and ``x`` is matched with every sample point sharing its disjoint piece.
    Indices on the sample side are positions within ``sample``.
    """
    n = _w(X).shape[0]
    blocks = [set(check_index_set(b, n, "cover element")) for b in cover]
    if not blocks:
        raise NetworkValidationError("cover must be nonempty")
    if set().union(*blocks) != set(range(n)):
        raise NetworkValidationError("cover does not cover every node")
    sample = check_index_set(sample, n, "sample")
    if len(set(sample)) != len(sample):
        raise NetworkValidationError("sample contains repeated indices")
    reps = []
    for i, b in enumerate(blocks):
        hits = [s for s in sample if s in b]
        if not hits:
            raise NetworkValidationError(f"sample misses cover element {i}")
        reps.append(hits[0])
    rep_set = set(reps)
    claimed = set()
    pieces = []
    for b, s in zip(blocks, reps):
        piece = ((b - rep_set) - claimed) | {s}
        claimed |= piece
        pieces.append(piece)
    pos = {s: k for k, s in enumerate(sample)}
    pairs = set()
    for piece in pieces:
        sample_side = [pos[s] for s in piece if s in pos]
        for x in piece:
            for k in sample_side:
                pairs.add((x, k))
    return Correspondence(frozenset(pairs), n, len(sample))
