"""Input validation helpers shared by the functional API and the estimators."""

import numpy as np

from .exceptions import NetworkValidationError


def check_weights(weights, name="weights"):
    """Coerce ``weights`` to a square, finite float64 matrix.

    Accepts anything ``np.asarray`` understands, or an object exposing a
    ``weights`` attribute (such as :class:`~dirnet.network.FiniteNetwork`).
    """
    if hasattr(weights, "weights") and not isinstance(weights, np.ndarray):
        weights = weights.weights
    try:
        arr = np.asarray(weights, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise NetworkValidationError(f"{name}: not a numeric matrix ({exc})") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NetworkValidationError(f"{name}: expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise NetworkValidationError(f"{name}: network must have at least one node")
    if not np.all(np.isfinite(arr)):
        raise NetworkValidationError(f"{name}: entries must be finite reals")
    return arr


def check_index(i, n, name="index"):
    if isinstance(i, bool) or not isinstance(i, (int, np.integer)):
        raise NetworkValidationError(f"{name} must be an integer, got {i!r}")
    if not 0 <= i < n:
        raise IndexError(f"{name} {i} out of range for network with {n} nodes")
    return int(i)


def check_index_set(indices, n, name="subset", allow_empty=False):
    idx = [check_index(i, n, name) for i in indices]
    if not idx and not allow_empty:
        raise NetworkValidationError(f"{name} must be nonempty")
    return idx


def as_network(X):
    """Return a FiniteNetwork for a network or a bare weight matrix."""
    from .network import FiniteNetwork

    if isinstance(X, FiniteNetwork):
        return X
    return FiniteNetwork.from_matrix(check_weights(X, "X"))
