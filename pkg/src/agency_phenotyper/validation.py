"""Input validation helpers shared by the value types and the estimators."""

import numpy as np

from .exceptions import InvalidChannel, InvalidDistribution

SUM_TOL = 1e-12


def check_distribution(p, tol=SUM_TOL):
    """Return ``p`` as a renormalized 1-d float array.

    Raises InvalidDistribution if ``p`` has negative or non-finite entries or
    does not sum to one within ``tol``.
    """
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidDistribution(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistribution("distribution has non-finite entries")
    if np.any(arr < 0):
        raise InvalidDistribution("distribution has negative entries")
    total = arr.sum()
    if abs(total - 1.0) > tol:
        raise InvalidDistribution(f"distribution sums to {total!r}, not 1")
    return arr / total


def check_channel(X, tol=SUM_TOL):
    """Return ``X`` as a row-stochastic 2-d float array (rows renormalized).

    Raises InvalidChannel on malformed input.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidChannel(f"expected a non-empty 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidChannel("channel has non-finite entries")
    if np.any(arr < 0):
        bad = int(np.argwhere(arr < 0)[0][0])
        raise InvalidChannel(f"row {bad} has negative entries")
    sums = arr.sum(axis=1)
    off = np.abs(sums - 1.0) > tol
    if np.any(off):
        bad = int(np.flatnonzero(off)[0])
        raise InvalidChannel(f"row {bad} sums to {sums[bad]!r}, not 1")
    return arr / sums[:, None]


def check_labels(labels, n, what="labels"):
    labels = tuple(str(label) for label in labels)
    if len(labels) != n:
        raise ValueError(f"{what}: expected {n} labels, got {len(labels)}")
    if len(set(labels)) != len(labels):
        raise ValueError(f"{what}: labels must be unique")
    return labels
