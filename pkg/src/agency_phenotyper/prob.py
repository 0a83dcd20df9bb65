"""Finite categorical distributions, channels, and information measures in bits.

Every quantity returned from here is in bits. ``0 * log 0`` is taken as 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import (
    AllZeroWeights,
    InvalidChannel,
    InvalidDistribution,
    LabelMismatch,
    SupportMismatch,
)
from .validation import check_channel, check_distribution, check_labels

MODALITY_SEP = "|"


@dataclass(frozen=True, eq=False)
class Categorical:
    """A normalized probability vector over an ordered set of labels."""

    labels: tuple
    probs: np.ndarray

    def __post_init__(self):
        probs = check_distribution(self.probs)
        try:
            labels = check_labels(self.labels, probs.size)
        except ValueError as exc:
            raise InvalidDistribution(str(exc)) from None
        probs.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, labels):
        labels = tuple(labels)
        return cls(labels, np.full(len(labels), 1.0 / len(labels)))

    @classmethod
    def delta(cls, labels, at):
        labels = tuple(labels)
        if at not in labels:
            raise KeyError(at)
        probs = np.zeros(len(labels))
        probs[labels.index(at)] = 1.0
        return cls(labels, probs)

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, label):
        return float(self.probs[self.labels.index(label)])

    def __repr__(self):
        inner = ", ".join(f"{k}={v:.6g}" for k, v in zip(self.labels, self.probs))
        return f"Categorical({inner})"

    def as_dict(self):
        return {label: float(p) for label, p in zip(self.labels, self.probs)}

    def reorder(self, labels) -> "Categorical":
        """Return the same distribution with its labels in the given order."""
        labels = tuple(labels)
        if set(labels) != set(self.labels) or len(labels) != len(self.labels):
            raise LabelMismatch(f"cannot align labels {self.labels} to {labels}")
        idx = [self.labels.index(label) for label in labels]
        return Categorical(labels, self.probs[idx])

    def allclose(self, other, atol=1e-12):
        if set(other.labels) != set(self.labels):
            return False
        return bool(np.allclose(self.probs, other.reorder(self.labels).probs, rtol=0, atol=atol))

    def to_dict(self):
        return {"labels": list(self.labels), "probs": [float(p) for p in self.probs]}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["labels"]), np.asarray(d["probs"], dtype=float))


def product_labels(modalities) -> tuple:
    """Labels of the product space of ``(name, labels)`` modality pairs."""
    return tuple(
        MODALITY_SEP.join(combo) for combo in itertools.product(*[labels for _, labels in modalities])
    )


def _normalize_modalities(modalities):
    if modalities is None:
        return None
    out = []
    for item in modalities:
        if isinstance(item, dict):
            name, labels = item["name"], item["labels"]
        else:
            name, labels = item
        out.append((str(name), tuple(str(label) for label in labels)))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic conditional distribution p(output | input).

    ``matrix[i, j]`` is the probability of output ``j`` given input ``i``.
    ``modalities`` optionally declares the outputs as a product of factors,
    given as ``(name, labels)`` pairs in row-major order.
    """

    input_labels: tuple
    output_labels: tuple
    matrix: np.ndarray
    modalities: tuple | None = None

    def __post_init__(self):
        matrix = check_channel(self.matrix)
        try:
            inputs = check_labels(self.input_labels, matrix.shape[0], "input_labels")
            outputs = check_labels(self.output_labels, matrix.shape[1], "output_labels")
        except ValueError as exc:
            raise InvalidChannel(str(exc)) from None
        modalities = _normalize_modalities(self.modalities)
        if modalities is not None and product_labels(modalities) != outputs:
            raise InvalidChannel("output labels are not the declared product of modality labels")
        matrix.setflags(write=False)
        object.__setattr__(self, "input_labels", inputs)
        object.__setattr__(self, "output_labels", outputs)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "modalities", modalities)

    @property
    def rows(self):
        return [Categorical(self.output_labels, row) for row in self.matrix]

    def row(self, label):
        return Categorical(self.output_labels, self.matrix[self.input_labels.index(label)])

    @property
    def shape(self):
        return self.matrix.shape

    def allclose(self, other, atol=1e-12):
        return (
            self.input_labels == other.input_labels
            and self.output_labels == other.output_labels
            and bool(np.allclose(self.matrix, other.matrix, rtol=0, atol=atol))
        )

    def to_dict(self):
        d = {
            "inputs": list(self.input_labels),
            "outputs": list(self.output_labels),
            "rows": [[float(x) for x in row] for row in self.matrix],
        }
        if self.modalities is not None:
            d["modalities"] = [{"name": n, "labels": list(ls)} for n, ls in self.modalities]
        return d

    @classmethod
    def from_dict(cls, d):
        rows = d["rows"]
        n_out = len(rows[0]) if rows else 0
        inputs = d.get("inputs") or [f"a{i}" for i in range(len(rows))]
        outputs = d.get("outputs") or [f"o{j}" for j in range(n_out)]
        return cls(tuple(inputs), tuple(outputs), np.asarray(rows, dtype=float), d.get("modalities"))


def normalize(weights: Sequence[float], labels) -> Categorical:
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidDistribution("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise AllZeroWeights("every weight is zero")
    return Categorical(tuple(labels), w / total)


def entropy_array(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return max(0.0, float(-np.sum(nz * np.log2(nz))))


def entropy_bits(d: Categorical) -> float:
    return min(entropy_array(d.probs), float(np.log2(len(d))))


def kl_bits(p: Categorical, q: Categorical) -> float:
    q = q.reorder(p.labels)
    mask = p.probs > 0
    if np.any(q.probs[mask] == 0):
        raise SupportMismatch("p places mass where q has none")
    val = np.sum(p.probs[mask] * (np.log2(p.probs[mask]) - np.log2(q.probs[mask])))
    return max(0.0, float(val))


def mutual_information_array(p, W) -> float:
    """I(A;O) in bits for input vector ``p`` and row-stochastic matrix ``W``."""
    p = np.asarray(p, dtype=float)
    W = np.asarray(W, dtype=float)
    marginal = p @ W
    joint = p[:, None] * W
    mask = joint > 0
    ratio = np.ones_like(W)
    ratio[mask] = W[mask] / np.broadcast_to(marginal, W.shape)[mask]
    val = float(np.sum(joint[mask] * np.log2(ratio[mask])))
    return max(0.0, val)


def mutual_information_bits(input: Categorical, ch: Channel) -> float:
    p = input.reorder(ch.input_labels).probs
    val = mutual_information_array(p, ch.matrix)
    # I <= min(H(A), log2 |O|); clamp rounding overshoot
    return min(val, entropy_array(p), float(np.log2(ch.shape[1])))
