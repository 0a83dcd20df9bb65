"""POMDP generative models: structure, validation and the JSON model format.

Matrices follow the row convention used by :class:`~agency_phenotyper.prob.Channel`:

* ``A[s, o]``      likelihood p(o | s)
* ``B[a][s, s2]``  transition p(s2 | s, a)
* ``C[o]``         log-preference (nats) for observation o
* ``D[s]``         initial state prior
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .exceptions import InvalidModel, ModelShapeMismatch, UnknownAction
from .prob import Categorical, Channel, _normalize_modalities, product_labels
from .validation import SUM_TOL

# violation kinds reported by validate_model
DUPLICATE_LABEL = "DuplicateLabel"
LIKELIHOOD_SHAPE_MISMATCH = "LikelihoodShapeMismatch"
LIKELIHOOD_NOT_STOCHASTIC = "LikelihoodNotStochastic"
TRANSITION_SHAPE_MISMATCH = "TransitionShapeMismatch"
TRANSITION_NOT_STOCHASTIC = "TransitionNotStochastic"
NEGATIVE_ENTRY = "NegativeEntry"
PREFERENCE_SHAPE_MISMATCH = "PreferenceShapeMismatch"
PREFERENCE_NOT_FINITE = "PreferenceNotFinite"
PRIOR_SHAPE_MISMATCH = "PriorShapeMismatch"
PRIOR_NOT_NORMALIZED = "PriorNotNormalized"
MODALITY_MISMATCH = "ModalityMismatch"
MALFORMED_DOCUMENT = "MalformedDocument"


@dataclass(frozen=True)
class Violation:
    kind: str
    location: str
    message: str = ""


@dataclass(frozen=True, eq=False)
class GenerativeModel:
    """The agent's world model. Construction does not enforce invariants;
    call :func:`validate_model` (the loader does so automatically)."""

    state_labels: tuple
    obs_labels: tuple
    action_labels: tuple
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    modalities: tuple | None = None
    name: str = "model"

    def __post_init__(self):
        for attr in ("state_labels", "obs_labels", "action_labels"):
            object.__setattr__(self, attr, tuple(str(x) for x in getattr(self, attr)))
        for attr in ("A", "B", "C", "D"):
            arr = np.array(getattr(self, attr), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        object.__setattr__(self, "modalities", _normalize_modalities(self.modalities))

    @property
    def n_states(self):
        return len(self.state_labels)

    @property
    def n_obs(self):
        return len(self.obs_labels)

    @property
    def n_actions(self):
        return len(self.action_labels)

    def action_index(self, action):
        try:
            return self.action_labels.index(action)
        except ValueError:
            raise UnknownAction(f"unknown action {action!r}; expected one of {self.action_labels}") from None

    def obs_index(self, observation):
        try:
            return self.obs_labels.index(observation)
        except ValueError:
            raise KeyError(f"unknown observation {observation!r}") from None

    @property
    def likelihood(self) -> Channel:
        return Channel(self.state_labels, self.obs_labels, self.A, self.modalities)

    def transition(self, action) -> Channel:
        return Channel(self.state_labels, self.state_labels, self.B[self.action_index(action)])

    @property
    def prior(self) -> Categorical:
        return Categorical(self.state_labels, self.D)

    @property
    def preferences(self):
        return {o: float(c) for o, c in zip(self.obs_labels, self.C)}

    def replace(self, **changes) -> "GenerativeModel":
        return replace(self, **changes)

    def to_dict(self):
        d = {
            "name": self.name,
            "states": list(self.state_labels),
            "observations": list(self.obs_labels),
        }
        if self.modalities is not None:
            d["modalities"] = [{"name": n, "labels": list(ls)} for n, ls in self.modalities]
        d.update(
            actions=list(self.action_labels),
            A=self.A.tolist(),
            B=self.B.tolist(),
            C=self.C.tolist(),
            D=self.D.tolist(),
        )
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            state_labels=d["states"],
            obs_labels=d["observations"],
            action_labels=d["actions"],
            A=d["A"],
            B=d["B"],
            C=d["C"],
            D=d["D"],
            modalities=d.get("modalities"),
            name=d.get("name", "model"),
        )


@dataclass(frozen=True)
class Belief:
    dist: Categorical
    step: int = 0

    @property
    def labels(self):
        return self.dist.labels

    @property
    def probs(self):
        return self.dist.probs


def _check_stochastic_rows(mat, kind, where, out):
    for i, row in enumerate(mat):
        if np.any(row < 0):
            out.append(Violation(NEGATIVE_ENTRY, f"{where}[{i}]", "negative probability"))
        if not np.all(np.isfinite(row)) or abs(row.sum() - 1.0) > SUM_TOL:
            out.append(Violation(kind, f"{where}[{i}]", f"row sums to {row.sum()!r}"))


def validate_model(m: GenerativeModel) -> list:
    """Return every structural violation in ``m``; an empty list means valid."""
    out = []
    for attr in ("state_labels", "obs_labels", "action_labels"):
        labels = getattr(m, attr)
        if len(set(labels)) != len(labels):
            out.append(Violation(DUPLICATE_LABEL, attr, "labels must be unique"))
    S, O, U = m.n_states, m.n_obs, m.n_actions

    if m.A.shape != (S, O):
        out.append(Violation(LIKELIHOOD_SHAPE_MISMATCH, "A", f"expected {(S, O)}, got {m.A.shape}"))
    else:
        _check_stochastic_rows(m.A, LIKELIHOOD_NOT_STOCHASTIC, "A", out)

    if m.B.shape != (U, S, S):
        out.append(Violation(TRANSITION_SHAPE_MISMATCH, "B", f"expected {(U, S, S)}, got {m.B.shape}"))
    else:
        for a, action in enumerate(m.action_labels):
            _check_stochastic_rows(m.B[a], TRANSITION_NOT_STOCHASTIC, f"B[{action}]", out)

    if m.C.shape != (O,):
        out.append(Violation(PREFERENCE_SHAPE_MISMATCH, "C", f"expected {(O,)}, got {m.C.shape}"))
    elif not np.all(np.isfinite(m.C)):
        out.append(Violation(PREFERENCE_NOT_FINITE, "C", "preferences must be finite"))

    if m.D.shape != (S,):
        out.append(Violation(PRIOR_SHAPE_MISMATCH, "D", f"expected {(S,)}, got {m.D.shape}"))
    elif np.any(m.D < 0) or abs(m.D.sum() - 1.0) > SUM_TOL:
        out.append(Violation(PRIOR_NOT_NORMALIZED, "D", f"prior sums to {m.D.sum()!r}"))

    if m.modalities is not None and product_labels(m.modalities) != m.obs_labels:
        out.append(Violation(MODALITY_MISMATCH, "modalities", "observations are not the modality product"))
    return out


def check_belief(belief, m: GenerativeModel) -> Categorical:
    """Accept a Belief, Categorical or bare vector over ``m``'s states."""
    if isinstance(belief, Belief):
        belief = belief.dist
    if not isinstance(belief, Categorical):
        belief = Categorical(m.state_labels, belief)
    if belief.labels != m.state_labels:
        if set(belief.labels) != set(m.state_labels):
            raise ModelShapeMismatch(f"belief labels {belief.labels} do not match model states")
        belief = belief.reorder(m.state_labels)
    return belief


def model_to_json(m: GenerativeModel) -> str:
    return json.dumps(m.to_dict(), indent=2) + "\n"


def model_from_json(text: str) -> GenerativeModel:
    try:
        m = GenerativeModel.from_dict(json.loads(text))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidModel([Violation(MALFORMED_DOCUMENT, "document", str(exc))]) from None
    violations = validate_model(m)
    if violations:
        raise InvalidModel(violations)
    return m


def save_model(m: GenerativeModel, path) -> None:
    Path(path).write_text(model_to_json(m))


def load_model(path) -> GenerativeModel:
    return model_from_json(Path(path).read_text())
