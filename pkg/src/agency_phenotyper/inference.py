"""Belief updating, expected free energy, policy selection and episodes.

Policies are single actions (one-step horizon). Beliefs are exact Bayesian
posteriors over a single discrete state factor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .empowerment import (
    EmpowermentReading,
    Variant,
    actual_empowerment,
    blahut_arimoto,
    objective_channel,
    subjective_channel,
)
from .exceptions import AllZeroWeights, ImpossibleObservation, LabelMismatch
from .model import Belief, GenerativeModel, check_belief
from .prob import Categorical, kl_bits, normalize

LN2 = float(np.log(2.0))
TIE_TOL = 1e-12
MODES = ("argmax", "softmax")


@dataclass(frozen=True)
class EfeBreakdown:
    """EFE terms for one action. ``efe = -(epistemic in nats) - pragmatic``; lower is better."""

    action: str
    epistemic_bits: float
    pragmatic: float
    efe: float

    def to_dict(self):
        return {
            "action": self.action,
            "epistemic_bits": self.epistemic_bits,
            "pragmatic": self.pragmatic,
            "efe": self.efe,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["action"], d["epistemic_bits"], d["pragmatic"], d["efe"])


def _step_of(belief):
    return belief.step if isinstance(belief, Belief) else 0


def predict_state(belief, action, m: GenerativeModel) -> Categorical:
    q = check_belief(belief, m).probs
    pred = q @ m.B[m.action_index(action)]
    return Categorical(m.state_labels, pred / pred.sum())


def predict_obs(belief, action, m: GenerativeModel) -> Categorical:
    pred = predict_state(belief, action, m).probs @ m.A
    return Categorical(m.obs_labels, pred / pred.sum())


def bayesian_update(belief, action, observation, m: GenerativeModel) -> Belief:
    """Posterior over the next state after acting and observing."""
    pred = predict_state(belief, action, m).probs
    weights = pred * m.A[:, m.obs_index(observation)]
    try:
        post = normalize(weights, m.state_labels)
    except AllZeroWeights:
        raise ImpossibleObservation(
            f"observation {observation!r} has zero probability after {action!r} under model {m.name!r}"
        ) from None
    return Belief(post, _step_of(belief) + 1)


def expected_info_gain(belief, action, m: GenerativeModel) -> float:
    """E_{q(o|a)} KL[q(s'|o,a) || q(s'|a)] in bits."""
    prior = predict_state(belief, action, m)
    q_obs = prior.probs @ m.A
    total = 0.0
    for j in np.flatnonzero(q_obs > 0):
        post = Categorical(m.state_labels, prior.probs * m.A[:, j] / q_obs[j])
        total += q_obs[j] * kl_bits(post, prior)
    return max(0.0, float(total))


def expected_utility(belief, action, m: GenerativeModel) -> float:
    """Expected log-preference of the predicted observation, in nats."""
    return float(predict_obs(belief, action, m).probs @ m.C)


def efe(belief, action, m: GenerativeModel) -> EfeBreakdown:
    epistemic = expected_info_gain(belief, action, m)
    pragmatic = expected_utility(belief, action, m)
    return EfeBreakdown(str(action), epistemic, pragmatic, 0.0 - epistemic * LN2 - pragmatic)


def evaluate_actions(belief, m: GenerativeModel) -> list:
    return [efe(belief, a, m) for a in m.action_labels]


def softmax_policy(values, labels, gamma) -> Categorical:
    """softmax(-gamma * values) as a Categorical."""
    x = -gamma * np.asarray(values, dtype=float)
    x = np.exp(x - x.max())
    return Categorical(tuple(labels), x / x.sum())


def _as_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def select_action(belief, m: GenerativeModel, gamma=16.0, mode="argmax", rng=None):
    """Choose an action by expected free energy.

    Returns ``(action, policy)`` where ``policy`` is the distribution the
    action was actually drawn from: softmax(-gamma * EFE) in ``softmax`` mode,
    a point mass on the lowest-EFE action in ``argmax`` mode (ties within
    1e-12 go to the lowest action index).
    """
    return _choose([b.efe for b in evaluate_actions(belief, m)], m.action_labels, gamma, mode, rng)


def _choose(efes, labels, gamma, mode, rng):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    G = np.asarray(efes, dtype=float)
    if mode == "argmax":
        idx = int(np.flatnonzero(G <= G.min() + TIE_TOL)[0])
        return labels[idx], Categorical.delta(labels, labels[idx])
    policy = softmax_policy(G, labels, gamma)
    idx = int(_as_rng(rng).choice(len(G), p=policy.probs))
    return labels[idx], policy


@dataclass
class EpisodeStep:
    step: int
    prior: Categorical
    efe: list
    policy: Categorical
    action: str
    observation: str
    posterior: Categorical
    empowerment: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "step": self.step,
            "prior": self.prior.to_dict(),
            "efe": [b.to_dict() for b in self.efe],
            "policy": self.policy.to_dict(),
            "action": self.action,
            "observation": self.observation,
            "posterior": self.posterior.to_dict(),
            "empowerment": {v.value: r.to_dict() for v, r in self.empowerment.items()},
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            step=d["step"],
            prior=Categorical.from_dict(d["prior"]),
            efe=[EfeBreakdown.from_dict(b) for b in d["efe"]],
            policy=Categorical.from_dict(d["policy"]),
            action=d["action"],
            observation=d["observation"],
            posterior=Categorical.from_dict(d["posterior"]),
            empowerment={Variant(k): EmpowermentReading.from_dict(r) for k, r in d["empowerment"].items()},
        )

    def bits(self, variant=Variant.SUBJECTIVE_POTENTIAL):
        return self.empowerment[Variant(variant)].bits

    def chosen_efe(self) -> EfeBreakdown:
        return next(b for b in self.efe if b.action == self.action)


@dataclass
class EpisodeTrace:
    model: str
    seed: int | None
    context: str
    horizon: int
    gamma: float
    mode: str
    steps: list = field(default_factory=list)

    @property
    def actions(self):
        return [s.action for s in self.steps]

    @property
    def observations(self):
        return [s.observation for s in self.steps]

    def bits(self, variant=Variant.SUBJECTIVE_POTENTIAL):
        return [s.bits(variant) for s in self.steps]

    def to_dict(self):
        return {
            "model": self.model,
            "seed": self.seed,
            "context": self.context,
            "horizon": self.horizon,
            "gamma": self.gamma,
            "mode": self.mode,
            "steps": [s.to_dict() for s in self.steps],
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d):
        return cls(
            model=d["model"],
            seed=d["seed"],
            context=d["context"],
            horizon=d["horizon"],
            gamma=d["gamma"],
            mode=d["mode"],
            steps=[EpisodeStep.from_dict(s) for s in d["steps"]],
        )


def _check_compatible(m, env):
    if set(m.obs_labels) != set(env.observation_labels):
        raise LabelMismatch(f"model {m.name!r} observations do not match the environment")
    if not set(m.action_labels) <= set(env.action_labels):
        raise LabelMismatch(f"model {m.name!r} actions are not available in the environment")


def empowerment_readings(m, env, belief, policy, condition_on_context=False) -> dict:
    """All four empowerment readings at the current belief and env position."""
    subj = subjective_channel(m, belief)
    obj = objective_channel(env, condition_on_context=condition_on_context)
    # objective rows follow the env's action order; align to the model's
    obj_policy = Categorical(obj.input_labels, [policy[a] if a in policy.labels else 0.0 for a in obj.input_labels])
    return {
        Variant.SUBJECTIVE_POTENTIAL: blahut_arimoto(subj, variant=Variant.SUBJECTIVE_POTENTIAL),
        Variant.SUBJECTIVE_ACTUAL: actual_empowerment(subj, policy, variant=Variant.SUBJECTIVE_ACTUAL),
        Variant.OBJECTIVE_POTENTIAL: blahut_arimoto(obj, variant=Variant.OBJECTIVE_POTENTIAL),
        Variant.OBJECTIVE_ACTUAL: actual_empowerment(obj, obj_policy, variant=Variant.OBJECTIVE_ACTUAL),
    }


def run_episode(
    m: GenerativeModel,
    env,
    horizon: int = 2,
    gamma: float = 16.0,
    mode: str = "argmax",
    seed: int | None = 0,
    *,
    condition_on_context: bool = False,
) -> EpisodeTrace:
    """Run select_action -> env.step -> bayesian_update for ``horizon`` steps.

    The environment is reset to its start position (its context is kept).
    Empowerment readings are taken at each step's prior belief, before
    acting. Deterministic given ``seed``.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    _check_compatible(m, env)
    env.reset(seed)
    rng = np.random.default_rng(seed)
    belief = Belief(m.prior, 0)
    trace = EpisodeTrace(m.name, seed, env.context.value, horizon, float(gamma), mode)
    for t in range(horizon):
        breakdown = evaluate_actions(belief, m)
        action, policy = _choose([b.efe for b in breakdown], m.action_labels, gamma, mode, rng)
        readings = empowerment_readings(m, env, belief, policy, condition_on_context)
        observation = env.step(action)
        posterior = bayesian_update(belief, action, observation, m)
        trace.steps.append(
            EpisodeStep(t + 1, belief.dist, breakdown, policy, action, observation, posterior.dist, readings)
        )
        belief = posterior
    return trace
