"""Empowerment: channel capacity between an action and the next observation.

Four readings are supported, crossing where the channel comes from
(the agent's model vs. the environment's true dynamics) with whether the
action distribution is free (capacity) or fixed to the agent's policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import InvalidChannel, LabelMismatch, TooManyInputs, UnknownModality
from .model import GenerativeModel, check_belief
from .prob import Categorical, Channel, mutual_information_bits, product_labels

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10_000


class Variant(str, Enum):
    SUBJECTIVE_POTENTIAL = "subjective_potential"
    SUBJECTIVE_ACTUAL = "subjective_actual"
    OBJECTIVE_POTENTIAL = "objective_potential"
    OBJECTIVE_ACTUAL = "objective_actual"

    @property
    def is_potential(self):
        return self.value.endswith("potential")


@dataclass(frozen=True)
class EmpowermentReading:
    variant: Variant
    bits: float
    optimal_input: Categorical | None = None
    iterations: int = 0
    converged: bool = True
    gap: float = 0.0

    def to_dict(self):
        return {
            "variant": self.variant.value,
            "bits": self.bits,
            "optimal_input": None if self.optimal_input is None else self.optimal_input.to_dict(),
            "iterations": self.iterations,
            "converged": self.converged,
            "gap": self.gap,
        }

    @classmethod
    def from_dict(cls, d):
        opt = d.get("optimal_input")
        return cls(
            variant=Variant(d["variant"]),
            bits=d["bits"],
            optimal_input=None if opt is None else Categorical.from_dict(opt),
            iterations=d.get("iterations", 0),
            converged=d.get("converged", True),
            gap=d.get("gap", 0.0),
        )


def _divergences(W, logW, q):
    """D(W[a] || q) in bits for every input row a."""
    logq = np.log2(np.where(q > 0, q, 1.0))
    terms = np.where(W > 0, W * (logW - logq), 0.0)
    # mass on an output no current input reaches: unbounded divergence
    terms[(W > 0) & (q <= 0)] = np.inf
    return terms.sum(axis=1)


def _bounds(W, logW, p):
    """Return (lower, upper, weights) bracketing capacity at input ``p``."""
    D = _divergences(W, logW, p @ W)
    shift = D.max()
    weights = p * np.exp2(D - shift)
    Z = weights.sum()
    return float(np.log2(Z) + shift), float(shift), weights / Z


def _mi_nats(W, logW, p):
    q = p @ W
    D = _divergences(W, logW, q)
    return float(p @ D) * np.log(2.0)


def _sum_zero_basis(k):
    """Orthonormal basis (k x k-1) of the directions whose entries sum to zero."""
    q, _ = np.linalg.qr(np.eye(k) - 1.0 / k)
    return q[:, : k - 1]


def _newton_polish(W, logW, p, max_steps=50):
    """Active-set Newton ascent on I(p) over the current support of ``p``.

    Along directions that leave the output marginal unchanged, I(p) is
    exactly linear and the Hessian is singular; any ascent there is followed
    straight to the simplex boundary, dropping an input. Elsewhere a Newton
    step is taken with backtracking. Used only to seed Blahut-Arimoto.
    """
    p = p.copy()
    p[p <= 1e-9 * p.max()] = 0.0
    p /= p.sum()
    current = _mi_nats(W, logW, p)
    for _ in range(max_steps):
        idx = np.flatnonzero(p > 0)
        k = idx.size
        if k < 2:
            break
        Ws = W[idx]
        q = p @ W
        live = q > 0
        g = _divergences(Ws, logW[idx], q) * np.log(2.0)
        H = -(Ws[:, live] / q[live]) @ Ws[:, live].T
        Z = _sum_zero_basis(k)
        lam, V = np.linalg.eigh(Z.T @ H @ Z)
        gr = V.T @ (Z.T @ g)
        flat = np.abs(lam) <= 1e-10 * max(np.abs(lam).max(), 1e-300)
        if np.linalg.norm(gr[flat]) > 1e-13:
            d = Z @ (V[:, flat] @ gr[flat])
            t = np.inf
        else:
            y = np.zeros_like(gr)
            y[~flat] = -gr[~flat] / lam[~flat]
            d = Z @ (V @ y)
            t = 1.0
        if np.max(np.abs(d)) < 1e-15:
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(d < 0, -p[idx] / d, np.inf)
        edge = int(np.argmin(ratios))
        t = min(t, ratios[edge])
        if not np.isfinite(t):
            break
        accepted = False
        while t > 1e-12:
            trial = p.copy()
            trial[idx] = np.maximum(p[idx] + t * d, 0.0)
            if t == ratios[edge]:
                trial[idx[edge]] = 0.0
            trial /= trial.sum()
            value = _mi_nats(W, logW, trial)
            if value >= current:
                accepted = True
                break
            t /= 2.0
        if not accepted:
            break
        improvement = value - current
        p, current = trial, value
        if improvement < 1e-16:
            break
    return p


def blahut_arimoto(
    ch: Channel,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    variant: Variant = Variant.SUBJECTIVE_POTENTIAL,
    polish_every: int = 50,
) -> EmpowermentReading:
    """Capacity of ``ch`` in bits by Blahut-Arimoto alternating maximization.

    Starting from the uniform input distribution, each iteration computes
    ``D_a = D(W[a] || p W)`` and updates ``p(a) <- p(a) 2^{D_a} / Z``.
    ``log2 Z`` and ``max_a D_a`` bracket the capacity from below and above;
    iteration stops once the lower bound has stopped moving and the bracket
    is narrower than ``tol``. ``converged`` is False only if ``max_iter``
    was exhausted first.

    Inputs whose optimal weight is zero but whose divergence sits just below
    capacity make plain iteration sublinear. Every ``polish_every``
    iterations an active-set Newton step on the support proposes a new
    iterate, adopted only if it tightens the bracket (``0`` disables this).
    """
    if not isinstance(ch, Channel):
        raise InvalidChannel("blahut_arimoto expects a Channel")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be > 0 and max_iter >= 1")
    W = ch.matrix
    n = W.shape[0]
    if n == 1:
        return EmpowermentReading(variant, 0.0, Categorical(ch.input_labels, [1.0]), 1, True, 0.0)

    with np.errstate(divide="ignore"):
        logW = np.where(W > 0, np.log2(W), 0.0)
    p = np.full(n, 1.0 / n)
    prev = -np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        lower, upper, updated = _bounds(W, logW, p)
        gap = upper - lower
        if abs(lower - prev) < tol and gap < tol:
            converged = True
            break
        if polish_every and it % polish_every == 0:
            candidate = _newton_polish(W, logW, updated)
            # keep dropped inputs alive so a wrong drop can still recover
            candidate = (1.0 - 1e-13) * candidate + 1e-13 / n
            c_lower, c_upper, c_updated = _bounds(W, logW, candidate)
            if c_upper - c_lower < gap:
                lower, updated = c_lower, c_updated
        prev = lower
        p = updated

    bits = min(max(lower, 0.0), float(np.log2(min(n, W.shape[1]))))
    return EmpowermentReading(
        variant=variant,
        bits=bits,
        optimal_input=Categorical(ch.input_labels, p),
        iterations=it,
        converged=converged,
        gap=max(gap, 0.0),
    )


def _simplex_grid(n, steps):
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        i = np.arange(steps + 1)
        return np.stack([i, steps - i], axis=1) / steps
    i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
    keep = i + j <= steps
    i, j = i[keep], j[keep]
    return np.stack([i, j, steps - i - j], axis=1) / steps


def capacity_oracle(ch: Channel, grid_steps: int = 1000) -> float:
    """Brute-force capacity: best mutual information over a simplex grid.

    Evaluates I = H(output) - H(output | input) at every grid point, so it
    shares no code path with :func:`blahut_arimoto`. Only for <= 3 inputs.
    The result is a lower bound on the true capacity.
    """
    n = ch.shape[0]
    if n > 3:
        raise TooManyInputs(f"grid oracle supports at most 3 inputs, got {n}")
    if grid_steps < 1:
        raise ValueError("grid_steps must be >= 1")
    W = ch.matrix
    P = _simplex_grid(n, grid_steps)
    row_entropy = -np.sum(np.where(W > 0, W * np.log2(np.where(W > 0, W, 1.0)), 0.0), axis=1)
    Q = P @ W
    out_entropy = -np.sum(np.where(Q > 0, Q * np.log2(np.where(Q > 0, Q, 1.0)), 0.0), axis=1)
    mi = out_entropy - P @ row_entropy
    return max(0.0, float(mi.max()))


def actual_empowerment(
    ch: Channel, policy: Categorical, *, variant: Variant = Variant.SUBJECTIVE_ACTUAL
) -> EmpowermentReading:
    """Mutual information at the agent's own action distribution (no maximization)."""
    if set(policy.labels) != set(ch.input_labels) or len(policy) != len(ch.input_labels):
        raise LabelMismatch(f"policy labels {policy.labels} do not match channel inputs {ch.input_labels}")
    return EmpowermentReading(variant, mutual_information_bits(policy, ch))


def subjective_channel(model: GenerativeModel, belief) -> Channel:
    """Predicted next-observation distribution per action under the agent's model."""
    q = check_belief(belief, model).probs
    rows = np.array([(q @ model.B[a]) @ model.A for a in range(model.n_actions)])
    rows = rows / rows.sum(axis=1, keepdims=True)
    return Channel(model.action_labels, model.obs_labels, rows, model.modalities)


def objective_channel(env, env_state_prior: Categorical | None = None, *, condition_on_context=False) -> Channel:
    """Next-observation distribution per action under the environment's true dynamics.

    With no prior given, the environment's own prior at its current position
    is used: context marginalized 50/50, or the realized context when
    ``condition_on_context`` is set.
    """
    if env_state_prior is None:
        env_state_prior = env.state_prior(condition_on_context=condition_on_context)
    if set(env_state_prior.labels) != set(env.state_labels):
        raise LabelMismatch("prior is not over the environment's states")
    q = env_state_prior.reorder(env.state_labels).probs
    O = env.observation_matrix()
    rows = np.array([(q @ env.transition_matrix(a)) @ O for a in env.action_labels])
    rows = rows / rows.sum(axis=1, keepdims=True)
    return Channel(env.action_labels, env.observation_labels, rows, env.modalities)


def modality_restricted_channel(ch: Channel, keep_modalities) -> Channel:
    """Marginalize a product-space channel onto a subset of its modalities."""
    if ch.modalities is None:
        raise UnknownModality("channel declares no modality factorization")
    keep = [str(k).lower() for k in keep_modalities]
    if not keep:
        raise ValueError("keep_modalities must be non-empty")
    names = [name.lower() for name, _ in ch.modalities]
    for k in keep:
        if k not in names:
            raise UnknownModality(f"unknown modality {k!r}; available: {[n for n, _ in ch.modalities]}")
    sizes = [len(labels) for _, labels in ch.modalities]
    tensor = ch.matrix.reshape(ch.shape[0], *sizes)
    drop = tuple(i + 1 for i, name in enumerate(names) if name not in keep)
    kept = tuple(m for m, name in zip(ch.modalities, names) if name in keep)
    marg = tensor.sum(axis=drop) if drop else tensor
    marg = marg.reshape(ch.shape[0], -1)
    return Channel(ch.input_labels, product_labels(kept), marg, kept)
