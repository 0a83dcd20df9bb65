"""Model manipulations, agency phenotype classification and batteries."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

from .empowerment import Variant
from .exceptions import BatteryError, InvalidParameter, OutOfRange
from .inference import EpisodeTrace, run_episode
from .model import GenerativeModel
from .tmaze import environment_for_model

PHENOTYPE_EPS = 1e-6
CUE_PENALTY = -1.0


class PhenotypeClass(IntEnum):
    ZERO = 0
    INTERMEDIATE = 1
    HIGH = 2

    @property
    def label(self):
        return self.name.capitalize()


@dataclass(frozen=True)
class PhenotypeLabel:
    phenotype: PhenotypeClass
    bits: float
    max_bits: float

    def to_dict(self):
        return {"class": self.phenotype.label, "bits": self.bits, "max_bits": self.max_bits}


def classify_phenotype(bits: float, n_actions: int, eps: float = PHENOTYPE_EPS) -> PhenotypeLabel:
    """Zero below ``eps``, High within ``eps`` of log2(n_actions), else Intermediate."""
    if n_actions < 1:
        raise OutOfRange("n_actions must be >= 1")
    max_bits = math.log2(n_actions)
    if not (-eps <= bits <= max_bits + eps) or math.isnan(bits):
        raise OutOfRange(f"{bits} bits is outside [0, log2({n_actions})]")
    if bits < eps:
        cls = PhenotypeClass.ZERO
    elif bits > max_bits - eps:
        cls = PhenotypeClass.HIGH
    else:
        cls = PhenotypeClass.INTERMEDIATE
    return PhenotypeLabel(cls, float(bits), max_bits)


class Preset(str, Enum):
    STANDARD = "standard"
    PREFERENCE_INVERTED = "preference-inverted"
    LIKELIHOOD_CORRUPTED = "likelihood-corrupted"
    FLAT_PREFERENCE = "flat-preference"


_PARAMS = {Preset.LIKELIHOOD_CORRUPTED: {"alpha": (0.0, 1.0)}}


@dataclass(frozen=True)
class ManipulationSpec:
    name: str
    preset: Preset
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        try:
            preset = Preset(self.preset)
        except ValueError:
            raise InvalidParameter(f"unknown preset {self.preset!r}") from None
        object.__setattr__(self, "preset", preset)
        allowed = _PARAMS.get(preset, {})
        for key, value in self.params.items():
            if key not in allowed:
                raise InvalidParameter(f"preset {preset.value} takes no parameter {key!r}")
            lo, hi = allowed[key]
            if not lo <= value <= hi:
                raise InvalidParameter(f"{key}={value} outside [{lo}, {hi}]")

    @classmethod
    def parse(cls, token: str) -> "ManipulationSpec":
        """``preset`` or ``preset:alpha`` (e.g. ``likelihood-corrupted:0.5``)."""
        preset, _, arg = token.partition(":")
        params = {}
        if arg:
            try:
                params["alpha"] = float(arg)
            except ValueError:
                raise InvalidParameter(f"cannot parse parameter in {token!r}") from None
        return cls(token, preset, params)

    def to_dict(self):
        return {"name": self.name, "preset": self.preset.value, "params": dict(self.params)}


def _reward_roles(m: GenerativeModel):
    """Per observation: 'cheese', 'shock', 'cue' or None, plus the cheese<->shock counterpart index."""
    roles, partner = [], []
    if m.modalities is None:
        for label in m.obs_labels:
            roles.append({"Cheese": "cheese", "Shock": "shock", "LeftObs": "cue", "RightObs": "cue"}.get(label))
        swap = {"Cheese": "Shock", "Shock": "Cheese"}
        partner = [m.obs_labels.index(swap[o]) if o in swap and swap[o] in m.obs_labels else None for o in m.obs_labels]
        return roles, partner
    names = [n.lower() for n, _ in m.modalities]
    if "reward" not in names:
        return [None] * m.n_obs, [None] * m.n_obs
    r = names.index("reward")
    pos = names.index("position") if "position" in names else None
    for label in m.obs_labels:
        parts = label.split("|")
        role = {"Cheese": "cheese", "Shock": "shock"}.get(parts[r])
        if role is None and pos is not None and parts[pos] == "Cue":
            role = "cue"
        roles.append(role)
        if role in ("cheese", "shock"):
            parts[r] = "Shock" if role == "cheese" else "Cheese"
            partner.append(m.obs_labels.index("|".join(parts)))
        else:
            partner.append(None)
    return roles, partner


def apply_manipulation(m: GenerativeModel, spec: ManipulationSpec) -> GenerativeModel:
    """Return a manipulated copy of ``m``; the input model is untouched."""
    preset = spec.preset
    if preset is Preset.STANDARD:
        return m
    if preset is Preset.FLAT_PREFERENCE:
        return m.replace(C=np.zeros(m.n_obs), name=f"{m.name}+{preset.value}")
    if preset is Preset.LIKELIHOOD_CORRUPTED:
        alpha = float(spec.params.get("alpha", 0.5))
        A = (1.0 - alpha) * m.A + alpha / m.n_obs
        return m.replace(A=A, name=f"{m.name}+{preset.value}:{alpha:g}")
    if preset is Preset.PREFERENCE_INVERTED:
        roles, partner = _reward_roles(m)
        if not any(r in ("cheese", "shock") for r in roles):
            raise InvalidParameter(f"model {m.name!r} has no Cheese/Shock observations to invert")
        C = m.C.copy()
        for i, role in enumerate(roles):
            if role in ("cheese", "shock") and partner[i] is not None:
                C[i] = m.C[partner[i]]
            elif role == "cue":
                C[i] = CUE_PENALTY
        return m.replace(C=C, name=f"{m.name}+{preset.value}")
    raise InvalidParameter(f"unhandled preset {preset!r}")


@dataclass
class BatteryCell:
    spec: ManipulationSpec
    seed: int
    trace: EpisodeTrace
    labels: list

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "seed": self.seed,
            "phenotypes": [lab.to_dict() for lab in self.labels],
            "trace": self.trace.to_dict(),
        }


@dataclass
class PhenotypeReport:
    cells: list
    aggregates: dict
    horizon: int
    gamma: float
    mode: str

    def summary(self) -> dict:
        """spec name -> per-step phenotype class names of the mean subjective-potential bits."""
        return {
            name: [step["phenotype"] for step in steps] for name, steps in self.aggregates.items()
        }

    def summary_lines(self):
        lines = []
        for name, steps in self.aggregates.items():
            classes = ", ".join(s["phenotype"] for s in steps)
            bits = ", ".join(f"{s[Variant.SUBJECTIVE_POTENTIAL.value]['mean']:.5f}" for s in steps)
            lines.append(f"{name}: [{classes}]  mean bits [{bits}]")
        return lines

    def to_dict(self):
        return {
            "horizon": self.horizon,
            "gamma": self.gamma,
            "mode": self.mode,
            "aggregates": self.aggregates,
            "cells": [c.to_dict() for c in self.cells],
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        variants = [v.value for v in Variant]
        writer.writerow(["spec", "seed", "step", "action", "observation", *variants, "phenotype"])
        for cell in self.cells:
            for step, label in zip(cell.trace.steps, cell.labels):
                writer.writerow(
                    [cell.spec.name, cell.seed, step.step, step.action, step.observation]
                    + [repr(step.bits(v)) for v in variants]
                    + [label.phenotype.label]
                )
        return buf.getvalue()


def _aggregate(cells, n_actions):
    """Per spec, per step: mean/min/max bits of every variant across seeds.

    Uses fsum/min/max so the result does not depend on seed order.
    """
    out = {}
    by_spec = {}
    for cell in cells:
        by_spec.setdefault(cell.spec.name, []).append(cell)
    for name, group in by_spec.items():
        horizon = len(group[0].trace.steps)
        steps = []
        for t in range(horizon):
            entry = {"step": t + 1}
            for v in Variant:
                vals = [c.trace.steps[t].bits(v) for c in group]
                entry[v.value] = {"mean": math.fsum(vals) / len(vals), "min": min(vals), "max": max(vals)}
            mean_bits = entry[Variant.SUBJECTIVE_POTENTIAL.value]["mean"]
            entry["phenotype"] = classify_phenotype(mean_bits, n_actions).phenotype.label
            steps.append(entry)
        out[name] = steps
    return out


def _run_cell(args):
    model, spec, seed, horizon, gamma, mode, env_factory = args
    try:
        manipulated = apply_manipulation(model, spec)
        env = env_factory(manipulated, seed) if env_factory else environment_for_model(manipulated, seed=seed)
        trace = run_episode(manipulated, env, horizon, gamma, mode, seed)
    except Exception as exc:
        raise BatteryError(spec.name, seed, exc) from exc
    labels = [classify_phenotype(s.bits(Variant.SUBJECTIVE_POTENTIAL), model.n_actions) for s in trace.steps]
    return BatteryCell(spec, seed, trace, labels)


def run_battery(
    model: GenerativeModel,
    env_seeds,
    specs,
    horizon: int = 2,
    gamma: float = 16.0,
    mode: str = "argmax",
    *,
    env_factory=None,
    jobs: int = 1,
) -> PhenotypeReport:
    """Run one episode per (spec, seed) and classify every step.

    Each seed picks the environment's context and seeds the episode.
    ``env_factory(model, seed)`` overrides the default T-maze lookup. Cells
    are independent; with ``jobs > 1`` they run in worker processes, and
    results are always ordered by (spec, seed) as given.
    """
    env_seeds = list(env_seeds)
    specs = [s if isinstance(s, ManipulationSpec) else ManipulationSpec.parse(s) for s in specs]
    if not env_seeds:
        raise InvalidParameter("env_seeds must be non-empty")
    if not specs:
        raise InvalidParameter("specs must be non-empty")
    work = [(model, spec, seed, horizon, gamma, mode, env_factory) for spec in specs for seed in env_seeds]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell, work))
    else:
        cells = [_run_cell(w) for w in work]
    return PhenotypeReport(cells, _aggregate(cells, model.n_actions), horizon, float(gamma), mode)
