"""T-maze environments and the agent models paired with them.

Two variants share one ground-truth machine (hidden cheese context plus the
agent's position):

* the minimal maze: four observations (Cheese, Shock, RightObs, LeftObs),
  arms absorbing, cue site revealing the context;
* the multi-modality maze: observations are the 4 x 3 x 2 product of
  Position, Reward and Context modalities (24 labels).
"""

from __future__ import annotations

import sys
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

from .exceptions import LabelMismatch, UnknownAction
from .model import GenerativeModel, load_model, model_from_json, model_to_json
from .prob import Categorical, product_labels

ACTIONS = ("Left", "Right", "Cue")
MINIMAL_OBSERVATIONS = ("Cheese", "Shock", "RightObs", "LeftObs")
CANONICAL_STATES = ("Start", "Trap", "CueRight", "CueLeft", "CheeseTerm", "ShockTerm")

# natural-log preferences; the pragmatic terms tie at the first step so the
# epistemic term (ln 2 for the cue) decides it
CHEESE_PREFERENCE = 3.0
SHOCK_PREFERENCE = -3.0


class Context(str, Enum):
    CHEESE_LEFT = "CheeseLeft"
    CHEESE_RIGHT = "CheeseRight"


class Position(str, Enum):
    CENTER = "Center"
    ARM_LEFT = "ArmLeft"
    ARM_RIGHT = "ArmRight"
    CUE_SITE = "CueSite"


_NEXT_POSITION = {
    Position.CENTER: {"Left": Position.ARM_LEFT, "Right": Position.ARM_RIGHT, "Cue": Position.CUE_SITE},
    Position.CUE_SITE: {"Left": Position.ARM_LEFT, "Right": Position.ARM_RIGHT, "Cue": Position.CUE_SITE},
    Position.ARM_LEFT: dict.fromkeys(ACTIONS, Position.ARM_LEFT),
    Position.ARM_RIGHT: dict.fromkeys(ACTIONS, Position.ARM_RIGHT),
}


def _state_label(context, position):
    return f"{Context(context).value}/{Position(position).value}"


class TMazeEnv:
    """Minimal T-maze. Mutable, single owner.

    The center is never observed (every action leaves it), so its
    observation row is uniform and only exists to keep the matrix total.
    """

    name = "minimal-tmaze"
    modalities = None
    action_labels = ACTIONS
    observation_labels = MINIMAL_OBSERVATIONS

    def __init__(self, context, seed=None):
        self.context = Context(context)
        self.state_labels = tuple(_state_label(c, p) for c in Context for p in Position)
        self.reset(seed)

    def reset(self, seed=None):
        self.position = Position.CENTER
        self._rng = np.random.default_rng(seed)

    def __repr__(self):
        return f"{type(self).__name__}(context={self.context.value}, position={self.position.value})"

    @property
    def state(self):
        return _state_label(self.context, self.position)

    def next_position(self, position, action):
        try:
            return _NEXT_POSITION[Position(position)][action]
        except KeyError:
            raise UnknownAction(f"unknown action {action!r}; expected one of {self.action_labels}") from None

    def observation_distribution(self, context, position) -> np.ndarray:
        context, position = Context(context), Position(position)
        out = np.zeros(len(self.observation_labels))
        if position is Position.CENTER:
            out[:] = 1.0 / out.size
        elif position is Position.CUE_SITE:
            out[3 if context is Context.CHEESE_LEFT else 2] = 1.0
        else:
            cheese_here = (position is Position.ARM_LEFT) == (context is Context.CHEESE_LEFT)
            out[0 if cheese_here else 1] = 1.0
        return out

    def step(self, action) -> str:
        self.position = self.next_position(self.position, action)
        dist = self.observation_distribution(self.context, self.position)
        if np.count_nonzero(dist) == 1:
            return self.observation_labels[int(np.argmax(dist))]
        return self.observation_labels[int(self._rng.choice(dist.size, p=dist))]

    def observation_matrix(self) -> np.ndarray:
        return np.array(
            [self.observation_distribution(*label.split("/")) for label in self.state_labels]
        )

    def transition_matrix(self, action) -> np.ndarray:
        n = len(self.state_labels)
        T = np.zeros((n, n))
        for i, label in enumerate(self.state_labels):
            context, position = label.split("/")
            T[i, self.state_labels.index(_state_label(context, self.next_position(position, action)))] = 1.0
        return T

    def state_prior(self, condition_on_context=False) -> Categorical:
        """Prior over environment states at the current position.

        By default the context is marginalized 50/50, which is what an agent
        without privileged access faces; ``condition_on_context`` puts all
        mass on the realized context instead.
        """
        probs = np.zeros(len(self.state_labels))
        if condition_on_context:
            probs[self.state_labels.index(self.state)] = 1.0
        else:
            for c in Context:
                probs[self.state_labels.index(_state_label(c, self.position))] = 0.5
        return Categorical(self.state_labels, probs)


POSITION_MODALITY = ("Position", ("Center", "Right", "Left", "Cue"))
REWARD_MODALITY = ("Reward", ("None", "Cheese", "Shock"))
CONTEXT_MODALITY = ("Context", ("Right", "Left"))
MULTIMODALITY = (POSITION_MODALITY, REWARD_MODALITY, CONTEXT_MODALITY)

_POSITION_OBS = {
    Position.CENTER: "Center",
    Position.ARM_RIGHT: "Right",
    Position.ARM_LEFT: "Left",
    Position.CUE_SITE: "Cue",
}


class MultiModalityTMazeEnv(TMazeEnv):
    """T-maze emitting Position x Reward x Context observations.

    Position is always revealed. Reward is None except at the arms. The
    context modality is uniform noise everywhere except the cue site, where
    it names the cheese side.
    """

    name = "multimodality-tmaze"
    modalities = MULTIMODALITY
    observation_labels = product_labels(MULTIMODALITY)

    def observation_distribution(self, context, position) -> np.ndarray:
        context, position = Context(context), Position(position)
        pos = np.zeros(4)
        pos[POSITION_MODALITY[1].index(_POSITION_OBS[position])] = 1.0
        reward = np.zeros(3)
        if position in (Position.ARM_LEFT, Position.ARM_RIGHT):
            cheese_here = (position is Position.ARM_LEFT) == (context is Context.CHEESE_LEFT)
            reward[1 if cheese_here else 2] = 1.0
        else:
            reward[0] = 1.0
        ctx = np.full(2, 0.5)
        if position is Position.CUE_SITE:
            ctx[:] = 0.0
            ctx[1 if context is Context.CHEESE_LEFT else 0] = 1.0
        return np.einsum("i,j,k->ijk", pos, reward, ctx).ravel()


def _sample_context(seed):
    rng = np.random.default_rng(seed)
    return Context.CHEESE_LEFT if rng.random() < 0.5 else Context.CHEESE_RIGHT


def build_minimal_env(context=None, seed=None) -> TMazeEnv:
    """Minimal maze at the center; context given or drawn 50/50 from ``seed``."""
    if context is None:
        context = _sample_context(seed)
    return TMazeEnv(context, seed=seed)


def build_canonical_model() -> GenerativeModel:
    """The agent's six-state model of the minimal maze.

    The trap is a single coin-toss state: the agent does not model that the
    environment keeps repeating its first arm observation, which is why
    Left/Right carry no information. The Start likelihood row is uniform and
    never conditioned on, since episodes begin by acting.
    """
    S, O = CANONICAL_STATES, MINIMAL_OBSERVATIONS
    s = {label: i for i, label in enumerate(S)}
    o = {label: i for i, label in enumerate(O)}

    A = np.zeros((len(S), len(O)))
    A[s["Start"]] = 1.0 / len(O)
    A[s["Trap"], [o["Cheese"], o["Shock"]]] = 0.5
    A[s["CueRight"], o["RightObs"]] = 1.0
    A[s["CueLeft"], o["LeftObs"]] = 1.0
    A[s["CheeseTerm"], o["Cheese"]] = 1.0
    A[s["ShockTerm"], o["Shock"]] = 1.0

    B = np.zeros((len(ACTIONS), len(S), len(S)))
    for a in range(len(ACTIONS)):
        for absorbing in ("Trap", "CheeseTerm", "ShockTerm"):
            B[a, s[absorbing], s[absorbing]] = 1.0
    left, right, cue = (ACTIONS.index(x) for x in ("Left", "Right", "Cue"))
    B[left, s["Start"], s["Trap"]] = 1.0
    B[left, s["CueRight"], s["ShockTerm"]] = 1.0
    B[left, s["CueLeft"], s["CheeseTerm"]] = 1.0
    B[right, s["Start"], s["Trap"]] = 1.0
    B[right, s["CueRight"], s["CheeseTerm"]] = 1.0
    B[right, s["CueLeft"], s["ShockTerm"]] = 1.0
    B[cue, s["Start"], [s["CueRight"], s["CueLeft"]]] = 0.5
    B[cue, s["CueRight"], s["CueRight"]] = 1.0
    B[cue, s["CueLeft"], s["CueLeft"]] = 1.0

    C = np.zeros(len(O))
    C[o["Cheese"]] = CHEESE_PREFERENCE
    C[o["Shock"]] = SHOCK_PREFERENCE

    D = np.zeros(len(S))
    D[s["Start"]] = 1.0
    return GenerativeModel(S, O, ACTIONS, A, B, C, D, name="minimal-tmaze")


def build_multimodality_model() -> GenerativeModel:
    """Agent model of the multi-modality maze with beliefs fixed to the true dynamics."""
    env = MultiModalityTMazeEnv(Context.CHEESE_LEFT)
    reward = [label.split("|")[1] for label in env.observation_labels]
    C = np.array([{"Cheese": CHEESE_PREFERENCE, "Shock": SHOCK_PREFERENCE}.get(r, 0.0) for r in reward])
    return GenerativeModel(
        env.state_labels,
        env.observation_labels,
        env.action_labels,
        A=env.observation_matrix(),
        B=np.array([env.transition_matrix(a) for a in env.action_labels]),
        C=C,
        D=env.state_prior().probs,
        modalities=env.modalities,
        name="multimodality-tmaze",
    )


def build_multimodality_env_and_model(context=None, seed=None):
    if context is None:
        context = _sample_context(seed)
    return MultiModalityTMazeEnv(context, seed=seed), build_multimodality_model()


BUILTIN_MODELS = {
    "minimal-tmaze": build_canonical_model,
    "multimodality-tmaze": build_multimodality_model,
}


def builtin_model_text(name) -> str:
    """The checked-in JSON for a builtin model."""
    return resources.files("agency_phenotyper").joinpath("data", f"{name}.json").read_text()


def load_builtin_model(name) -> GenerativeModel:
    if name not in BUILTIN_MODELS:
        raise KeyError(f"unknown builtin model {name!r}; expected one of {sorted(BUILTIN_MODELS)}")
    return model_from_json(builtin_model_text(name))


def resolve_model(name_or_path) -> GenerativeModel:
    """A builtin model name or a path to a model file."""
    if name_or_path in BUILTIN_MODELS:
        return load_builtin_model(name_or_path)
    return load_model(name_or_path)


def environment_for_model(model: GenerativeModel, seed=None, context=None) -> TMazeEnv:
    """Pick the maze whose observation and action labels match ``model``."""
    for env_cls in (TMazeEnv, MultiModalityTMazeEnv):
        if set(model.obs_labels) == set(env_cls.observation_labels) and set(model.action_labels) <= set(
            env_cls.action_labels
        ):
            return env_cls(_sample_context(seed) if context is None else context, seed=seed)
    raise LabelMismatch(f"no T-maze environment matches the labels of model {model.name!r}")


def write_builtin_models(directory) -> list:
    """Regenerate the checked-in model files from the builders."""
    directory = Path(directory)
    written = []
    for name, builder in BUILTIN_MODELS.items():
        path = directory / f"{name}.json"
        path.write_text(model_to_json(builder()))
        written.append(path)
    return written


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "data"
    for path in write_builtin_models(target):
        print(path)
