import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agency_phenotyper.empowerment import blahut_arimoto, modality_restricted_channel, objective_channel, subjective_channel
from agency_phenotyper.exceptions import LabelMismatch, UnknownAction
from agency_phenotyper.inference import expected_info_gain
from agency_phenotyper.model import Belief, validate_model
from agency_phenotyper.prob import Categorical
from agency_phenotyper.tmaze import (
    BUILTIN_MODELS,
    ACTIONS,
    Context,
    MultiModalityTMazeEnv,
    TMazeEnv,
    build_minimal_env,
    build_multimodality_env_and_model,
    builtin_model_text,
    environment_for_model,
    load_builtin_model,
    resolve_model,
    write_builtin_models,
)

LOG2_3 = math.log2(3)


def test_cue_reveals_context():
    assert build_minimal_env("CheeseLeft").step("Cue") == "LeftObs"
    assert build_minimal_env("CheeseRight").step("Cue") == "RightObs"


def test_arm_repeats_first_observation():
    env = build_minimal_env("CheeseLeft")
    assert env.step("Left") == "Cheese"
    assert env.step("Right") == "Cheese"
    assert env.step("Cue") == "Cheese"


def test_unknown_action():
    with pytest.raises(UnknownAction):
        build_minimal_env("CheeseLeft").step("Jump")


def test_seeded_context_is_fair():
    n = 10_000
    left = sum(build_minimal_env(seed=s).context is Context.CHEESE_LEFT for s in range(n))
    assert 0.48 <= left / n <= 0.52


def test_seeded_context_is_reproducible():
    assert [build_minimal_env(seed=s).context for s in range(20)] == [build_minimal_env(seed=s).context for s in range(20)]


@pytest.mark.parametrize("env_cls", [TMazeEnv, MultiModalityTMazeEnv])
def test_observation_function_is_total_and_deterministic(env_cls):
    env = env_cls("CheeseLeft")
    M = env.observation_matrix()
    np.testing.assert_allclose(M.sum(axis=1), 1.0, atol=1e-15)
    for label, row in zip(env.state_labels, M):
        if not label.endswith("/Center") and env_cls is TMazeEnv:
            assert np.count_nonzero(row) == 1
    for a in ACTIONS:
        T = env.transition_matrix(a)
        assert set(np.unique(T)) == {0.0, 1.0}
        np.testing.assert_array_equal(T.sum(axis=1), 1.0)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["CheeseLeft", "CheeseRight"]), st.sampled_from(["Left", "Right"]),
       st.lists(st.sampled_from(ACTIONS), min_size=1, max_size=8))
def test_arms_are_absorbing(context, first, rest):
    env = build_minimal_env(context)
    obs = env.step(first)
    assert all(env.step(a) == obs for a in rest)


def test_canonical_model_checks(canonical):
    assert validate_model(canonical) == []
    start = Categorical.delta(canonical.state_labels, "Start")
    assert blahut_arimoto(subjective_channel(canonical, start)).bits == pytest.approx(1.0, abs=1e-9)
    assert expected_info_gain(Belief(start), "Cue", canonical) == pytest.approx(1.0, abs=1e-12)


def test_subjective_t1_equals_objective_t1(canonical):
    subj = subjective_channel(canonical, canonical.prior)
    env = build_minimal_env("CheeseRight")
    obj = objective_channel(env, env.state_prior())
    assert subj.input_labels == obj.input_labels
    assert subj.output_labels == obj.output_labels
    assert np.max(np.abs(subj.matrix - obj.matrix)) <= 1e-12


def test_multimodality_shapes():
    env, model = build_multimodality_env_and_model("CheeseLeft")
    assert len(model.obs_labels) == 24
    assert [n for n, _ in model.modalities] == ["Position", "Reward", "Context"]
    assert validate_model(model) == []
    assert env.step("Cue") == "Cue|None|Left"
    assert env.step("Left").startswith("Left|Cheese|")


def test_multimodality_context_noise_is_seeded():
    draws = []
    for _ in range(2):
        env, _ = build_multimodality_env_and_model("CheeseRight", seed=4)
        draws.append([env.step("Right") for _ in range(10)])
    assert draws[0] == draws[1]
    assert all(o.startswith("Right|Cheese|") for o in draws[0])
    assert len({o.split("|")[2] for o in draws[0]}) == 2


def test_multimodality_capacities():
    _, model = build_multimodality_env_and_model("CheeseLeft")
    ch = subjective_channel(model, model.prior)
    full = blahut_arimoto(ch).bits
    assert full == pytest.approx(LOG2_3, abs=1e-9)
    assert blahut_arimoto(modality_restricted_channel(ch, ["Reward"])).bits == pytest.approx(1.0, abs=1e-9)
    assert blahut_arimoto(modality_restricted_channel(ch, ["Context"])).bits == pytest.approx(0.0, abs=1e-12)
    for keep in (["Position"], ["Reward", "Context"], ["Position", "Context"]):
        assert blahut_arimoto(modality_restricted_channel(ch, keep)).bits <= full + 1e-9


@pytest.mark.parametrize("name", sorted(BUILTIN_MODELS))
def test_builtin_files_regenerate_byte_identical(name, tmp_path):
    write_builtin_models(tmp_path)
    assert (tmp_path / f"{name}.json").read_bytes() == builtin_model_text(name).encode()
    assert load_builtin_model(name).to_dict() == BUILTIN_MODELS[name]().to_dict()


def test_resolve_model(tmp_path):
    assert resolve_model("minimal-tmaze").name == "minimal-tmaze"
    path = tmp_path / "m.json"
    path.write_text(builtin_model_text("multimodality-tmaze"))
    assert resolve_model(str(path)).n_obs == 24
    with pytest.raises(KeyError):
        load_builtin_model("nope")


def test_environment_for_model(canonical):
    assert type(environment_for_model(canonical, context="CheeseLeft")) is TMazeEnv
    assert type(environment_for_model(load_builtin_model("multimodality-tmaze"), seed=1)) is MultiModalityTMazeEnv
    with pytest.raises(LabelMismatch):
        environment_for_model(canonical.replace(obs_labels=("a", "b", "c", "d")))


def test_state_prior_variants():
    env = build_minimal_env("CheeseRight")
    assert env.state_prior()["CheeseLeft/Center"] == 0.5
    assert env.state_prior(condition_on_context=True)["CheeseRight/Center"] == 1.0
