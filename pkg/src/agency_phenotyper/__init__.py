"""Discrete active inference with empowerment-based agency phenotyping."""

from .empowerment import (
    EmpowermentReading,
    Variant,
    actual_empowerment,
    blahut_arimoto,
    capacity_oracle,
    modality_restricted_channel,
    objective_channel,
    subjective_channel,
)
from .inference import (
    EfeBreakdown,
    EpisodeTrace,
    bayesian_update,
    efe,
    expected_info_gain,
    expected_utility,
    predict_obs,
    predict_state,
    run_episode,
    select_action,
)
from .model import Belief, GenerativeModel, load_model, save_model, validate_model
from .phenotyping import (
    ManipulationSpec,
    PhenotypeClass,
    PhenotypeLabel,
    Preset,
    apply_manipulation,
    classify_phenotype,
    run_battery,
)
from .prob import Categorical, Channel, entropy_bits, kl_bits, mutual_information_bits, normalize
from .tmaze import (
    build_canonical_model,
    build_minimal_env,
    build_multimodality_env_and_model,
)

__version__ = "0.1.0"

__all__ = [
    "Belief",
    "Categorical",
    "Channel",
    "EfeBreakdown",
    "EmpowermentReading",
    "EpisodeTrace",
    "GenerativeModel",
    "ManipulationSpec",
    "PhenotypeClass",
    "PhenotypeLabel",
    "Preset",
    "Variant",
    "actual_empowerment",
    "apply_manipulation",
    "bayesian_update",
    "blahut_arimoto",
    "build_canonical_model",
    "build_minimal_env",
    "build_multimodality_env_and_model",
    "capacity_oracle",
    "classify_phenotype",
    "efe",
    "entropy_bits",
    "expected_info_gain",
    "expected_utility",
    "kl_bits",
    "load_model",
    "modality_restricted_channel",
    "mutual_information_bits",
    "normalize",
    "objective_channel",
    "predict_obs",
    "predict_state",
    "run_battery",
    "run_episode",
    "save_model",
    "select_action",
    "subjective_channel",
    "validate_model",
]
