from .config import DROPOUT_PRESETS, DROPOUT_SWEEP, TrainerConfig
from .trainer import Counters, Trainer, train
from .updates import (
    UpdateStreams,
    bootstrap_target,
    compute_target,
    policy_objective_values,
    policy_update_step,
    q_update_step,
    select_subset,
    target_members,
)
from .variants import AlgorithmVariant, apply_modifiers, resolve_variant

__all__ = [
    "AlgorithmVariant",
    "Counters",
    "DROPOUT_PRESETS",
    "DROPOUT_SWEEP",
    "Trainer",
    "TrainerConfig",
    "UpdateStreams",
    "apply_modifiers",
    "bootstrap_target",
    "compute_target",
    "policy_objective_values",
    "policy_update_step",
    "q_update_step",
    "resolve_variant",
    "select_subset",
    "target_members",
    "train",
]
