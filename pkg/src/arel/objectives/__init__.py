from .boltzmann import (EnumeratedSpace, EnumerationError, boltzmann, boltzmann_over,
                        enumerate_substories, log_partition, policy_objective_exact)
from .config import BaselineState, ConfigError, TrainConfig, preset
from .steps import (discriminator_prob, entropy_estimate, gan_policy_step, gan_reward_step, gan_weight,
                    metric_rl_step, policy_gradient_step, reward_step, xe_step)
from .train import TrainLog, arel_train, build_models, metric_rl_train, parse_record, xe_ss_train

__all__ = [
    "BaselineState",
    "ConfigError",
    "EnumeratedSpace",
    "EnumerationError",
    "TrainConfig",
    "TrainLog",
    "arel_train",
    "boltzmann",
    "boltzmann_over",
    "build_models",
    "discriminator_prob",
    "entropy_estimate",
    "enumerate_substories",
    "gan_policy_step",
    "gan_reward_step",
    "gan_weight",
    "log_partition",
    "metric_rl_step",
    "metric_rl_train",
    "parse_record",
    "policy_gradient_step",
    "policy_objective_exact",
    "preset",
    "reward_step",
    "xe_ss_train",
    "xe_step",
]
