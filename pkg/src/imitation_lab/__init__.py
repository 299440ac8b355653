"""A desk-scale adversarial imitation learning laboratory.

A 2D point-mass lift task with injectable spurious observation channels, a
scripted expert, a distributional actor-critic learner, GAIL-style state-only
discriminators, a constrained-discriminator variant that trains the reward to
ignore episode-identifying channels, and actor-side early stopping. Small
enough that the full experiment grid runs on one machine, instrumented enough
to show exactly when an adversarial reward is keying on the wrong thing.
"""
from .config import ExperimentConfig, agent_env_config, expert_env_config
from .env import EnvConfig, PointLiftEnv, Transition, collect_demos
from .errors import (ConfigError, DataFormatError, NumericalError,
                     SamplingError, UsageError)
from .harness import RunResult, Trainer, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DataFormatError", "EnvConfig", "ExperimentConfig",
    "NumericalError", "PointLiftEnv", "RunResult", "SamplingError", "Trainer",
    "Transition", "UsageError", "agent_env_config", "collect_demos",
    "evaluate", "expert_env_config", "train", "__version__",
]
