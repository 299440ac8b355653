"""Experiment configuration: task presets, method/provider wiring, JSON I/O.

Defaults follow the reference hyperparameter table where that is affordable in
pure numpy (gamma, batch size, target update period, value support, n-step,
demo fraction, exploration noise, Adam) and are desk-scaled where it is not
(network widths, learner rate, replay capacity, step budget). Every field can
be overridden from JSON or CLI flags.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

from .errors import ConfigError
from .env import EnvConfig, inject_appearance_shift
from .stopping import parse_aes

TASKS = (
    "lift",
    "lift_distracted",
    "lift_distracted_seeded",
    "lift_appearance",
    "lift_appearance_distracted",
)

METHODS = ("bc", "d4pgfd", "gail", "gail_aes", "trail")

REWARD_PROVIDERS = ("env_sparse", "gail", "trail", "oracle")

# provider implied by each method unless explicitly overridden
_DEFAULT_PROVIDER = {
    "bc": None,
    "d4pgfd": "env_sparse",
    "gail": "gail",
    "gail_aes": "gail",
    "trail": "trail",
}

_DEFAULT_AES = {
    "bc": "off",
    "d4pgfd": "off",
    "gail": "off",
    "gail_aes": "adaptive",
    "trail": "adaptive",
}

_APPEARANCE_SHIFT = (0.5, 0.5)

# fixed per-task demo seeds: the 100 demo layouts are one fixed rng stream
# shared by every run of a task (this is the memorization channel). Holdout
# demos use a disjoint stream and id range.
_DEMO_SEEDS = {
    "lift": 101,
    "lift_distracted": 102,
    "lift_distracted_seeded": 103,
    "lift_appearance": 104,
    "lift_appearance_distracted": 105,
}
HOLDOUT_SEED_OFFSET = 7000
HOLDOUT_ID_START = 500_000


@dataclass
class ExperimentConfig:
    task: str = "lift"
    method: str = "trail"
    seed: int = 0
    steps: int = 20000                  # learner-step budget
    single_thread: bool = False
    reward_provider: str = ""           # "" -> derived from method
    aes: str = ""                       # "" -> derived from method
    constraint_strategy: str = "early:10"
    t_patience: int = 10

    # value distribution and RL hyperparameters
    v_min: float = -50.0
    v_max: float = 150.0
    v_bins: int = 21
    n_step: int = 5
    gamma: float = 0.99
    lr: float = 3e-4
    disc_lr: float = 1e-3
    batch_size: int = 128
    target_update_period: int = 100
    replay_capacity: int = 100_000
    actor_count: int = 4
    demo_fraction: float = 1.0 / 16.0
    # actors explore with Ornstein-Uhlenbeck noise (temporally correlated,
    # so the gripper actually travels instead of jittering in place)
    exploration_sigma: float = 0.2
    ou_theta: float = 0.15
    # the policy holds still until the critic has fit some data; ascending a
    # freshly initialized critic just drives actions into the tanh corners
    policy_warmup: int = 1000

    # network widths
    policy_hidden: tuple = (64, 64)
    critic_hidden: tuple = (128, 128)
    disc_hidden: tuple = (32, 32)

    # discriminator training
    disc_batch: int = 128
    disc_update_period: int = 1
    disc_warmup: int = 500
    augment: bool = True
    augment_noise: float = 0.01
    augment_drop: float = 0.1

    # demos
    demo_count: int = 100
    demo_noise: float = 0.05
    holdout_count: int = 25

    # loop plumbing
    min_replay: int = 1000
    snapshot_period: int = 100
    eval_every: int = 2000
    eval_episodes: int = 10
    agent_pool_capacity: int = 5000
    random_constraint_steps: int = 50

    # behavior cloning
    bc_epochs: int = 300
    bc_batch: int = 256
    bc_lr: float = 1e-3

    def provider(self):
        if self.reward_provider:
            return self.reward_provider
        return _DEFAULT_PROVIDER[self.method]

    def aes_spec(self):
        return parse_aes(self.aes or _DEFAULT_AES[self.method])

    def constraint(self):
        """(strategy, count) parsed from constraint_strategy."""
        text = self.constraint_strategy
        for name in ("early", "random"):
            if text.startswith(name + ":"):
                try:
                    k = int(text.split(":", 1)[1])
                except ValueError:
                    raise ConfigError(f"bad constraint strategy {text!r}") from None
                if k < 1:
                    raise ConfigError("constraint strategy count must be >= 1")
                return name, k
        raise ConfigError(f"unknown constraint strategy {text!r} "
                          "(expected early:K or random:N)")

    def validate(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}, expected one of {TASKS}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}, expected one of {METHODS}")
        provider = self.provider()
        if self.method == "bc":
            if self.reward_provider:
                raise ConfigError("bc does not use a reward provider")
        elif provider not in REWARD_PROVIDERS:
            raise ConfigError(f"unknown reward provider {provider!r}")
        if self.method == "d4pgfd" and provider != "env_sparse":
            raise ConfigError("d4pgfd requires the env_sparse reward provider")
        if self.method in ("gail", "gail_aes") and provider == "trail":
            raise ConfigError("plain adversarial methods cannot use the trail provider")
        if self.method == "trail":
            if provider != "trail":
                raise ConfigError("trail requires the trail reward provider")
            self.constraint()  # must parse
        spec = self.aes_spec()
        if spec["variant"] == "adaptive" and self.method != "bc" \
                and not uses_discriminator(self):
            raise ConfigError("adaptive episode stopping scores states with the "
                              "discriminator; this configuration has none "
                              "(use aes=off, fixed:T or oracle)")
        if self.method == "d4pgfd" and self.demo_fraction <= 0:
            # demo replay is the whole point of learning from demonstrations
            raise ConfigError("d4pgfd needs demo_fraction > 0")
        if not (0 <= self.demo_fraction <= 1):
            raise ConfigError("demo_fraction must be in [0, 1]")
        if self.steps < 1 or self.batch_size < 1 or self.actor_count < 1:
            raise ConfigError("steps, batch_size and actor_count must be >= 1")
        if self.v_bins < 2 or not (self.v_max > self.v_min):
            raise ConfigError("value support needs v_bins >= 2 and v_max > v_min")
        if self.n_step < 1:
            raise ConfigError("n_step must be >= 1")
        if self.policy_warmup < 0:
            raise ConfigError("policy_warmup must be >= 0")
        if not (0.0 <= self.ou_theta <= 1.0):
            raise ConfigError("ou_theta must be in [0, 1]")
        return self

    def demo_seed(self):
        return _DEMO_SEEDS[self.task]


def agent_env_config(config):
    """Env configuration the agent trains and evaluates in."""
    n_distract = 4 if "distracted" in config.task else 0
    return EnvConfig(n_distractors=n_distract)


def expert_env_config(config):
    """Env configuration demos are collected in (appearance shift applies
    to the expert side only)."""
    cfg = agent_env_config(config)
    if "appearance" in config.task:
        cfg = inject_appearance_shift(cfg, _APPEARANCE_SHIFT)
    return cfg


def uses_seeded_init(config):
    return config.task == "lift_distracted_seeded"


def uses_discriminator(config):
    return config.method in ("gail", "gail_aes", "trail") and config.provider() in ("gail", "trail")


def config_to_dict(config):
    d = asdict(config)
    d["policy_hidden"] = list(config.policy_hidden)
    d["critic_hidden"] = list(config.critic_hidden)
    d["disc_hidden"] = list(config.disc_hidden)
    return d


def config_from_dict(d):
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(d)
    for key in ("policy_hidden", "critic_hidden", "disc_hidden"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    cfg = ExperimentConfig(**kwargs)
    cfg.validate()
    return cfg


def load_config(path):
    with open(path) as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: not valid JSON ({e})") from e
    return config_from_dict(d)


def save_config(config, path):
    with open(path, "w") as f:
        json.dump(config_to_dict(config), f, indent=2, sort_keys=True)
        f.write("\n")
