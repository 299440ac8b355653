"""Actor-side early stopping of training episodes.

Variants:

  off       never stop early
  fixed:T   stop once the episode step count reaches T
  adaptive  stop after the per-step score has strictly exceeded the lower
            median of all *previous* scores for t_patience consecutive steps;
            ties reset the streak. The current score joins the history only
            after the comparison, so the earliest possible stop is step
            t_patience + 1.
  oracle    the adaptive rule fed with the env's ground-truth reward instead
            of a discriminator score

Stopping only ever truncates training episodes; evaluation episodes never use
it. A truncated episode is not an env terminal, so its last transition keeps
done=False and bootstrapping continues through it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

VARIANTS = ("off", "fixed", "adaptive", "oracle")


@dataclass
class EpisodeStopper:
    variant: str = "off"
    fixed_t: int = 0
    t_patience: int = 10
    _scores: list = field(default_factory=list)
    _streak: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown stopping variant {self.variant!r}")
        if self.variant == "fixed" and self.fixed_t < 1:
            raise ConfigError("fixed stopping needs T >= 1")
        if self.t_patience < 1:
            raise ConfigError("t_patience must be >= 1")

    @property
    def uses_env_reward(self):
        return self.variant == "oracle"

    def reset(self):
        self._scores = []
        self._streak = 0

    def should_stop(self, score, step):
        """Called once per env step with that step's score and the episode
        step count (1-based). Returns True when the episode should end."""
        if self.variant == "off":
            return False
        if self.variant == "fixed":
            return step >= self.fixed_t
        # adaptive and oracle share the rule; only the score source differs
        if self._scores:
            med = _lower_median(self._scores)
            if score > med:
                self._streak += 1
            else:
                self._streak = 0
        self._scores.append(score)
        return self._streak >= self.t_patience


def _lower_median(values):
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def parse_aes(text):
    """Parse an --aes flag value into an EpisodeStopper factory kwargs dict.

    Accepted: off | fixed:T | adaptive | oracle.
    """
    if text == "off":
        return {"variant": "off"}
    if text == "adaptive":
        return {"variant": "adaptive"}
    if text == "oracle":
        return {"variant": "oracle"}
    if text.startswith("fixed:"):
        try:
            t = int(text.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad fixed stopping spec {text!r}") from None
        return {"variant": "fixed", "fixed_t": t}
    raise ConfigError(f"unknown --aes value {text!r}")
