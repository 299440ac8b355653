"""Constraining observation pools for the constrained discriminator.

Two strategies:

  early   expert pool = the first k observations of every demonstration;
          agent pool = the first k observations of live agent episodes,
          ingested continuously into a fixed-capacity ring because the agent's
          distribution drifts as training proceeds.

  random  both pools come from uniform-random-policy rollouts executed once up
          front, one batch in the expert-side env configuration and one in the
          agent-side configuration. No live ingestion: the point of this
          strategy is that it needs nothing beyond a random policy in both
          settings.

Either way, the two pools are supposed to differ only in spurious feature
groups. `probe_accuracy` checks that directly with an off-the-shelf classifier
(deliberately not built on this package's own network code).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import SamplingError, UsageError
from .env import PointLiftEnv, rollout_random

AGENT_POOL_CAPACITY = 5000


class ObservationRing:
    """Thread-safe fixed-capacity ring of observation vectors."""

    def __init__(self, capacity=AGENT_POOL_CAPACITY):
        self.capacity = int(capacity)
        self._items = [None] * self.capacity
        self._next = 0
        self._size = 0
        self._lock = threading.Lock()

    def __len__(self):
        return self._size

    def extend(self, observations):
        with self._lock:
            for obs in observations:
                self._items[self._next] = np.asarray(obs, dtype=np.float64)
                self._next = (self._next + 1) % self.capacity
                if self._size < self.capacity:
                    self._size += 1

    def sample(self, n, rng):
        with self._lock:
            if self._size == 0:
                raise SamplingError("agent constraining pool is empty")
            idx = rng.integers(0, self._size, size=n)
            return np.stack([self._items[i] for i in idx])

    def snapshot(self):
        with self._lock:
            return np.stack([self._items[i] for i in range(self._size)]) \
                if self._size else np.empty((0, 0))


@dataclass
class ConstrainingSets:
    strategy: str               # "early" | "random"
    k: int                      # early-frame count (early strategy)
    expert_pool: np.ndarray     # (n, obs_dim), frozen
    agent_pool: ObservationRing

    def sample_pair(self, n, rng):
        if len(self.expert_pool) == 0:
            raise SamplingError("expert constraining pool is empty")
        idx = rng.integers(0, len(self.expert_pool), size=n)
        return self.expert_pool[idx], self.agent_pool.sample(n, rng)


def build_early_frames(demo_episodes, k):
    """Expert pool from the first k frames of each demo episode.

    Episodes shorter than k contribute what they have (with a warning via the
    returned count mismatch being visible to callers; demos here always run
    t_max steps so in practice the pool has len(demos) * k rows).
    """
    if k < 1:
        raise UsageError("k must be >= 1")
    rows = []
    for ep in demo_episodes:
        for t in ep.transitions[:k]:
            rows.append(t.obs)
    if not rows:
        raise UsageError("no demo frames to build an expert pool from")
    return np.stack(rows)


def make_early_sets(demo_episodes, k, agent_capacity=AGENT_POOL_CAPACITY):
    return ConstrainingSets(
        strategy="early",
        k=k,
        expert_pool=build_early_frames(demo_episodes, k),
        agent_pool=ObservationRing(agent_capacity),
    )


def ingest_agent_early_frames(sets, episode_transitions):
    """Feed the first k observations of a finished agent episode into the
    agent pool. Only meaningful for the early strategy."""
    if sets.strategy != "early":
        return
    sets.agent_pool.extend([t.obs for t in episode_transitions[:sets.k]])


def make_random_policy_sets(expert_config, agent_config, n_episodes, rng,
                            steps=50, agent_capacity=AGENT_POOL_CAPACITY):
    """Both pools from random-policy rollouts, one per env configuration."""
    if n_episodes < 1:
        raise UsageError("n_episodes must be >= 1")
    expert_eps = rollout_random(expert_config, n_episodes, rng, steps=steps,
                                episode_id_start=900_000_000)
    agent_eps = rollout_random(agent_config, n_episodes, rng, steps=steps,
                               episode_id_start=910_000_000)
    expert_pool = np.stack([t.obs for ep in expert_eps for t in ep])
    ring = ObservationRing(agent_capacity)
    for ep in agent_eps:
        ring.extend([t.obs for t in ep])
    return ConstrainingSets(strategy="random", k=steps,
                            expert_pool=expert_pool, agent_pool=ring)


def probe_accuracy(expert_obs, agent_obs, columns=None, seed=0, test_fraction=0.25,
                   n_neighbors=5):
    """Held-out accuracy of a 5-NN probe separating the two pools.

    Frame-level split: layouts are episode-static, so a memorizable channel
    shows up as near-perfect held-out accuracy, which is exactly what a
    discriminator scoring the same demos over and over gets to exploit.
    `columns` restricts the probe to a feature-group slice.
    """
    from sklearn.neighbors import KNeighborsClassifier

    x = np.concatenate([np.asarray(expert_obs), np.asarray(agent_obs)])
    y = np.concatenate([np.ones(len(expert_obs)), np.zeros(len(agent_obs))])
    if columns is not None:
        x = x[:, columns]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(x))
    x, y = x[order], y[order]
    n_test = max(1, int(test_fraction * len(x)))
    x_train, x_test = x[n_test:], x[:n_test]
    y_train, y_test = y[n_test:], y[:n_test]
    mu = x_train.mean(axis=0)
    sd = x_train.std(axis=0)
    sd[sd == 0] = 1.0
    clf = KNeighborsClassifier(n_neighbors=n_neighbors)
    clf.fit((x_train - mu) / sd, y_train)
    return float(clf.score((x_test - mu) / sd, y_test))
