"""Uniform replay: a locked ring buffer for agent transitions plus an
immutable demonstration buffer, with mixed sampling at a fixed demo fraction.

Multiple actor threads may append concurrently; a single learner samples.
In single-threaded runs the same code path is used (the lock is cheap) and
sampling is driven by a seeded generator, so runs are bit-deterministic.
"""
from __future__ import annotations

import math
import threading

import numpy as np

from .errors import SamplingError


class ReplayBuffer:
    """Fixed-capacity ring. Oldest entries are overwritten first."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self._items = [None] * self.capacity
        self._next = 0
        self._size = 0
        self._lock = threading.Lock()

    def __len__(self):
        return self._size

    def append(self, transition):
        with self._lock:
            self._append_locked(transition)

    def extend(self, transitions):
        # One lock hold per episode keeps an episode's transitions adjacent in
        # the ring, which is what makes n-step sequence sampling possible.
        with self._lock:
            for t in transitions:
                self._append_locked(t)

    def _append_locked(self, transition):
        self._items[self._next] = transition
        self._next = (self._next + 1) % self.capacity
        if self._size < self.capacity:
            self._size += 1

    def sample(self, batch_size, rng):
        """Uniform with replacement over current contents."""
        with self._lock:
            size = self._size
            if size == 0:
                raise SamplingError("cannot sample from an empty replay buffer")
            idx = rng.integers(0, size, size=batch_size)
            return [self._items[i] for i in idx]

    def sample_sequences(self, batch_size, length, rng, max_tries=200):
        """Sample runs of `length` consecutive same-episode transitions.

        Relies on extend() writing episodes contiguously; candidate windows
        that straddle an episode boundary or an eviction seam are rejected
        and redrawn.
        """
        if length < 1:
            raise ValueError("length must be >= 1")
        out = []
        with self._lock:
            size = self._size
            if size < length:
                raise SamplingError("buffer smaller than requested sequence length")
            for _ in range(batch_size):
                for _try in range(max_tries):
                    start = int(rng.integers(0, size))
                    seq = [self._items[(start + j) % size] for j in range(length)]
                    ok = all(
                        b.episode_id == a.episode_id and b.step == a.step + 1
                        for a, b in zip(seq, seq[1:])
                    )
                    if ok:
                        out.append(seq)
                        break
                else:
                    raise SamplingError(
                        f"no consecutive run of length {length} found in {max_tries} tries")
        return out


class DemoBuffer:
    """Immutable store of expert transitions, with a cached observation matrix
    for discriminator batches."""

    def __init__(self, episodes):
        transitions = []
        for ep in episodes:
            transitions.extend(ep.transitions)
        if not transitions:
            raise ValueError("DemoBuffer needs at least one transition")
        self._episodes = tuple(tuple(ep.transitions) for ep in episodes)
        self._transitions = tuple(transitions)
        self.observations = np.stack([t.obs for t in transitions])
        self.episode_ids = tuple(sorted({t.episode_id for t in transitions}))

    def __len__(self):
        return len(self._transitions)

    def sample(self, batch_size, rng):
        idx = rng.integers(0, len(self._transitions), size=batch_size)
        return [self._transitions[i] for i in idx]

    def sample_observations(self, batch_size, rng):
        idx = rng.integers(0, self.observations.shape[0], size=batch_size)
        return self.observations[idx]

    def sample_sequences(self, batch_size, length, rng):
        """Runs of `length` consecutive transitions from within one episode."""
        eligible = [ep for ep in self._episodes if len(ep) >= length]
        if not eligible:
            raise SamplingError(f"no demo episode has >= {length} transitions")
        out = []
        for _ in range(batch_size):
            ep = eligible[int(rng.integers(0, len(eligible)))]
            start = int(rng.integers(0, len(ep) - length + 1))
            out.append(list(ep[start:start + length]))
        return out


def sample_mixed(agent_buffer, demo_buffer, batch_size, demo_fraction, rng):
    """One training batch: ceil(demo_fraction * batch_size) demo transitions,
    the rest agent transitions, both uniform with replacement."""
    if not (0.0 <= demo_fraction <= 1.0):
        raise ValueError("demo_fraction must be in [0, 1]")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    n_demo = math.ceil(demo_fraction * batch_size)
    n_agent = batch_size - n_demo
    batch = []
    if n_demo:
        if demo_buffer is None or len(demo_buffer) == 0:
            raise SamplingError("demo_fraction > 0 but no demo transitions available")
        batch.extend(demo_buffer.sample(n_demo, rng))
    if n_agent:
        batch.extend(agent_buffer.sample(n_agent, rng))
    return batch
