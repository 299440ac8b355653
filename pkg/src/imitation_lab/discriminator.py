"""State-only discriminators and their training objectives.

A discriminator is a sigmoid-headed MLP scoring how expert-like a single
observation looks. The plain adversarial objective is the finite-sample sum

    gail_term(E, A) = sum_i log D(e_i) + sum_i log(1 - D(a_i))

maximized in D. The constrained variant subtracts the same term evaluated on a
pair of constraining observation pools whenever the discriminator can tell
those pools apart at or above chance:

    trail_loss = gail_term(E, A) - gate * gail_term(CE, CA)
    gate       = 1 if accuracy(CE, CA) >= 1/2 else 0

The gate is evaluated, never differentiated: it is a 0/1 constant recomputed
on a fresh constraining mini-batch at every update. When the gate is 0 the
value and gradients are bit-identical to the plain objective (same code path).

Scores are clipped to [EPS, 1-EPS] inside every log, which also caps the
imitation reward -log(1 - D) at -log(EPS). Gradients treat clipped scores as
constants, exactly matching the clipped forward value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .errors import NumericalError

EPS = 1e-6
REWARD_CAP = -np.log(EPS)


@dataclass
class Discriminator:
    net: nn.Network


def make_discriminator(obs_dim, hidden=(32, 32), seed=0):
    sizes = (obs_dim, *hidden, 1)
    return Discriminator(nn.init_network(sizes, head="sigmoid", seed=seed))


def scores(disc, obs_batch):
    """D(s) in (0, 1) for a batch (or single) observation."""
    out = nn.forward(disc.net, obs_batch)
    return out[..., 0] if out.ndim > 0 else out


def _check_pair(expert_obs, agent_obs):
    expert_obs = np.atleast_2d(np.asarray(expert_obs, dtype=np.float64))
    agent_obs = np.atleast_2d(np.asarray(agent_obs, dtype=np.float64))
    if len(expert_obs) != len(agent_obs):
        raise ValueError(
            f"expert/agent batches must match in size, got {len(expert_obs)} vs {len(agent_obs)}")
    if len(expert_obs) == 0:
        raise ValueError("batches must be non-empty")
    return expert_obs, agent_obs


def gail_term(disc, expert_obs, agent_obs):
    """Finite-sample adversarial objective (a sum over the batch, not a mean)."""
    expert_obs, agent_obs = _check_pair(expert_obs, agent_obs)
    d_e = np.clip(scores(disc, expert_obs), EPS, 1.0 - EPS)
    d_a = np.clip(scores(disc, agent_obs), EPS, 1.0 - EPS)
    value = float(np.sum(np.log(d_e)) + np.sum(np.log(1.0 - d_a)))
    if not np.isfinite(value):
        bad = int(np.flatnonzero(~np.isfinite(np.log(d_e)))[0]) if not np.all(
            np.isfinite(np.log(d_e))) else int(np.flatnonzero(~np.isfinite(np.log(1.0 - d_a)))[0])
        raise NumericalError(f"non-finite adversarial objective at batch index {bad}")
    return value


def accuracy(disc, expert_obs, agent_obs):
    """Balanced classification accuracy with threshold 1/2.

    A score of exactly 1/2 counts as an expert prediction.
    """
    expert_obs, agent_obs = _check_pair(expert_obs, agent_obs)
    d_e = scores(disc, expert_obs)
    d_a = scores(disc, agent_obs)
    return 0.5 * float(np.mean(d_e >= 0.5)) + 0.5 * float(np.mean(d_a < 0.5))


@dataclass
class DiscBatch:
    expert_obs: np.ndarray
    agent_obs: np.ndarray
    constraint_expert: np.ndarray
    constraint_agent: np.ndarray


def trail_loss(disc, batch):
    """Constrained objective value. Bit-identical to gail_term on the main
    batch whenever the constraining-set accuracy is below 1/2."""
    main = gail_term(disc, batch.expert_obs, batch.agent_obs)
    acc = accuracy(disc, batch.constraint_expert, batch.constraint_agent)
    if acc >= 0.5:
        return main - gail_term(disc, batch.constraint_expert, batch.constraint_agent)
    return main


def _ascent_dy(d_clipped, d_raw, sign_expert):
    """d(objective)/dD for one side of the objective; zero where clipped."""
    active = (d_raw > EPS) & (d_raw < 1.0 - EPS)
    if sign_expert:
        g = 1.0 / d_clipped
    else:
        g = -1.0 / (1.0 - d_clipped)
    return np.where(active, g, 0.0)


def gail_gradients(disc, expert_obs, agent_obs):
    """(value, ascent gradients of gail_term w.r.t. discriminator params)."""
    expert_obs, agent_obs = _check_pair(expert_obs, agent_obs)
    stacked = np.concatenate([expert_obs, agent_obs], axis=0)
    y, cache = nn.forward_cache(disc.net, stacked)
    d = y[:, 0]
    d_clip = np.clip(d, EPS, 1.0 - EPS)
    n_e = len(expert_obs)
    value = float(np.sum(np.log(d_clip[:n_e])) + np.sum(np.log(1.0 - d_clip[n_e:])))
    if not np.isfinite(value):
        raise NumericalError("non-finite adversarial objective")
    dy = np.empty_like(d)
    dy[:n_e] = _ascent_dy(d_clip[:n_e], d[:n_e], sign_expert=True)
    dy[n_e:] = _ascent_dy(d_clip[n_e:], d[n_e:], sign_expert=False)
    grads, _ = nn.backward(disc.net, cache, dy[:, None])
    return value, grads


def trail_gradients(disc, batch):
    """(value, ascent gradients, info) for the constrained objective.

    info carries the gate and the constraining accuracy used for it.
    """
    acc = accuracy(disc, batch.constraint_expert, batch.constraint_agent)
    gate = acc >= 0.5
    value, grads = gail_gradients(disc, batch.expert_obs, batch.agent_obs)
    if gate:
        c_value, c_grads = gail_gradients(disc, batch.constraint_expert, batch.constraint_agent)
        value = value - c_value
        grads = grads.added(c_grads.scaled(-1.0))
    return value, grads, {"constraint_accuracy": acc, "gate": bool(gate)}


def reward(disc, obs):
    """Imitation reward -log(1 - D(s)), capped at -log(EPS) by clipping."""
    d = np.clip(scores(disc, obs), EPS, 1.0 - EPS)
    return float(-np.log(1.0 - d)) if np.ndim(d) == 0 else -np.log(1.0 - d)


def oracle_reward(source):
    """Ground-truth-membership reward: 1 for expert frames, 0 for agent frames."""
    if source == "expert":
        return 1.0
    if source == "agent":
        return 0.0
    raise ValueError(f"unknown source tag {source!r}")


def augment_batch(obs_batch, obs_spec, rng, noise_sigma=0.01, group_drop_prob=0.1):
    """Per-entry Gaussian noise plus independent feature-group dropping.

    Each nonempty group is zeroed independently with group_drop_prob; a draw
    that would drop every group is resampled so at least one group survives.
    """
    x = np.array(obs_batch, dtype=np.float64, copy=True)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if noise_sigma > 0:
        x = x + rng.normal(0.0, noise_sigma, size=x.shape)
    if group_drop_prob > 0:
        names = obs_spec.nonempty_groups()
        for i in range(x.shape[0]):
            while True:
                drop = rng.random(len(names)) < group_drop_prob
                if not drop.all():
                    break
            for name, d in zip(names, drop):
                if d:
                    x[i, obs_spec.group_slice(name)] = 0.0
    return x[0] if single else x


def augment(obs, obs_spec, rng, noise_sigma=0.01, group_drop_prob=0.1):
    return augment_batch(obs, obs_spec, rng, noise_sigma, group_drop_prob)
