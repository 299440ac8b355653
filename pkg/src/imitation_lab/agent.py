"""Distributional actor-critic (desk-scale D4PG) plus behavior cloning.

The critic emits logits over a fixed support of value atoms; its loss is the
cross-entropy between the categorical projection of the N-step target
distribution and the online distribution. The actor is updated by
deterministic policy gradient, ascending Q(s, pi(s)) = sum_i p_i * z_i through
the critic's input gradient. Target copies of both networks are synchronized
by hard copy every target_update_period learner steps.

Atoms are evenly spaced with delta_z = (v_max - v_min) / (v_bins - 1), so the
top atom equals v_max.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import nn
from .errors import NumericalError, UsageError


@dataclass(frozen=True)
class Support:
    v_min: float
    v_max: float
    n_atoms: int
    atoms: np.ndarray

    @property
    def delta_z(self):
        return (self.v_max - self.v_min) / (self.n_atoms - 1)


def make_support(v_min, v_max, n_atoms):
    if not (v_max > v_min):
        raise ValueError("need v_max > v_min")
    if n_atoms < 2:
        raise ValueError("need at least 2 atoms")
    atoms = np.linspace(v_min, v_max, n_atoms)
    return Support(float(v_min), float(v_max), int(n_atoms), atoms)


def project(support, shifted_atoms, probs):
    """Categorical projection onto the support (vectorized, batched).

    Each shifted atom's mass is split linearly between the two neighboring
    support atoms; atoms outside [v_min, v_max] clamp to the edge.
    Accepts (n_atoms,) or (batch, n_atoms) inputs.
    """
    shifted = np.atleast_2d(np.asarray(shifted_atoms, dtype=np.float64))
    p = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    if shifted.shape != p.shape:
        raise ValueError(f"shape mismatch {shifted.shape} vs {p.shape}")
    b = np.clip((shifted - support.v_min) / support.delta_z, 0.0, support.n_atoms - 1.0)
    lo = np.floor(b).astype(int)
    hi = np.ceil(b).astype(int)
    out = np.zeros((shifted.shape[0], support.n_atoms))
    rows = np.arange(shifted.shape[0])[:, None].repeat(shifted.shape[1], axis=1)
    exact = lo == hi  # atom sits exactly on a support point: all mass to it
    np.add.at(out, (rows, lo), np.where(exact, p, p * (hi - b)))
    np.add.at(out, (rows, hi), np.where(exact, 0.0, p * (b - lo)))
    return out[0] if np.ndim(shifted_atoms) == 1 else out


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


@dataclass
class AgentNets:
    policy: nn.Network
    critic: nn.Network
    target_policy: nn.Network
    target_critic: nn.Network


def make_agent(obs_dim, act_dim, policy_hidden=(64, 64), critic_hidden=(128, 128),
               n_atoms=21, seed=0):
    policy = nn.init_network((obs_dim, *policy_hidden, act_dim), head="tanh", seed=seed)
    critic = nn.init_network((obs_dim + act_dim, *critic_hidden, n_atoms),
                             head="softmax_logits", seed=seed + 1)
    return AgentNets(policy, critic, policy, critic)


def target_sync(nets, step, period):
    """Hard copy online -> target every `period` learner steps."""
    if period < 1:
        raise ValueError("period must be >= 1")
    if step % period == 0:
        return replace(nets, target_policy=nets.policy, target_critic=nets.critic)
    return nets


def n_step_target(transitions, n, gamma, target_policy, target_critic, support):
    """Projected target distribution for the first transition of an N-chain.

    `transitions` is a list of N consecutive same-episode transitions (a batch
    is a list of such lists). Rewards accumulate with discount; if a terminal
    transition appears inside the chain, accumulation stops there and the
    bootstrap term is dropped. Otherwise the bootstrap distribution comes from
    the target critic at (s_N, target_policy(s_N)).
    """
    chains = transitions if isinstance(transitions[0], (list, tuple)) else [transitions]
    for chain in chains:
        if len(chain) != n:
            raise UsageError(f"expected chains of length {n}, got {len(chain)}")
        for a, b in zip(chain, chain[1:]):
            if b.episode_id != a.episode_id or b.step != a.step + 1:
                raise UsageError("chain transitions must be consecutive within one episode")

    batch = len(chains)
    cum = np.zeros(batch)
    factor = np.zeros(batch)
    boot_obs = np.zeros((batch, chains[0][-1].next_obs.shape[0]))
    for i, chain in enumerate(chains):
        g = 1.0
        terminated = False
        for t in chain:
            cum[i] += g * t.reward
            g *= gamma
            if t.done:
                terminated = True
                break
        factor[i] = 0.0 if terminated else g
        boot_obs[i] = chain[-1].next_obs

    boot_actions = nn.forward(target_policy, boot_obs)
    logits = nn.forward(target_critic, np.concatenate([boot_obs, boot_actions], axis=1))
    boot_probs = softmax(logits)
    shifted = cum[:, None] + factor[:, None] * support.atoms[None, :]
    # terminated rows: factor 0 collapses every atom to the return, so the
    # projection puts all mass at cum regardless of boot_probs
    projected = project(support, shifted, boot_probs)
    out = projected if isinstance(transitions[0], (list, tuple)) else projected[0]
    return out


def critic_loss_and_grads(nets, obs, actions, target_probs):
    """Mean cross-entropy between target distributions and the online critic.

    Returns (loss, Gradients for the critic).
    """
    x = np.concatenate([obs, actions], axis=1)
    logits, cache = nn.forward_cache(nets.critic, x)
    logp = log_softmax(logits)
    loss = float(-np.sum(target_probs * logp) / len(obs))
    if not np.isfinite(loss):
        bad = int(np.flatnonzero(~np.isfinite((target_probs * logp).sum(axis=1)))[0])
        raise NumericalError(f"non-finite critic loss at batch index {bad}")
    dlogits = (softmax(logits) - target_probs) / len(obs)
    grads, _ = nn.backward(nets.critic, cache, dlogits)
    return loss, grads


def policy_objective_and_grads(nets, obs, support):
    """Mean Q(s, pi(s)) and its ascent gradient w.r.t. policy parameters,
    differentiating through the critic's action input."""
    actions, pcache = nn.forward_cache(nets.policy, obs)
    x = np.concatenate([obs, actions], axis=1)
    logits, ccache = nn.forward_cache(nets.critic, x)
    p = softmax(logits)
    q = p @ support.atoms
    objective = float(np.mean(q))
    if not np.isfinite(objective):
        raise NumericalError("non-finite policy objective")
    # dJ/dlogits for J = mean_i sum_k p_ik z_k
    dlogits = p * (support.atoms[None, :] - q[:, None]) / len(obs)
    _, dx = nn.backward(nets.critic, ccache, dlogits)
    dactions = dx[:, obs.shape[1]:]
    grads, _ = nn.backward(nets.policy, pcache, dactions)
    return objective, grads


def bc_loss_and_grads(policy, obs, actions):
    """Mean squared error behavior-cloning loss and its descent gradients."""
    pred, cache = nn.forward_cache(policy, obs)
    err = pred - actions
    loss = float(np.mean(np.sum(err * err, axis=1)))
    if not np.isfinite(loss):
        raise NumericalError("non-finite behavior-cloning loss")
    dpred = 2.0 * err / len(obs)
    grads, _ = nn.backward(policy, cache, dpred)
    return loss, grads


def bc_train(demo_transitions, policy, epochs, lr, batch_size, rng,
             eval_hook=None, eval_every=None):
    """Fit the policy to demo (obs, action) pairs with minibatch Adam.

    eval_hook(epoch, policy), when given, runs every eval_every epochs and
    once more after the final epoch.
    """
    obs = np.stack([t.obs for t in demo_transitions])
    act = np.stack([t.action for t in demo_transitions])
    state = nn.init_adam(policy)
    n = len(obs)
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            _, grads = bc_loss_and_grads(policy, obs[idx], act[idx])
            policy, state = nn.adam_step(policy, grads, state, lr)
        if eval_hook and eval_every and (epoch % eval_every == 0 or epoch == epochs):
            eval_hook(epoch, policy)
    return policy
