"""Demonstrations, constraining sets, and the spuriousness certificate.

The distracted task carries a memorization channel: each demo's distractor
layout is episode-static and the demo set is finite, so "which layout is
this" separates expert frames from fresh agent frames perfectly. Early
frames (the presentation delay) carry that channel and nothing else, which
is what makes them usable as constraining sets. A k-NN probe certifies
both halves of the claim.
"""
import numpy as np

from imitation_lab.config import ExperimentConfig, agent_env_config, expert_env_config
from imitation_lab.constraining import make_early_sets, probe_accuracy
from imitation_lab.env import PointLiftEnv, collect_demos, rollout_random

cfg = ExperimentConfig(task="lift_distracted", method="trail", seed=0)

print("collecting 100 scripted demos...")
demos = collect_demos(expert_env_config(cfg), n=100, noise_scale=0.05,
                      rng=np.random.default_rng(cfg.demo_seed()))
returns = [ep.env_return for ep in demos]
print(f"demo returns: mean {np.mean(returns):.1f}, min {np.min(returns):.1f}\n")

# Expert side of the constraining sets: the first 10 frames of each demo.
# Those are presentation-delay frames, so they differ across episodes only
# in distractor layout and appearance, never in behavior.
sets = make_early_sets(demos, k=10, agent_capacity=5000)
print(f"expert constraining pool: {sets.expert_pool.shape}")

# Agent side: early frames of purposeless random-policy episodes.
agent_eps = rollout_random(agent_env_config(cfg), n_episodes=100, steps=10,
                           rng=np.random.default_rng(99))
agent_obs = np.concatenate([np.stack([t.obs for t in ep]) for ep in agent_eps])
print(f"agent constraining pool:  {agent_obs.shape}\n")

spec = PointLiftEnv(agent_env_config(cfg)).obs_spec
task_cols = np.arange(spec.group_slice("proprio").start,
                      spec.group_slice("task").stop)

full = probe_accuracy(sets.expert_pool, agent_obs)
restricted = probe_accuracy(sets.expert_pool, agent_obs, columns=task_cols)

print(f"probe accuracy, all columns:              {full:.4f}")
print(f"probe accuracy, proprio+task columns only: {restricted:.4f}")
print()
print("Reading: with the layout columns the probe tells the pools apart")
print("essentially perfectly (the memorization channel); restricted to the")
print("task-relevant columns it is at chance, because early frames contain")
print("no behavior. A discriminator that separates these pools can only be")
print("using the spurious channel, which is exactly what the constrained")
print("objective penalizes.")
