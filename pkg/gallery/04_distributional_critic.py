"""The categorical value distribution: projection and n-step targets.

The critic predicts a histogram over a fixed support of return atoms.
Bellman targets shift that support by rewards and discounting, which moves
mass off the atom grid; the projection splits each displaced atom's mass
linearly between its two grid neighbors (clamping at the edges). n-step
targets chain rewards before bootstrapping. Tiny hand examples throughout.
"""
from dataclasses import replace

import numpy as np

from imitation_lab import nn
from imitation_lab.agent import (critic_loss_and_grads, make_agent, make_support,
                                 n_step_target, project, softmax)
from imitation_lab.env import Transition

support = make_support(0.0, 4.0, 5)
print(f"support atoms {support.atoms}\n")

# One unit of mass at 1.7 lands between atoms 1 and 2: 30/70 split.
probs = np.array([[0.0, 1.0, 0.0, 0.0, 0.0]])
shifted = np.array([[0.0, 1.7, 0.0, 0.0, 0.0]])
print(f"mass at 1.7 projects to {project(support, shifted, probs)[0]}")

# Mass pushed past the edge clamps to the edge atom.
shifted = np.array([[0.0, 9.9, 0.0, 0.0, 0.0]])
print(f"mass at 9.9 projects to {project(support, shifted, probs)[0]}")

# Exact atom hits keep their full mass (no epsilon leakage).
shifted = np.array([[0.0, 3.0, 0.0, 0.0, 0.0]])
print(f"mass at 3.0 projects to {project(support, shifted, probs)[0]}\n")

# The projection preserves the mean whenever nothing clamps.
rng = np.random.default_rng(0)
p = rng.dirichlet(np.ones(5))
z = rng.uniform(0.0, 4.0, size=5)
proj = project(support, z[None], p[None])[0]
print(f"mean before {p @ z:.6f}, after {proj @ support.atoms:.6f}\n")

# n-step targets on a hand-made 3-transition chain, gamma 0.5: the target
# for the first state chains r0 + 0.5 r1 + 0.25 r2 and bootstraps from the
# critic at the third next state unless the chain hit a terminal.
def t(r, done, step):
    o = np.full(3, float(step))
    return Transition(obs=o, action=np.zeros(3), reward=r, next_obs=o + 1,
                      done=done, step=step, episode_id=7, source="agent",
                      env_reward_raw=r)

nets = make_agent(3, 3, policy_hidden=(8,), critic_hidden=(8,), n_atoms=5, seed=0)
chain = [t(1.0, False, 0), t(1.0, False, 1), t(1.0, True, 2)]
target_dist = n_step_target(chain, n=3, gamma=0.5,
                            target_policy=nets.target_policy,
                            target_critic=nets.target_critic,
                            support=support)
expected = 1.0 + 0.5 + 0.25  # terminal chain: no bootstrap term
print(f"3-step return on the terminal chain: {target_dist @ support.atoms:.4f} "
      f"(hand value {expected})")

# One cross-entropy step moves the critic's histogram toward the target.
obs = np.zeros((1, 3))
act = np.zeros((1, 3))
target = np.array([[0.0, 0.0, 0.0, 0.0, 1.0]])
before = softmax(nn.forward(nets.critic, np.concatenate([obs, act], axis=1)))
adam = nn.init_adam(nets.critic)
critic = nets.critic
for _ in range(100):
    _, grads = critic_loss_and_grads(replace(nets, critic=critic), obs, act, target)
    critic, adam = nn.adam_step(critic, grads, adam, lr=1e-2)
after = softmax(nn.forward(critic, np.concatenate([obs, act], axis=1)))
print(f"\ncritic histogram before {np.round(before[0], 3)}")
print(f"critic histogram after  {np.round(after[0], 3)} (target puts all mass on atom 4)")
