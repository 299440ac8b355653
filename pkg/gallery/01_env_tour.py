"""Tour of the point-lift environment.

Walks one episode by hand: the presentation delay, the observation layout,
grasping, lifting, and the scripted expert that produces demonstrations.
Run it; it prints what it sees.
"""
import numpy as np

from imitation_lab.env import EnvConfig, PointLiftEnv, run_episode, scripted_expert

rng = np.random.default_rng(0)

config = EnvConfig(n_distractors=4)
env = PointLiftEnv(config)
spec = env.obs_spec

print("observation groups:")
for name, a, b in spec.groups:
    print(f"  {name:>10}  columns {a}..{b - 1}")
print(f"  total size {spec.size}\n")

state, layout = env.reset(rng)
print(f"target at {np.round(layout.target, 2)}, "
      f"{len(layout.distractors)} distractors\n")

# During the presentation delay the scene is visible but the task cue reads
# zero and actions are no-ops: the agent can look, not act.
obs = env.observe(state)
print(f"step {state.step}: task cue {obs[spec.group_slice('task')]} (hidden)")
for _ in range(config.freeze_steps):
    state, obs, reward, done = env.step(state, np.array([1.0, 1.0, 1.0]))
print(f"step {state.step}: task cue {np.round(obs[spec.group_slice('task')], 3)}"
      " (revealed; the big action above did nothing)\n")

# Drive toward the target by hand: the cue's first two entries are the
# target-relative offset, so walking along them closes the distance.
for t in range(80):
    cue = obs[spec.group_slice("task")]
    action = np.concatenate([np.clip(20 * cue[:2], -1, 1), [1.0]])
    state, obs, reward, done = env.step(state, action)
    if state.grasped:
        break
print(f"grasped at step {state.step}, gripper {np.round(state.gripper, 2)}")

total = 0.0
while not done:
    state, obs, reward, done = env.step(state, np.array([0.0, 0.0, 1.0]))
    total += reward
print(f"held to the end: height {state.height:.1f}, return {total:.0f} "
      f"(reward is 1 per step above {config.lift_threshold})\n")

# The scripted expert does the same thing better, plus action noise.
returns = []
for i in range(5):
    transitions, _layout = run_episode(
        env, lambda state, obs: scripted_expert(config, state, rng, 0.05),
        rng, source="expert")
    returns.append(sum(t.env_reward_raw for t in transitions))
print(f"scripted expert over 5 episodes: returns {np.round(returns, 0)}")
