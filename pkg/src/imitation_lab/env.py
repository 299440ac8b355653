"""Point-lift: a 2D point-mass gripper task with injectable spurious features.

The gripper moves in a square arena, grasps a target object when close enough
with the grasp toggle held, and the grasped object rises while held. Sparse
reward: +1 for every step the object's height is at or above the lift
threshold. Episodes run a fixed number of steps; there is no early env
termination, so the best return is t_max minus the solve time.

Observations are flat float64 vectors split into named groups:

    proprio     gripper x, y, vx, vy, grasp flag
    task        target position relative to the gripper (x, y), target height
    distractor  absolute positions of n_distractors inert objects
    appearance  a constant-per-episode channel: base value + appearance_offset

Only proprio and task ever influence the dynamics or the reward. Distractors
and appearance exist to give a discriminator something task-irrelevant to
latch onto: distractor layouts are drawn fresh every episode (except in
seeded-from-demos mode), and the appearance offset can differ between the
config demos were collected under and the config the agent trains in.

Target spawn points come from a small fixed grid shared by every episode
source. Anything per-episode-static that was finite-in-demos but fresh in
agent episodes would itself become a memorizable channel, which would poison
the task group; the grid keeps the task features clean so the distractor
layout (and appearance, when shifted) are the only spurious channels.

Every episode opens with a presentation delay of freeze_steps steps: the scene
(distractors, appearance) is laid out and visible, but the gripper is inert
and the task cue (the target-relative columns) reads zero until the delay
ends. Early frames therefore vary only in scene identity, never in anything
task-relevant, which is the property the early-frame constraining sets rely
on. The scripted expert idles through the delay and then runs a noisy
proportional controller to the target.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field, replace
from typing import ClassVar

import numpy as np

from .errors import ConfigError, DataFormatError

DEMO_FORMAT_VERSION = 1

# Shared target spawn grid (see module docstring for why it is fixed).
DEFAULT_TARGET_SPAWNS = (
    (-0.6, 0.2), (-0.2, 0.2), (0.2, 0.2), (0.6, 0.2),
    (-0.6, 0.5), (-0.2, 0.5), (0.2, 0.5), (0.6, 0.5),
)

INIT_MODES = ("uniform", "seeded")

# Distractors spawn at least this far from the gripper start and target spawn.
_CLEARANCE = 0.25


@dataclass(frozen=True)
class Layout:
    """Initial object placement of one episode."""

    target: tuple
    distractors: tuple  # tuple of (x, y)


@dataclass(frozen=True)
class EnvConfig:
    arena_half_width: float = 1.0
    n_distractors: int = 0
    appearance_offset: tuple = (0.0, 0.0)
    init_mode: str = "uniform"
    t_max: int = 200
    max_speed: float = 0.1
    grasp_radius: float = 0.1
    lift_threshold: float = 0.5
    lift_rate: float = 0.1
    lift_max: float = 1.0
    gripper_start: tuple = (0.0, -0.7)
    appearance_base: tuple = (1.0, -1.0)
    freeze_steps: int = 10
    target_spawns: tuple = DEFAULT_TARGET_SPAWNS
    demo_layouts: tuple = ()  # required for init_mode="seeded"

    def __post_init__(self):
        if self.init_mode not in INIT_MODES:
            raise ConfigError(f"init_mode must be one of {INIT_MODES}")
        if self.t_max < 1 or self.n_distractors < 0:
            raise ConfigError("t_max must be >= 1 and n_distractors >= 0")
        if not (0 < self.max_speed <= self.arena_half_width):
            raise ConfigError("max_speed must be in (0, arena_half_width]")
        if not (0 <= self.freeze_steps < self.t_max):
            raise ConfigError("need 0 <= freeze_steps < t_max")
        if len(self.appearance_offset) != len(self.appearance_base):
            raise ConfigError("appearance_offset length must match appearance_base")


@dataclass
class EnvState:
    gripper: np.ndarray
    gripper_vel: np.ndarray
    grasped: bool
    target: np.ndarray
    height: float
    distractors: np.ndarray  # (n_distractors, 2)
    appearance: np.ndarray
    step: int
    episode_id: int


class ObservationSpec:
    """Named, ordered feature groups of the flat observation vector."""

    def __init__(self, config):
        n_app = len(config.appearance_base)
        widths = [
            ("proprio", 5),
            ("task", 3),
            ("distractor", 2 * config.n_distractors),
            ("appearance", n_app),
        ]
        self.groups = []
        start = 0
        for name, w in widths:
            self.groups.append((name, start, start + w))
            start += w
        self.size = start
        self._slices = {name: slice(a, b) for name, a, b in self.groups}

    def group_slice(self, name):
        return self._slices[name]

    def group_names(self):
        return [name for name, _, _ in self.groups]

    def nonempty_groups(self):
        return [name for name, a, b in self.groups if b > a]


@dataclass
class Transition:
    """One environment step. `reward` is the training reward actually stored in
    replay (possibly relabeled by a reward provider); the env's own sparse
    reward sits in `env_reward_raw` and must be read through `env_reward()`,
    which counts accesses so tests can assert reward-provider isolation."""

    obs: np.ndarray
    action: np.ndarray
    reward: float
    next_obs: np.ndarray
    done: bool
    step: int
    episode_id: int
    source: str  # "expert" | "agent"
    env_reward_raw: float = 0.0

    env_reward_reads: ClassVar[int] = 0

    def env_reward(self):
        Transition.env_reward_reads += 1
        return self.env_reward_raw


@dataclass
class DemoEpisode:
    episode_id: int
    layout: Layout
    transitions: list

    @property
    def env_return(self):
        return sum(t.env_reward_raw for t in self.transitions)


class PointLiftEnv:
    def __init__(self, config, episode_id_start=0):
        self.config = config
        self.obs_spec = ObservationSpec(config)
        self._next_episode_id = episode_id_start
        if config.init_mode == "seeded" and not config.demo_layouts:
            raise ConfigError("seeded init_mode requires demo_layouts")

    def _sample_layout(self, rng):
        cfg = self.config
        if cfg.init_mode == "seeded":
            pick = cfg.demo_layouts[rng.integers(len(cfg.demo_layouts))]
            return Layout(tuple(pick.target), tuple(tuple(d) for d in pick.distractors))
        target = cfg.target_spawns[rng.integers(len(cfg.target_spawns))]
        hw = cfg.arena_half_width
        start = np.asarray(cfg.gripper_start)
        tpos = np.asarray(target)
        distractors = []
        for _ in range(cfg.n_distractors):
            for _attempt in range(1000):
                p = rng.uniform(-hw, hw, size=2)
                if (np.linalg.norm(p - start) >= _CLEARANCE
                        and np.linalg.norm(p - tpos) >= _CLEARANCE):
                    distractors.append(tuple(p))
                    break
            else:
                raise RuntimeError("could not place distractor clear of start/target")
        return Layout(tuple(target), tuple(distractors))

    def reset(self, rng):
        cfg = self.config
        layout = self._sample_layout(rng)
        ep = self._next_episode_id
        self._next_episode_id += 1
        state = EnvState(
            gripper=np.asarray(cfg.gripper_start, dtype=np.float64).copy(),
            gripper_vel=np.zeros(2),
            grasped=False,
            target=np.asarray(layout.target, dtype=np.float64).copy(),
            height=0.0,
            distractors=np.asarray(layout.distractors, dtype=np.float64).reshape(-1, 2),
            appearance=np.asarray(cfg.appearance_base, dtype=np.float64)
            + np.asarray(cfg.appearance_offset, dtype=np.float64),
            step=0,
            episode_id=ep,
        )
        return state, layout

    def observe(self, state):
        # task cue hidden during the presentation delay
        if state.step < self.config.freeze_steps:
            cue = np.zeros(3)
        else:
            cue = np.concatenate([state.target - state.gripper, [state.height]])
        return np.concatenate([
            state.gripper,
            state.gripper_vel,
            [1.0 if state.grasped else 0.0],
            cue,
            state.distractors.ravel(),
            state.appearance,
        ])

    def step(self, state, action):
        cfg = self.config
        a = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
        if a.shape != (3,):
            raise ValueError(f"action must have shape (3,), got {a.shape}")
        if state.step < cfg.freeze_steps:
            # presentation delay: the gripper is inert and actions are no-ops
            new = replace(state, gripper_vel=np.zeros(2), step=state.step + 1)
            return new, self.observe(new), 0.0, new.step >= cfg.t_max
        hw = cfg.arena_half_width
        g_new = np.clip(state.gripper + a[:2] * cfg.max_speed, -hw, hw)
        vel = g_new - state.gripper
        toggle = a[2] > 0
        within = np.linalg.norm(state.target - g_new) <= cfg.grasp_radius
        grasped = toggle and (state.grasped or within)
        if grasped:
            target = g_new.copy()
            height = min(state.height + cfg.lift_rate, cfg.lift_max)
        else:
            target = state.target
            height = 0.0  # released objects drop
        step = state.step + 1
        new = EnvState(
            gripper=g_new,
            gripper_vel=vel,
            grasped=grasped,
            target=target,
            height=height,
            distractors=state.distractors,
            appearance=state.appearance,
            step=step,
            episode_id=state.episode_id,
        )
        reward = 1.0 if height >= cfg.lift_threshold else 0.0
        done = step >= cfg.t_max
        return new, self.observe(new), reward, done


def scripted_expert(config, state, rng, noise_scale=0.05):
    """Noisy proportional-controller expert; idles through the presentation
    delay (its actions are no-ops then anyway)."""
    if state.step < config.freeze_steps:
        intent = np.zeros(3)
    else:
        to_target = state.target - state.gripper
        dist = np.linalg.norm(to_target)
        if state.grasped:
            intent = np.array([0.0, 0.0, 1.0])
        else:
            move = to_target / max(dist, config.max_speed)
            grab = 1.0 if dist <= config.grasp_radius + config.max_speed else -1.0
            intent = np.array([move[0], move[1], grab])
    if noise_scale > 0:
        intent = intent + rng.normal(0.0, noise_scale, size=3)
    return np.clip(intent, -1.0, 1.0)


def run_episode(env, policy_fn, rng, source):
    """Roll one full episode; policy_fn(state, obs) -> action. Returns
    (transitions, layout). Rewards are the env's sparse rewards."""
    state, layout = env.reset(rng)
    obs = env.observe(state)
    transitions = []
    done = False
    while not done:
        action = policy_fn(state, obs)
        prev_step = state.step
        state, next_obs, reward, done = env.step(state, action)
        transitions.append(Transition(
            obs=obs, action=action, reward=reward, next_obs=next_obs,
            done=done, step=prev_step, episode_id=state.episode_id,
            source=source, env_reward_raw=reward,
        ))
        obs = next_obs
    return transitions, layout


def collect_demos(config, n=100, noise_scale=0.05, rng=None, episode_id_start=0,
                  solve_floor=150.0, solve_fraction=0.95):
    """Collect scripted-expert episodes. Warns (does not fail) if fewer than
    solve_fraction of them reach a return of solve_floor."""
    if rng is None:
        rng = np.random.default_rng(0)
    env = PointLiftEnv(config, episode_id_start=episode_id_start)
    episodes = []
    for _ in range(n):
        def expert(state, obs):
            return scripted_expert(config, state, rng, noise_scale)
        transitions, layout = run_episode(env, expert, rng, source="expert")
        episodes.append(DemoEpisode(transitions[0].episode_id, layout, transitions))
    returns = np.array([ep.env_return for ep in episodes])
    if np.mean(returns >= solve_floor) < solve_fraction:
        warnings.warn(
            f"expert solve-rate floor violated: only {np.mean(returns >= solve_floor):.0%} "
            f"of {n} episodes reached return >= {solve_floor}", stacklevel=2)
    return episodes


def rollout_random(config, n_episodes, rng, steps=None, episode_id_start=0):
    """Uniform-random-policy episodes (purposeless behavior), `steps` each."""
    env = PointLiftEnv(config, episode_id_start=episode_id_start)
    steps = config.t_max if steps is None else min(steps, config.t_max)
    episodes = []
    for _ in range(n_episodes):
        state, _layout = env.reset(rng)
        obs = env.observe(state)
        transitions = []
        for _t in range(steps):
            action = rng.uniform(-1.0, 1.0, size=3)
            prev_step = state.step
            state, next_obs, reward, done = env.step(state, action)
            transitions.append(Transition(
                obs=obs, action=action, reward=reward, next_obs=next_obs,
                done=done, step=prev_step, episode_id=state.episode_id,
                source="agent", env_reward_raw=reward,
            ))
            obs = next_obs
        episodes.append(transitions)
    return episodes


def inject_appearance_shift(config, offset):
    offset = tuple(float(x) for x in offset)
    if len(offset) != len(config.appearance_base):
        raise ConfigError("offset length must match appearance_base")
    return replace(config, appearance_offset=offset)


# ---------------------------------------------------------------------------
# Serialization


def env_config_to_dict(config):
    d = {
        "arena_half_width": config.arena_half_width,
        "n_distractors": config.n_distractors,
        "appearance_offset": list(config.appearance_offset),
        "init_mode": config.init_mode,
        "t_max": config.t_max,
        "max_speed": config.max_speed,
        "grasp_radius": config.grasp_radius,
        "lift_threshold": config.lift_threshold,
        "lift_rate": config.lift_rate,
        "lift_max": config.lift_max,
        "gripper_start": list(config.gripper_start),
        "appearance_base": list(config.appearance_base),
        "freeze_steps": config.freeze_steps,
        "target_spawns": [list(p) for p in config.target_spawns],
        # demo_layouts deliberately omitted: the hash identifies the task, and
        # seeded configs are reconstructed from a demo file at load time
    }
    return d


def env_config_from_dict(d):
    return EnvConfig(
        arena_half_width=d["arena_half_width"],
        n_distractors=d["n_distractors"],
        appearance_offset=tuple(d["appearance_offset"]),
        init_mode=d["init_mode"],
        t_max=d["t_max"],
        max_speed=d["max_speed"],
        grasp_radius=d["grasp_radius"],
        lift_threshold=d["lift_threshold"],
        lift_rate=d["lift_rate"],
        lift_max=d["lift_max"],
        gripper_start=tuple(d["gripper_start"]),
        appearance_base=tuple(d["appearance_base"]),
        freeze_steps=d["freeze_steps"],
        target_spawns=tuple(tuple(p) for p in d["target_spawns"]),
    )


def config_hash(config):
    blob = json.dumps(env_config_to_dict(config), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def save_demos(path, config, episodes, noise_scale=None, seed=None):
    header = {
        "kind": "demo_header",
        "format_version": DEMO_FORMAT_VERSION,
        "config_hash": config_hash(config),
        "env_config": env_config_to_dict(config),
        "n_episodes": len(episodes),
        "noise_scale": noise_scale,
        "seed": seed,
    }
    with open(path, "w") as f:
        f.write(json.dumps(header) + "\n")
        for ep in episodes:
            rec = {
                "kind": "episode",
                "episode_id": ep.episode_id,
                "layout": {
                    "target": list(ep.layout.target),
                    "distractors": [list(p) for p in ep.layout.distractors],
                },
                "transitions": [
                    {
                        "obs": t.obs.tolist(),
                        "action": t.action.tolist(),
                        "reward": t.env_reward_raw,
                        "next_obs": t.next_obs.tolist(),
                        "done": t.done,
                        "step": t.step,
                    }
                    for t in ep.transitions
                ],
            }
            f.write(json.dumps(rec) + "\n")


def load_demos(path):
    """Read a demo file. Returns (env_config, episodes)."""
    episodes = []
    config = None
    declared = None
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataFormatError(f"{path}:{lineno}: not valid JSON ({e})") from e
            kind = rec.get("kind")
            if lineno == 1:
                if kind != "demo_header":
                    raise DataFormatError(f"{path}:1: first record must be demo_header")
                if rec.get("format_version") != DEMO_FORMAT_VERSION:
                    raise DataFormatError(
                        f"{path}:1: unsupported format_version {rec.get('format_version')!r}")
                config = env_config_from_dict(rec["env_config"])
                declared = rec["config_hash"]
                if config_hash(config) != declared:
                    raise DataFormatError(f"{path}:1: config_hash does not match env_config")
                continue
            if kind != "episode":
                raise DataFormatError(f"{path}:{lineno}: unexpected record kind {kind!r}")
            try:
                layout = Layout(
                    tuple(rec["layout"]["target"]),
                    tuple(tuple(p) for p in rec["layout"]["distractors"]),
                )
                transitions = []
                for t in rec["transitions"]:
                    transitions.append(Transition(
                        obs=np.asarray(t["obs"], dtype=np.float64),
                        action=np.asarray(t["action"], dtype=np.float64),
                        reward=float(t["reward"]),
                        next_obs=np.asarray(t["next_obs"], dtype=np.float64),
                        done=bool(t["done"]),
                        step=int(t["step"]),
                        episode_id=int(rec["episode_id"]),
                        source="expert",
                        env_reward_raw=float(t["reward"]),
                    ))
            except (KeyError, TypeError, ValueError) as e:
                raise DataFormatError(f"{path}:{lineno}: malformed episode ({e})") from e
            episodes.append(DemoEpisode(int(rec["episode_id"]), layout, transitions))
    if config is None:
        raise DataFormatError(f"{path}: empty demo file")
    return config, episodes
