"""Training harness: actors, learner, evaluation, metrics, ablation grids.

One Trainer owns the whole run: actor loops collecting episodes (with optional
early stopping and provider-relabeled rewards), the learner updating the
discriminator and the distributional actor-critic from mixed replay, periodic
deterministic evaluation, and a metrics CSV with a fixed column order.

Reward providers:

    env_sparse  the env's own sparse reward (learning from demonstrations)
    gail/trail  -log(1 - D(s_next)) from the current discriminator snapshot
    oracle      membership truth: expert frames 1, agent frames 0

Agent transitions are relabeled by the actor at append time with the current
snapshots; demo transitions are relabeled at sample time so their rewards
track the live discriminator. With an adversarial provider the learner never
touches the env's sparse reward (Transition.env_reward counts reads so tests
can assert exactly that).

In --single-thread mode each of the actor_count actors takes exactly one env
step per learner step, every random draw comes from a seeded stream, and the
wall_clock_s column is written as 0, so two identical runs produce
byte-identical metrics files.
"""
from __future__ import annotations

import csv
import math
import os
import threading
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import agent as agent_mod
from . import discriminator as disc_mod
from . import nn
from .config import (HOLDOUT_ID_START, HOLDOUT_SEED_OFFSET, ExperimentConfig,
                     agent_env_config, config_to_dict, expert_env_config,
                     uses_discriminator, uses_seeded_init)
from .constraining import (ConstrainingSets, ingest_agent_early_frames,
                           make_early_sets, make_random_policy_sets)
from .env import (PointLiftEnv, Transition, collect_demos, config_hash)
from .errors import ConfigError, NumericalError, UsageError
from .replay import DemoBuffer, ReplayBuffer, sample_mixed
from .stopping import EpisodeStopper

METRICS_COLUMNS = (
    "step", "wall_clock_s", "eval_return_mean", "disc_train_mean",
    "disc_holdout_mean", "constraint_accuracy", "stop_step_mean",
    "episodes_finished", "task", "method", "seed",
)

CHECKPOINT_FORMAT_VERSION = 1


def _fmt(x):
    if x is None or x == "":
        return ""
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


@dataclass
class RunResult:
    config: ExperimentConfig
    rows: list
    metrics_path: str
    checkpoint_path: str
    nets: agent_mod.AgentNets
    discriminator: object
    train_demos: list
    holdout_demos: list
    env_steps: int
    learner_steps: int

    @property
    def final_eval(self):
        return self.rows[-1]["eval_return_mean"] if self.rows else None

    @property
    def best_eval(self):
        vals = [r["eval_return_mean"] for r in self.rows
                if r["eval_return_mean"] is not None]
        return max(vals) if vals else None


def evaluate(policy, env_config, n_episodes, rng, episode_id_start=800_000_000):
    """Mean-free evaluation: n deterministic-policy episodes of exactly t_max
    steps each (no exploration noise, no early stopping). Returns the
    per-episode env returns."""
    env = PointLiftEnv(env_config, episode_id_start=episode_id_start)
    returns = np.zeros(n_episodes)
    for i in range(n_episodes):
        state, _layout = env.reset(rng)
        obs = env.observe(state)
        total = 0.0
        for _t in range(env_config.t_max):
            action = nn.forward(policy, obs)
            state, obs, reward, _done = env.step(state, action)
            total += reward
        returns[i] = total
    return returns


def expert_reference_return(env_config, n_episodes=20, noise_scale=0.05, seed=424242):
    """Mean scripted-expert return, the denominator for success thresholds."""
    rng = np.random.default_rng(seed)
    episodes = collect_demos(env_config, n=n_episodes, noise_scale=noise_scale,
                             rng=rng, episode_id_start=850_000_000)
    return float(np.mean([ep.env_return for ep in episodes]))


def generalization_probe(disc, train_episodes, holdout_episodes):
    """Mean discriminator score over training-demo frames vs holdout-demo
    frames. Raises UsageError if the two sets share episode ids."""
    train_ids = {ep.episode_id for ep in train_episodes}
    holdout_ids = {ep.episode_id for ep in holdout_episodes}
    overlap = train_ids & holdout_ids
    if overlap:
        raise UsageError(f"train/holdout demo episodes overlap: {sorted(overlap)[:5]}")
    train_obs = np.stack([t.obs for ep in train_episodes for t in ep.transitions])
    hold_obs = np.stack([t.obs for ep in holdout_episodes for t in ep.transitions])
    return (float(np.mean(disc_mod.scores(disc, train_obs))),
            float(np.mean(disc_mod.scores(disc, hold_obs))))


class _Actor:
    def __init__(self, index, env, stopper, env_rng, noise_rng, trainer):
        self.index = index
        self.env = env
        self.stopper = stopper
        self.env_rng = env_rng
        self.noise_rng = noise_rng
        self.trainer = trainer
        self.state = None
        self.obs = None
        self.episode = []
        self.ou = np.zeros(3)

    def begin_episode(self):
        self.state, _layout = self.env.reset(self.env_rng)
        self.obs = self.env.observe(self.state)
        self.episode = []
        self.ou = np.zeros(3)
        self.stopper.reset()

    def draw_noise(self):
        cfg = self.trainer.config
        self.ou = (1.0 - cfg.ou_theta) * self.ou + \
            self.noise_rng.normal(0.0, cfg.exploration_sigma, size=3)
        return self.ou

    def apply_action(self, action, policy_snap, disc_snap):
        """Advance one env step with a precomputed (already noisy) action."""
        t = self.trainer
        prev_obs, prev_step, ep_id = self.obs, self.state.step, self.state.episode_id
        self.state, self.obs, r_env, env_done = self.env.step(self.state, action)
        r_train = t.provider_reward(r_env, self.obs, disc_snap)
        self.episode.append(Transition(
            obs=prev_obs, action=action, reward=r_train, next_obs=self.obs,
            done=env_done, step=prev_step, episode_id=ep_id, source="agent",
            env_reward_raw=r_env,
        ))
        with t.stats_lock:
            t.env_steps += 1
        if self.stopper.variant == "off":
            stop = False
        elif self.stopper.variant == "fixed":
            stop = self.stopper.should_stop(None, len(self.episode))
        elif self.stopper.variant == "oracle":
            stop = self.stopper.should_stop(r_env, len(self.episode))
        elif prev_step < self.env.config.freeze_steps:
            # presentation-delay frames are no-ops; their scores carry no
            # progress information, and the score jump when the task cue
            # appears would read as sustained exceedance and truncate the
            # episode right after the delay
            stop = False
        else:  # adaptive: score is the discriminator score of the new state
            score = float(disc_mod.scores(disc_snap, self.obs))
            stop = self.stopper.should_stop(score, len(self.episode))
        if env_done or stop:
            self.flush(stopped_early=stop and not env_done)
            self.state = None

    def flush(self, stopped_early):
        t = self.trainer
        t.replay.extend(self.episode)
        if t.sets is not None and t.sets.strategy == "early":
            ingest_agent_early_frames(t.sets, self.episode)
        with t.stats_lock:
            t.episode_lengths.append(len(self.episode))
            t.episodes_finished += 1
            if stopped_early:
                t.episodes_stopped += 1


class Trainer:
    def __init__(self, config, out_dir=None, demos=None, holdout=None):
        config.validate()
        self.config = config
        self.out_dir = out_dir
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)

        master = np.random.SeedSequence(config.seed)
        (self.sample_ss, self.disc_ss, self.aug_ss, self.eval_ss, self.net_ss,
         self.actor_ss, self.metrics_ss) = master.spawn(7)
        self.sample_rng = np.random.default_rng(self.sample_ss)
        self.disc_rng = np.random.default_rng(self.disc_ss)
        self.aug_rng = np.random.default_rng(self.aug_ss)
        self.eval_rng = np.random.default_rng(self.eval_ss)
        self.metrics_rng = np.random.default_rng(self.metrics_ss)

        # demos are a per-task fixture: fixed seed, ids 0..n-1; holdout demos
        # use a disjoint id range and a distinct stream
        self.expert_cfg = expert_env_config(config)
        self.agent_cfg = agent_env_config(config)
        if demos is None:
            demos = collect_demos(
                self.expert_cfg, n=config.demo_count, noise_scale=config.demo_noise,
                rng=np.random.default_rng(config.demo_seed()))
        if holdout is None:
            holdout = collect_demos(
                self.expert_cfg, n=config.holdout_count, noise_scale=config.demo_noise,
                rng=np.random.default_rng(config.demo_seed() + HOLDOUT_SEED_OFFSET),
                episode_id_start=HOLDOUT_ID_START)
        self.train_demos = demos
        self.holdout_demos = holdout
        self.demo_buffer = DemoBuffer(demos)

        if uses_seeded_init(config):
            layouts = tuple(ep.layout for ep in demos)
            self.agent_cfg = replace(self.agent_cfg, init_mode="seeded",
                                     demo_layouts=layouts)
        # evaluation always happens on fresh uniform layouts in the agent config
        self.eval_cfg = replace(self.agent_cfg, init_mode="uniform", demo_layouts=())

        self.obs_spec = PointLiftEnv(self.agent_cfg).obs_spec
        obs_dim = self.obs_spec.size
        self.support = agent_mod.make_support(config.v_min, config.v_max, config.v_bins)
        net_seeds = self.net_ss.generate_state(3)
        self.nets = agent_mod.make_agent(
            obs_dim, 3, policy_hidden=config.policy_hidden,
            critic_hidden=config.critic_hidden, n_atoms=config.v_bins,
            seed=int(net_seeds[0]))
        self.policy_adam = nn.init_adam(self.nets.policy)
        self.critic_adam = nn.init_adam(self.nets.critic)

        self.disc = None
        self.disc_adam = None
        if uses_discriminator(config):
            self.disc = disc_mod.make_discriminator(
                obs_dim, hidden=config.disc_hidden, seed=int(net_seeds[1]))
            self.disc_adam = nn.init_adam(self.disc.net)

        self.sets = None
        if config.method == "trail":
            strategy, k = config.constraint()
            if strategy == "early":
                self.sets = make_early_sets(demos, k, config.agent_pool_capacity)
            else:
                self.sets = make_random_policy_sets(
                    self.expert_cfg, self.agent_cfg, n_episodes=k,
                    rng=np.random.default_rng(config.demo_seed() + 31337),
                    steps=config.random_constraint_steps,
                    agent_capacity=config.agent_pool_capacity)

        self.replay = ReplayBuffer(config.replay_capacity)
        self.provider = config.provider()

        self.actors = []
        if config.method != "bc":
            for i in range(config.actor_count):
                spec = config.aes_spec()
                stopper = EpisodeStopper(t_patience=config.t_patience, **spec)
                self.actors.append(_Actor(
                    i,
                    PointLiftEnv(self.agent_cfg, episode_id_start=(i + 1) * 1_000_000),
                    stopper,
                    np.random.default_rng([config.seed, 100 + i]),
                    np.random.default_rng([config.seed, 200 + i]),
                    self,
                ))

        self.snapshot = (self.nets.policy, self.disc)
        self.env_steps = 0
        self.learner_steps = 0
        self.episodes_finished = 0
        self.episodes_stopped = 0
        self.episode_lengths = []
        self.stats_lock = threading.Lock()
        self.rows = []
        self.last_constraint_acc = None
        self._rows_at_last_eval = 0

    # -- reward providers -------------------------------------------------

    def provider_reward(self, r_env, next_obs, disc_snap):
        if self.provider == "env_sparse":
            return r_env
        if self.provider == "oracle":
            return disc_mod.oracle_reward("agent")
        return float(disc_mod.reward(disc_snap, next_obs))

    def _relabel_demo(self, transitions):
        """Copies of demo transitions with provider-fresh rewards."""
        if self.provider == "env_sparse":
            return [replace(t, reward=t.env_reward()) for t in transitions]
        if self.provider == "oracle":
            r = disc_mod.oracle_reward("expert")
            return [replace(t, reward=r) for t in transitions]
        rewards = disc_mod.reward(self.disc, np.stack([t.next_obs for t in transitions]))
        return [replace(t, reward=float(r)) for t, r in zip(transitions, rewards)]

    # -- actor stepping ----------------------------------------------------

    def _step_actors_batched(self):
        """One env step for every actor, with the policy (and discriminator)
        forward passes batched across actors."""
        policy_snap, disc_snap = self.snapshot
        for a in self.actors:
            if a.state is None:
                a.begin_episode()
        obs = np.stack([a.obs for a in self.actors])
        base = nn.forward(policy_snap, obs)
        noise = np.stack([a.draw_noise() for a in self.actors])
        actions = np.clip(base + noise, -1.0, 1.0)
        for a, act in zip(self.actors, actions):
            a.apply_action(act, policy_snap, disc_snap)

    def _actor_thread(self, actor, stop_event):
        cfg = self.config
        # keep roughly the single-thread data ratio: actor_count env steps per
        # learner step, plus headroom to fill replay before the learner starts
        fill = min(cfg.min_replay, cfg.replay_capacity) + \
            cfg.actor_count * self.agent_cfg.t_max
        while not stop_event.is_set():
            if self.env_steps >= fill + cfg.actor_count * self.learner_steps:
                time.sleep(0.001)
                continue
            policy_snap, disc_snap = self.snapshot
            if actor.state is None:
                actor.begin_episode()
            base = nn.forward(policy_snap, actor.obs)
            action = np.clip(base + actor.draw_noise(), -1.0, 1.0)
            actor.apply_action(action, policy_snap, disc_snap)

    # -- learner updates ---------------------------------------------------

    def _disc_update(self):
        cfg = self.config
        s_e = self.demo_buffer.sample_observations(cfg.disc_batch, self.disc_rng)
        s_a = np.stack([t.obs for t in self.replay.sample(cfg.disc_batch, self.disc_rng)])
        if cfg.augment:
            s_e = disc_mod.augment_batch(s_e, self.obs_spec, self.aug_rng,
                                         cfg.augment_noise, cfg.augment_drop)
            s_a = disc_mod.augment_batch(s_a, self.obs_spec, self.aug_rng,
                                         cfg.augment_noise, cfg.augment_drop)
        if cfg.method == "trail":
            c_e, c_a = self.sets.sample_pair(cfg.disc_batch, self.disc_rng)
            if cfg.augment:
                c_e = disc_mod.augment_batch(c_e, self.obs_spec, self.aug_rng,
                                             cfg.augment_noise, cfg.augment_drop)
                c_a = disc_mod.augment_batch(c_a, self.obs_spec, self.aug_rng,
                                             cfg.augment_noise, cfg.augment_drop)
            batch = disc_mod.DiscBatch(s_e, s_a, c_e, c_a)
            _value, grads, info = disc_mod.trail_gradients(self.disc, batch)
            self.last_constraint_acc = info["constraint_accuracy"]
        else:
            _value, grads = disc_mod.gail_gradients(self.disc, s_e, s_a)
        # ascend the objective
        net, self.disc_adam = nn.adam_step(self.disc.net, grads.scaled(-1.0),
                                           self.disc_adam, cfg.disc_lr)
        self.disc = disc_mod.Discriminator(net)

    def _rl_update(self, update_policy):
        cfg = self.config
        n = cfg.n_step
        n_demo = math.ceil(cfg.demo_fraction * cfg.batch_size)
        if n == 1:
            flat = sample_mixed(self.replay, self.demo_buffer, cfg.batch_size,
                                cfg.demo_fraction, self.sample_rng)
            demo_part = self._relabel_demo(flat[:n_demo]) if n_demo else []
            chains = [[t] for t in demo_part] + [[t] for t in flat[n_demo:]]
        else:
            demo_chains = self.demo_buffer.sample_sequences(n_demo, n, self.sample_rng) \
                if n_demo else []
            demo_chains = [self._relabel_demo(c) for c in demo_chains]
            agent_chains = self.replay.sample_sequences(
                cfg.batch_size - n_demo, n, self.sample_rng)
            chains = demo_chains + agent_chains
        target_probs = agent_mod.n_step_target(
            chains, n, cfg.gamma, self.nets.target_policy, self.nets.target_critic,
            self.support)
        obs = np.stack([c[0].obs for c in chains])
        actions = np.stack([c[0].action for c in chains])
        _closs, cgrads = agent_mod.critic_loss_and_grads(self.nets, obs, actions,
                                                         target_probs)
        critic, self.critic_adam = nn.adam_step(self.nets.critic, cgrads,
                                                self.critic_adam, cfg.lr)
        self.nets = replace(self.nets, critic=critic)
        if update_policy:
            _obj, pgrads = agent_mod.policy_objective_and_grads(self.nets, obs,
                                                                self.support)
            policy, self.policy_adam = nn.adam_step(self.nets.policy,
                                                    pgrads.scaled(-1.0),
                                                    self.policy_adam, cfg.lr)
            self.nets = replace(self.nets, policy=policy)

    # -- metrics -----------------------------------------------------------

    def _metrics_row(self, step, wall_clock):
        cfg = self.config
        returns = evaluate(self.nets.policy, self.eval_cfg, cfg.eval_episodes,
                           self.eval_rng)
        disc_train = disc_hold = None
        if self.disc is not None:
            disc_train, disc_hold = generalization_probe(
                self.disc, self.train_demos, self.holdout_demos)
        constraint_acc = None
        if cfg.method == "trail" and self.sets is not None and len(self.sets.agent_pool):
            c_e, c_a = self.sets.sample_pair(512, self.metrics_rng)
            constraint_acc = disc_mod.accuracy(self.disc, c_e, c_a)
        with self.stats_lock:
            new_lengths = self.episode_lengths[self._rows_at_last_eval:]
            self._rows_at_last_eval = len(self.episode_lengths)
            finished = self.episodes_finished
        row = {
            "step": step,
            "wall_clock_s": 0.0 if cfg.single_thread else wall_clock,
            "eval_return_mean": float(np.mean(returns)),
            "disc_train_mean": disc_train,
            "disc_holdout_mean": disc_hold,
            "constraint_accuracy": constraint_acc,
            "stop_step_mean": float(np.mean(new_lengths)) if new_lengths else None,
            "episodes_finished": finished,
            "task": cfg.task,
            "method": cfg.method,
            "seed": cfg.seed,
        }
        self.rows.append(row)
        return row

    # -- run ---------------------------------------------------------------

    def run(self):
        cfg = self.config
        t0 = time.perf_counter()
        writer = None
        metrics_path = checkpoint_path = ""
        f = None
        try:
            if self.out_dir:
                metrics_path = os.path.join(self.out_dir, "metrics.csv")
                f = open(metrics_path, "w", newline="")
                writer = csv.writer(f)
                writer.writerow(METRICS_COLUMNS)

            def emit(step):
                row = self._metrics_row(step, time.perf_counter() - t0)
                if writer:
                    writer.writerow([_fmt(row[c]) for c in METRICS_COLUMNS])
                    f.flush()

            if cfg.method == "bc":
                self._run_bc(emit)
            elif cfg.single_thread:
                self._run_single_thread(emit)
            else:
                self._run_concurrent(emit)
        finally:
            if f:
                f.close()
        if self.out_dir:
            checkpoint_path = os.path.join(self.out_dir, "checkpoint.json")
            self._save_checkpoint(checkpoint_path)
        return RunResult(
            config=cfg, rows=self.rows, metrics_path=metrics_path,
            checkpoint_path=checkpoint_path, nets=self.nets,
            discriminator=self.disc, train_demos=self.train_demos,
            holdout_demos=self.holdout_demos, env_steps=self.env_steps,
            learner_steps=self.learner_steps)

    def _learner_step(self):
        cfg = self.config
        step = self.learner_steps + 1
        try:
            if self.disc is not None and step % cfg.disc_update_period == 0:
                self._disc_update()
            if self.disc is None or step > cfg.disc_warmup:
                self._rl_update(update_policy=step > cfg.policy_warmup)
        except NumericalError as e:
            raise NumericalError(f"learner step {step}: {e}") from e
        self.learner_steps = step
        if step % cfg.target_update_period == 0:
            self.nets = agent_mod.target_sync(self.nets, step, cfg.target_update_period)
        if step % cfg.snapshot_period == 0:
            self.snapshot = (self.nets.policy, self.disc)

    def _run_single_thread(self, emit):
        cfg = self.config
        while self.learner_steps < cfg.steps:
            self._step_actors_batched()
            if len(self.replay) < min(cfg.min_replay, cfg.replay_capacity):
                continue
            self._learner_step()
            if self.learner_steps % cfg.eval_every == 0:
                emit(self.learner_steps)
        if not self.rows or self.rows[-1]["step"] != self.learner_steps:
            emit(self.learner_steps)

    def _run_concurrent(self, emit):
        cfg = self.config
        stop_event = threading.Event()
        threads = [threading.Thread(target=self._actor_thread, args=(a, stop_event),
                                    daemon=True) for a in self.actors]
        for t in threads:
            t.start()
        try:
            while self.learner_steps < cfg.steps:
                if len(self.replay) < min(cfg.min_replay, cfg.replay_capacity):
                    time.sleep(0.001)
                    continue
                self._learner_step()
                if self.learner_steps % cfg.eval_every == 0:
                    emit(self.learner_steps)
        finally:
            stop_event.set()
            for t in threads:
                t.join(timeout=5.0)
        if not self.rows or self.rows[-1]["step"] != self.learner_steps:
            emit(self.learner_steps)

    def _run_bc(self, emit):
        cfg = self.config
        transitions = [t for ep in self.train_demos for t in ep.transitions]
        eval_every_epochs = max(1, cfg.bc_epochs // max(1, cfg.steps // cfg.eval_every))

        def hook(epoch, policy):
            self.nets = replace(self.nets, policy=policy)
            self.learner_steps = epoch
            emit(epoch)

        policy = agent_mod.bc_train(
            transitions, self.nets.policy, cfg.bc_epochs, cfg.bc_lr, cfg.bc_batch,
            np.random.default_rng([cfg.seed, 77]),
            eval_hook=hook, eval_every=eval_every_epochs)
        self.nets = replace(self.nets, policy=policy)

    def _save_checkpoint(self, path):
        import json
        blob = {
            "format_version": CHECKPOINT_FORMAT_VERSION,
            "config": config_to_dict(self.config),
            "env_config_hash": config_hash(self.agent_cfg),
            "learner_steps": self.learner_steps,
            "policy": nn.network_to_dict(self.nets.policy),
            "critic": nn.network_to_dict(self.nets.critic),
            "discriminator": nn.network_to_dict(self.disc.net) if self.disc else None,
        }
        with open(path, "w") as fp:
            json.dump(blob, fp)


def train(config, out_dir=None, demos=None, holdout=None):
    return Trainer(config, out_dir=out_dir, demos=demos, holdout=holdout).run()


def load_checkpoint_policy(path):
    import json

    from .errors import DataFormatError
    with open(path) as f:
        blob = json.load(f)
    if blob.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise DataFormatError(f"unsupported checkpoint format_version "
                              f"{blob.get('format_version')!r}")
    return nn.network_from_dict(blob["policy"])


# ---------------------------------------------------------------------------
# Ablation grids


def early_frames_grid(base, ks=(1, 10, 20, 100)):
    cells = []
    for k in ks:
        cfg = replace(base, constraint_strategy=f"early:{k}")
        cells.append((f"early_k{k}", cfg))
    return cells


def constraint_strategy_grid(base, k=10, n_random=50):
    return [
        (f"early_k{k}", replace(base, constraint_strategy=f"early:{k}")),
        (f"random_{n_random}", replace(base, constraint_strategy=f"random:{n_random}")),
    ]


def augmentation_grid(base):
    return [
        ("augment_on", replace(base, augment=True)),
        ("augment_off", replace(base, augment=False)),
    ]


def aes_grid(base, fixed_t=50):
    return [
        ("aes_off", replace(base, aes="off")),
        (f"aes_fixed{fixed_t}", replace(base, aes=f"fixed:{fixed_t}")),
        ("aes_adaptive", replace(base, aes="adaptive")),
        ("aes_oracle", replace(base, aes="oracle")),
    ]


def ablate(cells, out_dir, demos=None, holdout=None):
    """Run a list of (label, config) cells, one subdirectory each. Errors in a
    cell are recorded in the summary and do not stop the grid."""
    if not cells:
        raise ConfigError("empty ablation grid")
    os.makedirs(out_dir, exist_ok=True)
    summary_path = os.path.join(out_dir, "summary.csv")
    results = []
    with open(summary_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["label", "task", "method", "seed", "status",
                         "final_eval_return", "best_eval_return", "error"])
        for label, cfg in cells:
            cell_dir = os.path.join(out_dir, label)
            try:
                result = train(cfg, out_dir=cell_dir, demos=demos, holdout=holdout)
                writer.writerow([label, cfg.task, cfg.method, cfg.seed, "ok",
                                 _fmt(result.final_eval), _fmt(result.best_eval), ""])
                results.append((label, result))
            except Exception as e:  # keep the grid going
                writer.writerow([label, cfg.task, cfg.method, cfg.seed, "error",
                                 "", "", f"{type(e).__name__}: {e}"])
                results.append((label, None))
    return summary_path, results
