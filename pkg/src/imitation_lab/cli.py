"""Command line front end.

    imitation-lab demos  --task lift --out demos.jsonl
    imitation-lab train  --task lift_distracted --method trail --seed 0 --out runs/t0
    imitation-lab eval   --checkpoint runs/t0/checkpoint.json --task lift_distracted
    imitation-lab ablate --grid early_frames --task lift_distracted --out runs/ab
    imitation-lab plot   --out curves.svg runs/*/metrics.csv

Exit codes: 0 success, 2 configuration or data-format problems, 3 numerical
failure during training, 1 anything unexpected.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import env as env_mod
from . import harness, plotting
from .config import (METHODS, TASKS, ExperimentConfig, agent_env_config,
                     expert_env_config, load_config)
from .errors import (ConfigError, DataFormatError, NumericalError,
                     SamplingError, UsageError)

_GRIDS = {
    "early_frames": lambda base, _: harness.early_frames_grid(base),
    "strategy": lambda base, _: harness.constraint_strategy_grid(base),
    "augment": lambda base, _: harness.augmentation_grid(base),
    "aes": lambda base, _: harness.aes_grid(base),
}

# CLI-overridable ExperimentConfig fields (flag name == field name)
_OVERRIDES = (
    "steps", "lr", "disc_lr", "batch_size", "disc_batch", "gamma", "n_step",
    "v_min", "v_max", "v_bins", "actor_count", "demo_fraction",
    "exploration_sigma", "target_update_period", "replay_capacity",
    "disc_warmup", "disc_update_period", "policy_warmup", "ou_theta",
    "demo_count", "demo_noise",
    "holdout_count", "min_replay", "snapshot_period", "eval_every",
    "eval_episodes", "t_patience", "bc_epochs", "bc_batch", "bc_lr",
    "augment_noise", "augment_drop", "reward_provider",
)


def _add_override_flags(p):
    p.add_argument("--config", help="JSON file with a full experiment config")
    p.add_argument("--aes", help="off | fixed:T | adaptive | oracle")
    p.add_argument("--constraint-strategy", dest="constraint_strategy",
                   help="early:K | random:N")
    p.add_argument("--single-thread", action="store_true", default=None,
                   help="deterministic mode: 1:1 actor/learner stepping, "
                        "byte-identical metrics")
    p.add_argument("--no-augment", action="store_true",
                   help="disable discriminator input augmentation")
    for name in _OVERRIDES:
        default = ExperimentConfig.__dataclass_fields__[name].default
        caster = float if isinstance(default, float) else \
            int if isinstance(default, int) else str
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=caster)


def _build_config(args):
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        cfg = ExperimentConfig(task=args.task, method=args.method,
                               seed=args.seed)
    updates = {}
    for name in _OVERRIDES:
        val = getattr(args, name, None)
        if val is not None:
            updates[name] = val
    for name in ("aes", "constraint_strategy"):
        val = getattr(args, name, None)
        if val is not None:
            updates[name] = val
    if getattr(args, "single_thread", None):
        updates["single_thread"] = True
    if getattr(args, "no_augment", False):
        updates["augment"] = False
    if getattr(args, "task", None) and args.config:
        updates["task"] = args.task
    if getattr(args, "method", None) and args.config:
        updates["method"] = args.method
    if getattr(args, "seed", None) is not None and args.config:
        updates["seed"] = args.seed
    cfg = replace(cfg, **updates)
    cfg.validate()
    return cfg


def _cmd_demos(args):
    cfg = ExperimentConfig(task=args.task, method="bc", seed=0)
    env_cfg = expert_env_config(cfg)
    rng = np.random.default_rng(args.seed if args.seed is not None
                                else cfg.demo_seed())
    episodes = env_mod.collect_demos(env_cfg, n=args.count,
                                     noise_scale=args.noise, rng=rng)
    env_mod.save_demos(args.out, env_cfg, episodes, noise_scale=args.noise,
                       seed=args.seed if args.seed is not None else cfg.demo_seed())
    returns = [ep.env_return for ep in episodes]
    print(f"wrote {len(episodes)} episodes to {args.out} "
          f"(mean return {np.mean(returns):.1f}, min {np.min(returns):.1f})")
    return 0


def _cmd_train(args):
    cfg = _build_config(args)
    result = harness.train(cfg, out_dir=args.out)
    print(f"task={cfg.task} method={cfg.method} seed={cfg.seed} "
          f"steps={result.learner_steps} env_steps={result.env_steps}")
    print(f"final eval return {result.final_eval:.2f} "
          f"(best {result.best_eval:.2f})")
    if result.metrics_path:
        print(f"metrics: {result.metrics_path}")
    return 0


def _cmd_eval(args):
    policy = harness.load_checkpoint_policy(args.checkpoint)
    cfg = ExperimentConfig(task=args.task, method="bc", seed=0)
    env_cfg = agent_env_config(cfg)
    rng = np.random.default_rng(args.seed)
    returns = harness.evaluate(policy, env_cfg, args.episodes, rng)
    print(f"returns: {' '.join(f'{r:.0f}' for r in returns)}")
    print(f"mean {np.mean(returns):.2f}  std {np.std(returns):.2f}")
    return 0


def _cmd_ablate(args):
    base = _build_config(args)
    cells = _GRIDS[args.grid](base, args)
    summary_path, results = harness.ablate(cells, args.out)
    for label, result in results:
        status = "error" if result is None else f"{result.final_eval:.2f}"
        print(f"{label:>16}  {status}")
    print(f"summary: {summary_path}")
    return 0


def _cmd_plot(args):
    out = plotting.plot_runs(args.metrics, args.out, column=args.column,
                             title=args.title, reference=args.reference)
    print(f"wrote {out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="imitation-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demos", help="collect scripted-expert demonstrations")
    p.add_argument("--task", required=True, choices=TASKS)
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=_cmd_demos)

    p = sub.add_parser("train", help="train one configuration")
    p.add_argument("--task", choices=TASKS)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="run directory for metrics + checkpoint")
    _add_override_flags(p)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved policy checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--task", required=True, choices=TASKS)
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("ablate", help="run a named ablation grid")
    p.add_argument("--grid", required=True, choices=sorted(_GRIDS))
    p.add_argument("--task", choices=TASKS)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_override_flags(p)
    p.set_defaults(fn=_cmd_ablate)

    p = sub.add_parser("plot", help="learning curves from metrics CSVs")
    p.add_argument("metrics", nargs="+", help="metrics.csv files")
    p.add_argument("--out", required=True, help="output .svg path")
    p.add_argument("--column", default="eval_return_mean")
    p.add_argument("--title")
    p.add_argument("--reference", type=float,
                   help="horizontal reference line (e.g. expert return)")
    p.set_defaults(fn=_cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("train", "ablate") and not getattr(args, "config", None):
        missing = [f for f in ("task", "method") if not getattr(args, f, None)]
        if missing:
            parser.error(f"--{' and --'.join(missing)} required without --config")
    try:
        return args.fn(args)
    except (ConfigError, DataFormatError, UsageError, SamplingError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
