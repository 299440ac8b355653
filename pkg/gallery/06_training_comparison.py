"""GAIL vs TRAIL head to head on the distractor-heavy lift task.

Both methods get the same 100 demonstrations, the same step budget, and the
same seed. The demos carry per-episode distractor patterns that identify the
demonstration set perfectly, so a free discriminator can win its game by
memorizing those patterns instead of reading the task. Watch three columns:

  eval      mean return of the deterministic policy on fresh layouts
  d gap     discriminator score on training demos minus held-out demos
            (a memorizing discriminator scores unseen expert data low)
  cacc      accuracy of TRAIL's discriminator on the constraining pair
            (frames that differ only in scene identity, not behavior)

Runs two 10k-step trainings single threaded, about a minute each, then writes
a learning-curve SVG next to the metrics CSVs under gallery/out/.
"""
import os

import numpy as np

from imitation_lab.config import (HOLDOUT_ID_START, HOLDOUT_SEED_OFFSET,
                                  ExperimentConfig, expert_env_config)
from imitation_lab.env import collect_demos
from imitation_lab.harness import expert_reference_return, train
from imitation_lab.plotting import plot_runs

OUT = os.path.join(os.path.dirname(__file__), "out")
STEPS = 10_000
SEED = 1

base = ExperimentConfig(task="lift_distracted", method="gail", seed=SEED,
                        steps=STEPS, single_thread=True)

# one shared demo fixture, exactly what train() would collect on its own
expert_cfg = expert_env_config(base)
demos = collect_demos(expert_cfg, n=base.demo_count, noise_scale=base.demo_noise,
                      rng=np.random.default_rng(base.demo_seed()))
holdout = collect_demos(expert_cfg, n=base.holdout_count, noise_scale=base.demo_noise,
                        rng=np.random.default_rng(base.demo_seed() + HOLDOUT_SEED_OFFSET),
                        episode_id_start=HOLDOUT_ID_START)
ref = expert_reference_return(expert_cfg)
print(f"task lift_distracted, {len(demos)} demos, expert reference {ref:.1f}")

results = {}
for method in ("gail", "trail"):
    cfg = ExperimentConfig(task="lift_distracted", method=method, seed=SEED,
                           steps=STEPS, single_thread=True)
    print(f"\ntraining {method} for {STEPS} steps ...", flush=True)
    results[method] = train(cfg, out_dir=os.path.join(OUT, f"06_{method}"),
                            demos=demos, holdout=holdout)

print(f"\n{'step':>6}  {'gail eval':>9} {'d gap':>6}   {'trail eval':>10} {'d gap':>6} {'cacc':>5}")
for g, t in zip(results["gail"].rows, results["trail"].rows):
    ggap = g["disc_train_mean"] - g["disc_holdout_mean"]
    tgap = t["disc_train_mean"] - t["disc_holdout_mean"]
    print(f"{g['step']:>6}  {g['eval_return_mean']:>9.1f} {ggap:>6.3f}"
          f"   {t['eval_return_mean']:>10.1f} {tgap:>6.3f}"
          f" {t['constraint_accuracy']:>5.2f}")

gail_final = results["gail"].final_eval
trail_final = results["trail"].final_eval
print(f"\nfinal returns: gail {gail_final:.1f} ({gail_final / ref:.0%} of expert)"
      f"  trail {trail_final:.1f} ({trail_final / ref:.0%} of expert)")
print("gail's discriminator separates train from holdout demos (memorization);"
      "\ntrail's constraint keeps that gap small and its reward keeps meaning"
      " something.")

svg = plot_runs([results["gail"].metrics_path, results["trail"].metrics_path],
                os.path.join(OUT, "06_learning_curves.svg"),
                title="lift_distracted, seed 1", reference=ref)
print(f"\nwrote {svg}")
