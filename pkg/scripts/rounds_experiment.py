"""How many rounds do best-response and delta-better dynamics actually need?

Random measures and starts; prints the distribution of rounds to the first
equilibrium next to the worst-case bound. Optional CSV of every run.

    python scripts/rounds_experiment.py --runs 200 --seed 1 --out rounds.csv
"""
import argparse
import csv
import math
from collections import Counter

import numpy as np

from qosmarket.dynamics import DynamicsConfig, Game, build_schedule, run_dynamics
from qosmarket.generators import random_measure


def settings(n, mu_total, delta):
    yield "fine-best", DynamicsConfig(preference="fine", rule="best", max_steps=4 * n * n), n
    yield "coarse-best", DynamicsConfig(preference="coarse", rule="best", max_steps=4 * n * n), max(n - 1, 1)
    bound = n * math.ceil(mu_total / (delta * n))
    for policy in ("best", "adversarial"):
        cfg = DynamicsConfig(preference="coarse", rule="delta-better", delta=delta, policy=policy,
                             max_steps=n * (bound + 2))
        yield f"delta-{policy}", cfg, bound


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    rows = []
    for _ in range(args.runs):
        mu = random_measure(rng)
        n = int(rng.integers(2, args.max_n + 1))
        start = tuple(rng.random(n))
        game = Game(mu, n)
        sched = build_schedule("sequential", n)
        for name, cfg, bound in settings(n, mu.total, args.delta):
            traj = run_dynamics(game, start, sched, cfg)
            rows.append({"setting": name, "n": n, "rounds": traj.rounds_to_first_equilibrium, "bound": bound})

    print(f"{'setting':<18}{'runs':>6}{'max rounds':>12}{'max bound':>11}{'over bound':>12}  histogram")
    for name in dict.fromkeys(r["setting"] for r in rows):
        mine = [r for r in rows if r["setting"] == name]
        done = [r["rounds"] for r in mine if r["rounds"] is not None]
        over = sum(1 for r in mine if r["rounds"] is None or r["rounds"] > r["bound"])
        hist = dict(sorted(Counter(done).items()))
        print(f"{name:<18}{len(mine):>6}{max(done, default=0):>12}{max(r['bound'] for r in mine):>11}{over:>12}  {hist}")

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["setting", "n", "rounds", "bound"])
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
