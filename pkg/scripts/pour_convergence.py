"""Error of the pouring oracle against the closed-form loads as the step shrinks."""
import argparse

import numpy as np

from qosmarket.consumer import compute_loads
from qosmarket.generators import random_measure, random_profile
from qosmarket.oracle import pour_loads


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    cases = []
    for _ in range(args.instances):
        mu = random_measure(rng)
        cases.append((mu, random_profile(rng, mu, int(rng.integers(1, 7)))))
    print(f"{'step':>10} {'max error':>12}")
    for step in (1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4, 1e-4, 1e-5):
        err = max(
            max(abs(a - b) for a, b in zip(compute_loads(mu, t).loads, pour_loads(mu, t, step=step).loads))
            for mu, t in cases
        )
        print(f"{step:>10.3g} {err:>12.3g}")


if __name__ == "__main__":
    main()
