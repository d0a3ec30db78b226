"""Replay the two hand-built dynamics on U([0,1]) and print when each is at equilibrium.

    python scripts/replay_trajectories.py --max-n 6
"""
import argparse

from qosmarket.dynamics import DynamicsConfig, Game, build_schedule, run_dynamics, tight_coarse_script
from qosmarket.measure import Measure


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--csv-dir", default=None, help="also dump each trajectory as CSV here")
    args = ap.parse_args()
    mu = Measure.uniform()

    print("slow simultaneous coarse run")
    print(f"{'n':>3} {'first eq':>9} {'rounds':>7}  equilibrium steps")
    for n in range(3, args.max_n + 1):
        start, script = tight_coarse_script(n)
        cfg = DynamicsConfig(preference="coarse", rule="scripted", script=script, max_steps=3 * (n - 1))
        traj = run_dynamics(Game(mu, n), start, build_schedule("simultaneous", n), cfg)
        eq = [s.index for s in traj.steps if s.coarse_nash]
        print(f"{n:>3} {traj.first_equilibrium_step:>9} {traj.rounds_to_first_equilibrium:>7}  {eq}")
        if args.csv_dir:
            with open(f"{args.csv_dir}/tight_n{n}.csv", "w") as fh:
                fh.write(traj.to_csv())

    print("\nsimultaneous fine best response from all-zero")
    for n in range(2, args.max_n + 1):
        cfg = DynamicsConfig(preference="fine", rule="best", max_steps=6)
        traj = run_dynamics(Game(mu, n), (0.0,) * n, build_schedule("simultaneous", n), cfg)
        levels = sorted({round(s.profile[0], 6) for s in traj.steps})
        print(f"n={n}: visits {levels}, cycle={traj.cycle}, ever fine Nash: {traj.first_step('fine_nash') is not None}")


if __name__ == "__main__":
    main()
