"""Monte Carlo sparsity rate and ultimate bound gamma against the target rate r
for the scalar stable plant under uniform noise.

    python scripts/sparsity_tradeoff.py --episodes 20 --total-time 20
"""

import argparse
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from handsoff.oracle_1d import ScalarPlant
from handsoff.self_triggered import (Disturbance, SelfTriggeredConfig, measured_sparsity_rate,
                                     run_episode, stability_report)


def config(r, seed, episode, total_time):
    return SelfTriggeredConfig(ScalarPlant(-1.0), [1.0], r=r, T_min=0.1, delta=1.0,
                               disturbance=Disturbance("uniform", seed=seed, episode=episode),
                               total_time=total_time)


def episode_rate(args):
    cfg = config(*args)
    return measured_sparsity_rate(run_episode(cfg)).total


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--r", type=float, nargs="+", default=[0.3, 0.45, 0.6, 0.75, 0.9])
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--total-time", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    print(f"{'r':>5} {'gamma':>7} {'cond':>5} {'mean rate':>9} {'max rate':>8}")
    with ProcessPoolExecutor() as pool:
        for r in args.r:
            rep = stability_report(config(r, args.seed, 0, args.total_time))
            jobs = [(r, args.seed, k, args.total_time) for k in range(args.episodes)]
            rates = np.array(list(pool.map(episode_rate, jobs)))
            print(f"{r:5.2f} {rep.gamma:7.4f} {str(rep.condition_ok):>5} "
                  f"{rates.mean():9.4f} {rates.max():8.4f}")


if __name__ == "__main__":
    main()
