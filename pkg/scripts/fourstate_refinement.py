"""Grid refinement of the four-state example for the L1, L1/L2 and L2 objectives.

    python scripts/fourstate_refinement.py --N 250 500 1000
"""

import argparse
import time

import numpy as np

from handsoff.lti import LtiSystem
from handsoff.signals import sparsity_rate
from handsoff.sparse_control import solve_l1, solve_l1l2, solve_l2
from handsoff.transcription import FiniteHorizonProblem, Objective

A = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]
B = [[2], [0], [0], [0]]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, nargs="+", default=[250, 500, 1000])
    p.add_argument("--T", type=float, default=10.0)
    args = p.parse_args()
    sys = LtiSystem(np.array(A, float), np.array(B, float))
    print(f"{'N':>6} {'objective':>9} {'rate':>7} {'switches':>8} {'max jump':>9} "
          f"{'terminal':>9} {'seconds':>7}")
    for N in args.N:
        prob = FiniteHorizonProblem(sys, np.ones(4), args.T, N, Objective.L1L2, theta=1.0)
        for name, solver in (("l1", solve_l1), ("l1l2", solve_l1l2), ("l2", solve_l2)):
            t0 = time.perf_counter()
            sol = solver(prob)
            c = sol.certificates
            print(f"{N:6d} {name:>9} {sparsity_rate(sol.u):7.3f} {c.switching_counts[0]:8d} "
                  f"{c.max_jumps[0]:9.4f} {c.terminal_error:9.1e} "
                  f"{time.perf_counter() - t0:7.2f}")


if __name__ == "__main__":
    main()
