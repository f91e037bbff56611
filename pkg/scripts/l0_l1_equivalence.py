"""Compare exhaustive L0 search with the L1 solution on random normal instances.

    python scripts/l0_l1_equivalence.py --instances 200 --seed 2024
"""

import argparse
import time

import numpy as np

from handsoff.instances import costate_instance
from handsoff.sparse_control import solve_l0_exact, solve_l1


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=2024)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    agree, start = 0, time.perf_counter()
    by_size: dict[int, int] = {}
    for _ in range(args.instances):
        prob, _ = costate_instance(rng)
        k1 = int(solve_l1(prob).support_cells()[0])
        k0 = int(solve_l0_exact(prob).support_cells()[0])
        agree += k1 == k0
        by_size[k0] = by_size.get(k0, 0) + 1
    print(f"agreement {agree}/{args.instances} in {time.perf_counter() - start:.1f} s")
    print("minimal support size histogram:", dict(sorted(by_size.items())))


if __name__ == "__main__":
    main()
