"""Run every built-in demo into one output directory.

    python scripts/run_demos.py --out results --seed 0
"""

import argparse
from pathlib import Path

from handsoff.cli import DEMOS, main as cli


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    for name in sorted(DEMOS):
        code = cli(["demo", name, "--seed", str(args.seed),
                    "--out", str(Path(args.out) / name)])
        print(f"{name}: exit {code}")


if __name__ == "__main__":
    main()
