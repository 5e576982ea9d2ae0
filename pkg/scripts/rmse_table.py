"""In-sample RMSE of CRSIR against plain SIR on the equicorrelated design.

    python scripts/rmse_table.py --runs 100 --seed 0
"""

import argparse
import time

from crsir.harness.simulation import rmse_table


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--T", type=int, default=300)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c", type=int, default=10)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--slices", type=int, default=None)
    args = p.parse_args()

    start = time.perf_counter()
    res = rmse_table(T=args.T, runs=args.runs, seed=args.seed, c=args.c, tau=args.tau, H=args.slices)
    print(res.to_markdown())
    print(f"\n{args.runs} runs in {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
