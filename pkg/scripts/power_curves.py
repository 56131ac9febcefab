"""Finite-sample power curves over an equispaced c2 grid, with common noise across c2.

Example:
    python scripts/power_curves.py --process t1 --c2-stop 40 --tests ss-asym,zc,gpf,cff,ftype --seed 7
"""
import argparse
import sys

import numpy as np

from ssanova.harness import ExperimentConfig, power_curve
from ssanova.io import write_table
from ssanova.processes import ProcessSpec


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--process", default="sbm")
    p.add_argument("--sizes", default="20,20,20")
    p.add_argument("--tests", default="ss-asym,cff,zc,gpf,ftype")
    p.add_argument("--c1", type=float, default=0.5)
    p.add_argument("--c2-start", type=float, default=0.0)
    p.add_argument("--c2-stop", type=float, default=20.0)
    p.add_argument("--c2-num", type=int, default=10)
    p.add_argument("--replications", type=int, default=200)
    p.add_argument("--resamples", type=int, default=500)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="optional CSV path")
    args = p.parse_args(argv)
    tests = tuple(args.tests.split(","))
    c2 = tuple(np.linspace(args.c2_start, args.c2_stop, args.c2_num))
    cfg = ExperimentConfig(ProcessSpec.parse(args.process), tuple(int(x) for x in args.sizes.split(",")), tests,
                           c1=args.c1, c2_values=c2, replications=args.replications, resamples=args.resamples,
                           seed=args.seed)
    curve = power_curve(cfg, args.threads)
    print(f"{'c2':>8}" + "".join(f"{t:>10}" for t in tests))
    for i, c in enumerate(c2):
        print(f"{c:>8.2f}" + "".join(f"{curve.rates[t][i]:>10.3f}" for t in tests))
    if args.out:
        write_table(curve.rows(), args.out)


if __name__ == "__main__":
    sys.exit(main())
