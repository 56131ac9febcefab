"""Null rejection rates of the SS test and the baselines (size table).

Example:
    python scripts/size_table.py --processes sbm,t1,t3 --sizes 20,20,20 --tests ss-asym,cff,zc --seed 2024
"""
import argparse
import sys

from ssanova.harness import DEFAULT_REPLICATIONS, DEFAULT_RESAMPLES, ExperimentConfig, estimate_size
from ssanova.io import write_table
from ssanova.processes import ProcessSpec


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--processes", default="sbm,t1,t3")
    p.add_argument("--sizes", default="20,20,20")
    p.add_argument("--tests", default="ss-asym,cff,zc,fmax,gpf,ftype,hr")
    p.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS)
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="optional CSV path")
    args = p.parse_args(argv)
    sizes = tuple(int(x) for x in args.sizes.split(","))
    tests = tuple(args.tests.split(","))
    rows = []
    print(f"{'process':<20}" + "".join(f"{t:>10}" for t in tests))
    for proc in args.processes.split(","):
        cfg = ExperimentConfig(ProcessSpec.parse(proc), sizes, tests, replications=args.replications,
                               resamples=args.resamples, seed=args.seed)
        res = estimate_size(cfg, args.threads)
        print(f"{proc:<20}" + "".join(f"{res.rates[t]:>10.3f}" for t in tests), flush=True)
        rows += [{"process": proc, **row} for row in res.rows()]
    if args.out:
        write_table(rows, args.out)


if __name__ == "__main__":
    sys.exit(main())
