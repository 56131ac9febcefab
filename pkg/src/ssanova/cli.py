"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(including unreadable or unwritable files), 3 numerical error.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import harness, io
from .errors import DataError, NumericalError
from .grid import GridDomain
from .harness import ExperimentConfig, ShrinkingAlternative, UnknownSelectorError
from .processes import ProcessSpec, ShiftSpec, generate_grouped

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _add_common(p: argparse.ArgumentParser, seed: bool = True):
    if seed:
        p.add_argument("--seed", type=int, required=True, help="master seed (required)")
    p.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ssanova", description="Spatial-sign k-sample tests for functional data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("test", help="run tests on a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--tests", type=_str_list, required=True,
                   help=f"comma-separated selectors: {', '.join(harness.SELECTORS)}")
    p.add_argument("--resamples", "--perms", "--draws", "--boot", dest="resamples", type=int,
                   default=harness.DEFAULT_RESAMPLES, help="draws, permutations or bootstrap samples")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_common(p)

    p = sub.add_parser("simulate", help="simulate a grouped dataset CSV")
    p.add_argument("--process", required=True, help="sbm, t3, gbm, sbm^2, t3^2, contaminated(t1,0.25,5)")
    p.add_argument("--sizes", type=_int_list, required=True)
    p.add_argument("--c1", type=float, default=0.0)
    p.add_argument("--c2", type=float, default=0.0)
    p.add_argument("--a", type=float, default=0.25)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--out", required=True)
    _add_common(p)

    for name in ("size", "power"):
        p = sub.add_parser(name, help=f"Monte-Carlo {name} study from a TOML config")
        p.add_argument("--config")
        p.add_argument("--process")
        p.add_argument("--sizes", type=_int_list)
        p.add_argument("--tests", type=_str_list)
        p.add_argument("--replications", type=int)
        p.add_argument("--resamples", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--c1", type=float)
        p.add_argument("--c2", type=_float_list)
        p.add_argument("--out", required=True, help="CSV table path; the manifest goes to <out>.manifest.json")
        _add_common(p)

    p = sub.add_parser("subsample", help="subsampling size or power study on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--tests", type=_str_list, required=True)
    p.add_argument("--mode", choices=("size", "power"), default="size")
    p.add_argument("--subgroup-size", type=int)
    p.add_argument("--replications", type=int, default=200)
    p.add_argument("--resamples", type=int, default=harness.DEFAULT_RESAMPLES)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("asym-power", help="limiting powers under shrinking alternatives")
    p.add_argument("--config")
    p.add_argument("--process")
    p.add_argument("--weights", type=_float_list)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=_float_list)
    p.add_argument("--tests", type=_str_list, help="any of ss, cff, zc, hr")
    p.add_argument("--alpha", type=float)
    p.add_argument("--draws", type=int)
    p.add_argument("--out", required=True)
    _add_common(p)
    return parser


def _merge(config: Mapping[str, Any], args: argparse.Namespace, keys: Sequence[str]) -> dict[str, Any]:
    out = dict(config)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    return out


def _domain(cfg: Mapping[str, Any]) -> GridDomain:
    d = cfg.get("domain", {})
    return GridDomain(float(d.get("a", 0.25)), float(d.get("b", 0.75)), int(d.get("m", 100)))


def experiment_config(cfg: Mapping[str, Any], seed: int) -> ExperimentConfig:
    """ExperimentConfig from a config mapping; ``c1``/``c2`` may also sit under ``[shift]``."""
    shift = dict(cfg.get("shift", {}))
    shift.update({k: cfg[k] for k in ("c1", "c2") if k in cfg})
    try:
        return ExperimentConfig(
            process=ProcessSpec.parse(str(cfg["process"])),
            sizes=tuple(cfg["sizes"]),
            tests=tuple(cfg["tests"]),
            c1=float(shift.get("c1", 0.0)),
            c2_values=io.c2_grid(shift.get("c2", (0.0,))),
            replications=int(cfg.get("replications", harness.DEFAULT_REPLICATIONS)),
            alpha=float(cfg.get("alpha", 0.05)),
            seed=seed,
            resamples=int(cfg.get("resamples", harness.DEFAULT_RESAMPLES)),
            domain=_domain(cfg),
        )
    except KeyError as exc:
        raise io.ConfigError(f"configuration is missing {exc.args[0]!r}") from None


def _write_manifest(out: str, manifest: dict) -> None:
    Path(out + ".manifest.json").write_text(io.dumps(manifest))


def _cmd_test(args) -> None:
    start = time.time()
    tests = harness.check_selectors(args.tests)
    sample = io.read_dataset_csv(args.data, args.a, args.b)
    results = harness.run_tests(sample, tests, args.resamples, args.seed)
    for r in results.values():
        if isinstance(r, Exception):
            raise r
    reports = [results[t] for t in tests]
    if args.out:
        io.write_report(reports, args.out, args.format)
        cfg = {"data": args.data, "a": sample.domain.a, "b": sample.domain.b, "tests": list(tests),
               "resamples": args.resamples, "format": args.format}
        _write_manifest(args.out, io.run_manifest("test", cfg, args.seed, time.time() - start, [args.out],
                                                  reports))
    elif args.format == "json":
        sys.stdout.write(io.dumps([r.to_dict() for r in reports]))
    else:
        sys.stdout.write(",".join(io.REPORT_COLUMNS) + "\n")
        for r in reports:
            sys.stdout.write(f"{r.test},{r.statistic!r},{r.p_value!r},{r.method},{r.replicates}\n")


def _cmd_simulate(args) -> None:
    if len(args.sizes) != 3 and (args.c1 or args.c2):
        raise DataError("the c1/c2 shift design has exactly 3 groups")
    domain = GridDomain(args.a, args.b, args.m)
    spec = ProcessSpec.parse(args.process)
    if len(args.sizes) == 3:
        sample = generate_grouped(spec, ShiftSpec(args.c1, args.c2, domain), args.sizes, args.seed)
    else:
        sample = generate_grouped(spec, [0.0] * len(args.sizes), args.sizes, args.seed, domain)
    io.write_dataset_csv(sample, args.out)


def _cmd_study(args) -> None:
    start = time.time()
    cfg = io.load_config(args.config) if args.config else {}
    cfg = _merge(cfg, args, ("process", "sizes", "tests", "replications", "resamples", "alpha", "c1", "c2"))
    config = experiment_config(cfg, args.seed)
    if args.command == "size":
        rows = harness.estimate_size(config, args.threads).rows()
    else:
        rows = harness.power_curve(config, args.threads).rows()
    io.write_table(rows, args.out)
    _write_manifest(args.out, io.run_manifest(args.command, config.to_dict(), args.seed,
                                              time.time() - start, [args.out]))


def _cmd_subsample(args) -> None:
    start = time.time()
    sample = io.read_dataset_csv(args.data, args.a, args.b)
    res = harness.subsample_study(sample, args.tests, args.mode, args.subgroup_size, args.replications,
                                  args.alpha, args.resamples, args.seed)
    io.write_table(res.rows(), args.out)
    cfg = {"data": args.data, "tests": list(args.tests), "mode": args.mode,
           "subgroup_size": res.subgroup_size, "replications": args.replications,
           "resamples": args.resamples, "alpha": args.alpha, "omitted_groups": list(res.omitted_groups)}
    _write_manifest(args.out, io.run_manifest("subsample", cfg, args.seed, time.time() - start, [args.out]))


def _cmd_asym(args) -> None:
    start = time.time()
    cfg = io.load_config(args.config) if args.config else {}
    cfg = _merge(cfg, args, ("process", "weights", "c1", "c2", "tests", "alpha", "draws"))
    mc = dict(cfg.get("mc", {}))
    if args.draws is not None:
        mc["draws"] = args.draws
    if "process" not in cfg:
        raise io.ConfigError("configuration is missing 'process'")
    spec = ProcessSpec.parse(str(cfg["process"]))
    weights = tuple(cfg.get("weights", (1 / 3, 1 / 3, 1 / 3)))
    tests = [t.lower() for t in cfg.get("tests", ("ss", "cff", "zc", "hr"))]
    bad = [t for t in tests if t not in ("ss", "cff", "zc", "hr")]
    if bad:
        raise UsageError(f"unknown asymptotic-power test(s) {bad}; valid: ss, cff, zc, hr")
    alpha = float(cfg.get("alpha", 0.05))
    domain = _domain(cfg)
    rows = []
    for c2 in io.c2_grid(cfg.get("c2", (0.0,))):
        alt = ShrinkingAlternative.shift_design(float(cfg.get("c1", 0.0)), c2, spec, domain, weights)
        for t in tests:
            if t == "ss":
                res = harness.asymptotic_power_ss(
                    alt, alpha, seed=args.seed,
                    **{k: int(mc[k]) for k in ("outer", "inner", "pairs", "draws") if k in mc})
            else:
                res = harness.asymptotic_power_baseline(
                    t, alt, alpha, seed=args.seed,
                    **{k: int(mc[k]) for k in ("gamma_draws", "draws") if k in mc})
            rows.append({"test": res.test, "c2": c2, "power": res.power, "se": res.standard_error,
                         "flag": "unstable" if res.extras.get("unstable_inverse_distance") else ""})
    io.write_table(rows, args.out, ("test", "c2", "power", "se", "flag"))
    _write_manifest(args.out, io.run_manifest("asym-power", cfg, args.seed, time.time() - start, [args.out]))


COMMANDS = {"test": _cmd_test, "simulate": _cmd_simulate, "size": _cmd_study, "power": _cmd_study,
            "subsample": _cmd_subsample, "asym-power": _cmd_asym}


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        COMMANDS[args.command](args)
    except (UsageError, UnknownSelectorError, io.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
