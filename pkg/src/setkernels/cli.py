"""Command-line interface.

    setkernels two-sample X.jsonl Y.jsonl [options]
    setkernels independence PAIRS.jsonl [options]
    setkernels gen two-sample|independence [design flags] -o OUT.jsonl
    setkernels benchmark SPEC.json -o OUT.csv

Exit codes: 0 success, 2 usage or input error, 3 numerical degeneracy.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict

from .data import DataError, load_sample, save_sample
from .harness import SpecError, load_spec, run_benchmark, write_csv, write_json
from .pipeline import TestConfig, rhsic_test, rmmd_test
from .rff import DegenerateScaleError
from .synthetic import LINKS, IndependenceDesign, TwoSampleDesign, gen_independence, gen_two_sample
from .tuning import DEFAULT_MULTIPLIERS, ParamGrid

log = logging.getLogger("setkernels")

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3


def _floats(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _size_range(text: str) -> tuple:
    try:
        lo, hi = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LOW,HIGH, got {text!r}") from None
    return lo, hi


def _add_test_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--permutations", "-B", type=int, default=400)
    p.add_argument("--features", "-m", type=int, default=50)
    p.add_argument("--level1-grid", type=_floats, default=DEFAULT_MULTIPLIERS,
                   help="multipliers of the level-1 median heuristic")
    p.add_argument("--level2-grid", type=_floats, default=DEFAULT_MULTIPLIERS,
                   help="multipliers of the level-2 median heuristic")
    p.add_argument("--split", type=float, default=0.5, help="training fraction for tuning")
    p.add_argument("--weighting", choices=("set-size", "uniform"), default="set-size")
    p.add_argument("--no-tune", action="store_true", help="median heuristics on the full data, no split")
    p.add_argument("--second-level", choices=("gaussian", "linear"), default="gaussian")
    p.add_argument("--b-inner", type=int, default=50, help="re-pairings for the independence tuning criterion")
    p.add_argument("--max-pairs", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="parallelism cap; results do not depend on it")
    p.add_argument("--output", "-o", help="write result here instead of standard output")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="setkernels", description="Kernel tests on set-valued data.")
    ap.add_argument("-q", "--quiet", action="store_true", help="suppress the run log on standard error")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("two-sample", help="RMMD two-sample test")
    p.add_argument("x", help="JSONL file, one set per line")
    p.add_argument("y", help="JSONL file, one set per line")
    _add_test_flags(p)

    p = sub.add_parser("independence", help="RHSIC independence test")
    p.add_argument("pairs", help="paired JSONL file")
    _add_test_flags(p)

    g = sub.add_parser("gen", help="generate synthetic data")
    gsub = g.add_subparsers(dest="design", required=True)
    for name in ("two-sample", "independence"):
        q = gsub.add_parser(name)
        q.add_argument("--n", type=int, default=100, help="number of sets / pairs")
        q.add_argument("--sizes", type=_size_range, default=(5, 50), help="set size range LOW,HIGH")
        q.add_argument("--dims", type=int, default=1)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--output", "-o", required=True)
        if name == "two-sample":
            q.add_argument("--eta", type=float, default=1.0, help="amplitude of the first channel")
            q.add_argument("--sigma", type=float, default=0.1, help="baseline variance")
            q.add_argument("--shape", type=float, default=3.0, help="inverse-gamma shape of per-set variance")
            q.add_argument("--prefix", default="set", help="set id prefix")
        else:
            q.add_argument("--sigma", type=float, default=0.5, help="observation noise standard deviation")
            q.add_argument("--link", choices=sorted(LINKS), default="square")
            q.add_argument("--independent", action="store_true", help="sever the pairing")
            q.add_argument("--shared-times", action="store_true", help="x and y observed at the same times")

    b = sub.add_parser("benchmark", help="run a power / Type-I sweep from a JSON spec")
    b.add_argument("spec")
    b.add_argument("--output", "-o", required=True, help="CSV output path")
    b.add_argument("--json", help="optional JSON mirror of the rows")
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--timing", action="store_true", help="record wall times (output no longer byte-stable)")
    return ap


def _config(args) -> TestConfig:
    grid = ParamGrid(args.level1_grid, args.level2_grid, args.split)
    return TestConfig(alpha=args.alpha, n_permutations=args.permutations, n_features=args.features,
                      grid=grid, tune=not args.no_tune, weighting=args.weighting,
                      second_level=args.second_level, b_inner=args.b_inner, max_pairs=args.max_pairs,
                      seed=args.seed)


def _emit(result, args) -> None:
    if args.format == "json":
        text = result.to_json() + "\n"
    else:
        d = result.to_dict()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["schema", "statistic", "p_value", "reject", "alpha", "n_permutations", "seed"]
        params = sorted(d["selected_params"])
        w.writerow(cols + params)
        w.writerow([d[c] for c in cols] + [d["selected_params"][k] for k in params])
        text = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_test(args) -> int:
    config = _config(args)
    log.info("config: %s", json.dumps({k: v for k, v in asdict(config).items() if k != "grid"}))
    log.info("grid: %s", asdict(config.grid))
    if args.command == "two-sample":
        x = load_sample(args.x, "two-sample")
        y = load_sample(args.y, "two-sample")
        result = rmmd_test(x, y, config)
    else:
        result = rhsic_test(load_sample(args.pairs, "paired"), config)
    log.info("selected: %s", result.selected_params)
    _emit(result, args)
    return EXIT_OK


def _run_gen(args) -> int:
    if args.design == "two-sample":
        design = TwoSampleDesign(eta=args.eta, sigma=args.sigma, invgamma_shape=args.shape, N=args.n,
                                 set_size_range=args.sizes, dims=args.dims, seed=args.seed, id_prefix=args.prefix)
        data = gen_two_sample(design)
    else:
        design = IndependenceDesign(sigma=args.sigma, link=args.link, N=args.n, set_size_range=args.sizes,
                                    dims=args.dims, seed=args.seed, shared_times=args.shared_times)
        data = gen_independence(design, dependent=not args.independent)
    print(f"design: {json.dumps(asdict(design))}", file=sys.stderr)
    save_sample(data, args.output)
    return EXIT_OK


def _run_benchmark(args) -> int:
    spec = load_spec(args.spec)
    log.info("spec: %s", json.dumps(asdict(spec)))

    def progress(row):
        print(f"{row.method} {row.sweep_param}={row.sweep_value:g}: rejection {row.rejection_rate:.3f} "
              f"(se {row.standard_error:.3f}, {row.trials} trials, {row.failures} failed, "
              f"{row.wall_time_seconds:.1f}s)", file=sys.stderr)

    rows = run_benchmark(spec, threads=args.threads, progress=progress)
    write_csv(rows, args.output, timing=args.timing)
    if args.json:
        write_json(rows, args.json, timing=args.timing)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command in ("two-sample", "independence"):
            return _run_test(args)
        if args.command == "gen":
            return _run_gen(args)
        return _run_benchmark(args)
    except DegenerateScaleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DataError, SpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
