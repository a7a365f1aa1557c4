"""Run a benchmark spec and print a rejection-rate table.

    python3 scripts/power_sweep.py scripts/specs/two_sample_amplitude.json -o out.csv --trials 50
"""
import argparse
import dataclasses
import sys

from setkernels.harness import load_spec, run_benchmark, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("spec")
    ap.add_argument("-o", "--output", help="CSV output path")
    ap.add_argument("--trials", type=int, help="override the spec's trial count")
    ap.add_argument("--seed", type=int, help="override the spec's master seed")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    spec = load_spec(args.spec)
    overrides = {k: v for k, v in (("trials", args.trials), ("seed", args.seed)) if v is not None}
    spec = dataclasses.replace(spec, **overrides)

    def progress(r):
        print(f"  {r.method:<17} {r.sweep_param}={r.sweep_value:<6g} {r.rejection_rate:.3f} "
              f"+- {r.standard_error:.3f}  ({r.wall_time_seconds:.1f}s)", file=sys.stderr)

    rows = run_benchmark(spec, threads=args.threads, progress=progress)
    values = list(spec.values)
    print(f"{'method':<17}" + "".join(f"{spec.sweep_param}={v:<8g}" for v in values))
    for m in spec.methods:
        rates = {r.sweep_value: r.rejection_rate for r in rows if r.method == m}
        print(f"{m:<17}" + "".join(f"{rates[float(v)]:<{len(spec.sweep_param) + 9}.3f}" for v in values))
    if args.output:
        write_csv(rows, args.output)


if __name__ == "__main__":
    main()
