"""Power / Type-I benchmark runner over synthetic designs.

Each (method, sweep value, trial) cell draws fresh data from a seed derived
from ``(master seed, sweep value, trial)`` -- shared across methods, so all
methods in a row see the same data -- and a test seed that also includes the
method name. Cells are therefore reproducible on their own and can be run in
any order or in parallel.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._seeding import derive_seed, make_rng
from .baselines import fixed_hsic_test, fixed_mmd_test, pcc_perm_test, series_summary, spline_to_grid
from .pipeline import TestConfig, rhsic_test, rmmd_test
from .synthetic import LINKS, IndependenceDesign, TwoSampleDesign, gen_independence, gen_two_sample
from .tuning import DEFAULT_MULTIPLIERS, ParamGrid

log = logging.getLogger(__name__)

METHODS = {
    "two_sample": ("rmmd", "rmmd_unweighted", "fixed_mmd"),
    "independence": ("rhsic", "rhsic_unweighted", "fixed_hsic", "pcc"),
}
SWEEPS = {
    "two_sample": ("amplitude_diff", "variance_diff", "dims", "N"),
    "independence": ("sigma", "dims", "N"),
}
CSV_HEADER = ["method", "sweep_param", "sweep_value", "rejection_rate", "standard_error", "trials",
              "wall_time_seconds"]


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkSpec:
    """Sweep definition.

    ``base`` overrides design defaults: for two-sample ``eta``, ``sigma``,
    ``invgamma_shape``, ``size_mix`` and ``amplitude_diff`` (used by the
    ``dims`` sweep); for independence ``sigma``, ``link``
    (``None`` draws one of the four links per trial), ``dependent``,
    ``shared_times``.
    """

    problem: str
    sweep_param: str
    values: tuple
    methods: tuple
    trials: int = 200
    N: int = 100
    set_size_range: tuple = (5, 50)
    alpha: float = 0.05
    B: int = 200
    m: int = 50
    seed: int = 0
    base: dict = field(default_factory=dict)
    multipliers: tuple = DEFAULT_MULTIPLIERS
    grid_size: int = 20
    b_inner: int = 50
    max_pairs: int = 20000
    tune: bool = True

    def __post_init__(self):
        if self.problem not in METHODS:
            raise SpecError(f"unknown problem {self.problem!r}; choose from {sorted(METHODS)}")
        bad = [m for m in self.methods if m not in METHODS[self.problem]]
        if bad or not self.methods:
            raise SpecError(f"unknown method(s) {bad} for {self.problem}; valid methods: "
                            f"{', '.join(METHODS[self.problem])}")
        if self.sweep_param not in SWEEPS[self.problem]:
            raise SpecError(f"unknown sweep parameter {self.sweep_param!r}; valid: "
                            f"{', '.join(SWEEPS[self.problem])}")
        if not self.values:
            raise SpecError("sweep values must be nonempty")
        if self.trials < 1:
            raise SpecError("trials must be >= 1")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "set_size_range", tuple(self.set_size_range))
        object.__setattr__(self, "multipliers", tuple(self.multipliers))

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise SpecError(f"unknown spec field(s): {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise SpecError(str(exc)) from None


@dataclass
class BenchmarkRow:
    method: str
    sweep_param: str
    sweep_value: float
    rejection_rate: float
    standard_error: float
    trials: int
    wall_time_seconds: float = 0.0
    failures: int = 0
    p_values: list = field(default_factory=list, repr=False)


def _design_two_sample(spec: BenchmarkSpec, value, data_seed):
    base = dict(spec.base)
    eta = float(base.pop("eta", 1.0))
    sigma = float(base.pop("sigma", 0.1))
    kw = {"invgamma_shape": float(base.pop("invgamma_shape", 3.0)), "N": spec.N,
          "set_size_range": spec.set_size_range}
    mix = base.pop("size_mix", None)
    dims_diff = float(base.pop("amplitude_diff", 0.25))
    if mix is not None:
        kw["size_mix"] = tuple(tuple(p) for p in mix)
    if base:
        raise SpecError(f"unknown two-sample base field(s): {sorted(base)}")
    ex = dict(eta=eta, sigma=sigma)
    ey = dict(eta=eta, sigma=sigma)
    if spec.sweep_param == "amplitude_diff":
        ey["eta"] = eta + value
    elif spec.sweep_param == "variance_diff":
        ey["sigma"] = sigma + value
    elif spec.sweep_param == "dims":
        kw["dims"] = int(value)
        ey["eta"] = eta + dims_diff
    elif spec.sweep_param == "N":
        kw["N"] = int(value)
    x = gen_two_sample(TwoSampleDesign(seed=derive_seed(data_seed, "x"), id_prefix="x", **ex, **kw))
    y = gen_two_sample(TwoSampleDesign(seed=derive_seed(data_seed, "y"), id_prefix="y", **ey, **kw))
    return x, y


def _design_independence(spec: BenchmarkSpec, value, data_seed):
    base = dict(spec.base)
    sigma = float(base.pop("sigma", 0.5))
    link = base.pop("link", None)
    dependent = bool(base.pop("dependent", True))
    shared = bool(base.pop("shared_times", False))
    if base:
        raise SpecError(f"unknown independence base field(s): {sorted(base)}")
    if link is None:
        names = sorted(LINKS)
        link = names[int(make_rng(data_seed, "link").integers(len(names)))]
    kw = {"N": spec.N, "set_size_range": spec.set_size_range, "sigma": sigma, "link": link,
          "shared_times": shared}
    if spec.sweep_param == "sigma":
        kw["sigma"] = float(value)
    elif spec.sweep_param == "dims":
        kw["dims"] = int(value)
    elif spec.sweep_param == "N":
        kw["N"] = int(value)
    return gen_independence(IndependenceDesign(seed=derive_seed(data_seed, "pairs"), **kw), dependent)


def _config(spec: BenchmarkSpec, seed: int, weighting: str) -> TestConfig:
    grid = ParamGrid(spec.multipliers, spec.multipliers)
    return TestConfig(alpha=spec.alpha, n_permutations=spec.B, n_features=spec.m, grid=grid,
                      tune=spec.tune, weighting=weighting, b_inner=spec.b_inner,
                      max_pairs=spec.max_pairs, seed=seed)


def run_trial(spec: BenchmarkSpec, method: str, value, trial: int) -> float:
    """p-value of one method on one freshly generated dataset."""
    data_seed = derive_seed(spec.seed, "data", float(value), trial)
    test_seed = derive_seed(spec.seed, method, float(value), trial)
    if spec.problem == "two_sample":
        x, y = _design_two_sample(spec, value, data_seed)
        if method == "fixed_mmd":
            gx = [spline_to_grid(s, spec.grid_size) for s in x.sets]
            gy = [spline_to_grid(s, spec.grid_size) for s in y.sets]
            mult = spec.multipliers if spec.tune else None
            return fixed_mmd_test(gx, gy, B=spec.B, alpha=spec.alpha, seed=test_seed, multipliers=mult).p_value
        weighting = "uniform" if method == "rmmd_unweighted" else "set-size"
        return rmmd_test(x, y, _config(spec, test_seed, weighting)).p_value
    pairs = _design_independence(spec, value, data_seed)
    if method == "fixed_hsic":
        gx = [spline_to_grid(p[0], spec.grid_size) for p in pairs.pairs]
        gy = [spline_to_grid(p[1], spec.grid_size) for p in pairs.pairs]
        mult = spec.multipliers if spec.tune else None
        return fixed_hsic_test(gx, gy, B=spec.B, alpha=spec.alpha, seed=test_seed, multipliers=mult,
                               B_inner=spec.b_inner).p_value
    if method == "pcc":
        sx = [series_summary(p[0], spec.grid_size) for p in pairs.pairs]
        sy = [series_summary(p[1], spec.grid_size) for p in pairs.pairs]
        return pcc_perm_test(sx, sy, spec.B, spec.alpha, test_seed).p_value
    weighting = "uniform" if method == "rhsic_unweighted" else "set-size"
    return rhsic_test(pairs, _config(spec, test_seed, weighting)).p_value


def _safe_trial(args):
    spec, method, value, trial = args
    try:
        return run_trial(spec, method, value, trial), None
    except Exception as exc:  # recorded per trial, never dropped silently
        return None, f"{type(exc).__name__}: {exc}"


def run_benchmark(spec: BenchmarkSpec, threads: int = 1, progress=None) -> list:
    """One :class:`BenchmarkRow` per (method, sweep value), ordered by method
    then value. Results do not depend on ``threads``."""
    rows = []
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for method in spec.methods:
            for value in spec.values:
                t0 = time.perf_counter()
                jobs = [(spec, method, value, t) for t in range(spec.trials)]
                results = list(pool.map(_safe_trial, jobs, chunksize=8)) if pool else list(map(_safe_trial, jobs))
                ps = [p for p, err in results if err is None]
                errors = [err for _, err in results if err is not None]
                for err in errors[:3]:
                    log.warning("%s @ %s=%s: trial failed: %s", method, spec.sweep_param, value, err)
                done = len(ps)
                rate = float(np.mean(np.array(ps) <= spec.alpha)) if done else float("nan")
                se = math.sqrt(rate * (1 - rate) / done) if done else float("nan")
                row = BenchmarkRow(method, spec.sweep_param, float(value), rate, se, done,
                                   time.perf_counter() - t0, len(errors), ps)
                rows.append(row)
                if progress:
                    progress(row)
    finally:
        if pool:
            pool.shutdown()
    return rows


def write_csv(rows, path, timing: bool = False) -> None:
    """Write rows with the fixed header. Wall times are written as 0 unless
    ``timing`` is set, keeping the file byte-reproducible."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.method, r.sweep_param, repr(float(r.sweep_value)), repr(float(r.rejection_rate)),
                        repr(float(r.standard_error)), r.trials,
                        repr(float(r.wall_time_seconds)) if timing else "0.0"])


def read_csv(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            BenchmarkRow(rec["method"], rec["sweep_param"], float(rec["sweep_value"]),
                         float(rec["rejection_rate"]), float(rec["standard_error"]), int(rec["trials"]),
                         float(rec["wall_time_seconds"]))
            for rec in csv.DictReader(fh)
        ]


def write_json(rows, path, timing: bool = False) -> None:
    out = []
    for r in rows:
        d = asdict(r)
        if not timing:
            d["wall_time_seconds"] = 0.0
        out.append(d)
    Path(path).write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")


def load_spec(path) -> BenchmarkSpec:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SpecError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(d, dict):
        raise SpecError(f"{path}: spec must be a JSON object")
    return BenchmarkSpec.from_dict(d)
