"""End-to-end RMMD and RHSIC tests on set-valued samples.

Default flow: split each sample into train/test, pick bandwidths on the train
part with the power proxy, then embed the held-out part with the selected
bandwidths and calibrate the statistic by permutation. With ``tune=False``
the median heuristics are used on the full data and no split is made.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ._seeding import derive_seed
from .data import DataError, PairedSample, Sample
from .kernels import median_heuristic_level2
from .permutation import TestResult, independence_permutation_test, two_sample_permutation_test
from .rff import embed_sample, median_heuristic_level1, sample_basis
from .tuning import ParamGrid, basis_seed, select_params_independence, select_params_two_sample, split

log = logging.getLogger(__name__)

WEIGHTINGS = ("set-size", "uniform")


@dataclass(frozen=True)
class TestConfig:
    alpha: float = 0.05
    n_permutations: int = 400
    n_features: int = 50
    grid: ParamGrid = field(default_factory=ParamGrid)
    tune: bool = True
    weighting: str = "set-size"
    tune_weighting: str = "uniform"
    second_level: str = "gaussian"
    b_inner: int = 50
    max_pairs: int = 10**6
    seed: int = 0
    keep_nulls: bool = False

    __test__ = False

    def __post_init__(self):
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"weighting must be one of {WEIGHTINGS}, got {self.weighting!r}")
        if self.tune_weighting not in WEIGHTINGS:
            raise ValueError(f"tune_weighting must be one of {WEIGHTINGS}, got {self.tune_weighting!r}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.n_permutations < 1 or self.n_features < 1:
            raise ValueError("n_permutations and n_features must be positive")


def rmmd_test(x: Sample, y: Sample, config: TestConfig = TestConfig()) -> TestResult:
    if x.dim != y.dim:
        raise DataError(f"samples differ in point dimension: {x.dim} vs {y.dim}")
    if config.weighting == "uniform":
        x, y = x.with_uniform_weights(), y.with_uniform_weights()
    seed = config.seed
    m = config.n_features
    audit = {"tuned": config.tune}
    if config.tune:
        frac = config.grid.split_fraction
        # one split seed for both sides, so a sample tested against itself keeps identical parts
        train_x, test_x = split(x, frac, derive_seed(seed, "split"))
        train_y, test_y = split(y, frac, derive_seed(seed, "split"))
        report = select_params_two_sample(train_x, train_y, config.grid, m, seed, config.max_pairs,
                                          config.tune_weighting, config.second_level)
        best = report.best
        s1, s2 = best["level1"], best["level2"]
        params = {"level1_sq": s1, "level2_sq": s2,
                  "level1_multiplier": best["level1_multiplier"],
                  "level2_multiplier": best["level2_multiplier"]}
        audit.update(train_ids_x=train_x.ids, test_ids_x=test_x.ids,
                     train_ids_y=train_y.ids, test_ids_y=test_y.ids)
    else:
        test_x, test_y = x, y
        s1 = median_heuristic_level1([x, y], config.max_pairs, derive_seed(seed, "median1"))
        s2 = None
    basis = sample_basis(m, x.dim, s1, basis_seed(seed))
    ex, ey = embed_sample(test_x, basis), embed_sample(test_y, basis)
    if s2 is None:
        s2 = median_heuristic_level2(ex, ey)
        params = {"level1_sq": s1, "level2_sq": s2}
    audit["basis_fingerprint"] = basis.fingerprint
    res = two_sample_permutation_test(ex, ey, s2, config.n_permutations, config.alpha,
                                      derive_seed(seed, "null"), config.second_level, config.keep_nulls)
    res.selected_params, res.seed, res.audit = params, seed, audit
    log.info("rmmd seed=%d basis=%s params=%s p=%.4g", seed, basis.fingerprint, params, res.p_value)
    return res


def rhsic_test(pairs: PairedSample, config: TestConfig = TestConfig()) -> TestResult:
    if config.weighting == "uniform":
        pairs = pairs.with_uniform_weights()
    seed = config.seed
    m = config.n_features
    audit = {"tuned": config.tune}
    if config.tune:
        train, test = split(pairs, config.grid.split_fraction, derive_seed(seed, "split", "pairs"))
        report = select_params_independence(train, config.grid, m, config.b_inner, seed, config.max_pairs,
                                            config.tune_weighting, config.second_level)
        best = report.best
        s1x, s1y = best["level1_x"], best["level1_y"]
        sk, sl = best["sigma_K_sq"], best["sigma_L_sq"]
        params = {"level1_sq_x": s1x, "level1_sq_y": s1y, "sigma_K_sq": sk, "sigma_L_sq": sl,
                  "level1_multiplier": best["level1_multiplier"],
                  "K_multiplier": best["K_multiplier"], "L_multiplier": best["L_multiplier"]}
        audit.update(train_ids=train.ids, test_ids=test.ids)
    else:
        test = pairs
        s1x = median_heuristic_level1(pairs.x, config.max_pairs, derive_seed(seed, "median1", "x"))
        s1y = median_heuristic_level1(pairs.y, config.max_pairs, derive_seed(seed, "median1", "y"))
        sk = sl = None
    xs, ys = test.x, test.y
    bx = sample_basis(m, xs.dim, s1x, basis_seed(seed, "x"))
    by = sample_basis(m, ys.dim, s1y, basis_seed(seed, "y"))
    ex, ey = embed_sample(xs, bx), embed_sample(ys, by)
    if sk is None:
        sk, sl = median_heuristic_level2(ex), median_heuristic_level2(ey)
        params = {"level1_sq_x": s1x, "level1_sq_y": s1y, "sigma_K_sq": sk, "sigma_L_sq": sl}
    audit["basis_fingerprint_x"] = bx.fingerprint
    audit["basis_fingerprint_y"] = by.fingerprint
    res = independence_permutation_test(ex, ey, sk, sl, config.n_permutations, config.alpha,
                                        derive_seed(seed, "null"), config.second_level, config.keep_nulls)
    res.selected_params, res.seed, res.audit = params, seed, audit
    log.info("rhsic seed=%d params=%s p=%.4g", seed, params, res.p_value)
    return res
