"""Fixed-dimensional baselines: spline-gridded series with plain MMD / HSIC,
and a Pearson-correlation permutation test on per-series summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from ._seeding import derive_seed, make_rng, permutation_matrix
from .data import DataError, ObservationSet
from .kernels import kernel_matrix
from .permutation import (
    TestResult,
    decide,
    independence_null_from_grams,
    independence_permutation_test,
    two_sample_permutation_test,
)
from .rff import DegenerateScaleError, EmbeddedSample, median_sq_distance
from .tuning import mmd2_unbiased, mmd_variance_h1

DEFAULT_GRID_SIZE = 20


@dataclass(frozen=True)
class GridSeries:
    values: np.ndarray
    grid_size: int

    def __post_init__(self):
        if self.grid_size < 2:
            raise ValueError("grid_size must be >= 2")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")


def spline_to_grid(obs: ObservationSet, T: int = DEFAULT_GRID_SIZE) -> GridSeries:
    """Natural cubic spline through ``(t, x)``, evaluated on ``T`` points of [0, 1].

    Duplicate times are averaged; grid points outside the observed time range
    take the boundary value. Multichannel series are splined per channel and
    concatenated.
    """
    pts = obs.points if isinstance(obs, ObservationSet) else np.asarray(obs, dtype=float)
    if pts.shape[1] < 2:
        raise DataError("spline_to_grid needs (t, value...) points")
    t_all, vals = pts[:, 0], pts[:, 1:]
    t, inv = np.unique(t_all, return_inverse=True)
    if t.size < 2:
        raise DataError(f"need at least 2 distinct time points, got {t.size}")
    counts = np.bincount(inv)
    v = np.stack([np.bincount(inv, weights=vals[:, c]) / counts for c in range(vals.shape[1])], axis=1)
    grid = np.linspace(0.0, 1.0, T)
    spline = CubicSpline(t, v, bc_type="natural", axis=0)
    out = spline(np.clip(grid, t[0], t[-1]))
    return GridSeries(out.T.reshape(-1), T)


def _stack(grids) -> np.ndarray:
    arr = [g.values if isinstance(g, GridSeries) else np.asarray(g, dtype=float) for g in grids]
    lens = {a.shape[0] for a in arr}
    if len(lens) != 1:
        raise DataError(f"grid series differ in length: {sorted(lens)}")
    return np.vstack(arr)


def _as_embedded(V: np.ndarray) -> EmbeddedSample:
    n = V.shape[0]
    return EmbeddedSample(V, np.full(n, 1.0 / n), f"grid:{V.shape[1]}")


def _half_median(*arrays) -> float:
    med = median_sq_distance(np.vstack(arrays))
    if med <= 0:
        raise DegenerateScaleError("median heuristic is zero: grid vectors are identical")
    return med / 2.0


def _split_idx(n: int, fraction: float, seed: int):
    n_train = int(math.floor(fraction * n))
    if n_train < 2 or n - n_train < 2:
        raise DataError(f"cannot split {n} series with fraction {fraction}")
    order = make_rng(seed, "split").permutation(n)
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def fixed_mmd_test(gridsX, gridsY, sigma_sq: float | None = None, B: int = 400, alpha: float = 0.05,
                   seed: int = 0, multipliers=None, split_fraction: float = 0.5,
                   ridge: float = 1e-8) -> TestResult:
    """Gaussian-kernel MMD^2 V-statistic on gridded series with a permutation null.

    Bandwidth: ``sigma_sq`` if given; otherwise half the median squared
    distance, optionally scaled by the best of ``multipliers`` under the same
    power proxy as the set-level test (selected on a train split, tested on the
    rest).
    """
    X, Y = _stack(gridsX), _stack(gridsY)
    if X.shape[1] != Y.shape[1]:
        raise DataError(f"grid lengths differ: {X.shape[1]} vs {Y.shape[1]}")
    params = {}
    if sigma_sq is None and multipliers:
        trx, tex = _split_idx(len(X), split_fraction, derive_seed(seed, "split"))
        try_, tey = _split_idx(len(Y), split_fraction, derive_seed(seed, "split"))
        Xt, Yt = X[trx], Y[try_]
        med = _half_median(Xt, Yt)
        n = min(len(Xt), len(Yt))
        Z = np.vstack([Xt, Yt])
        best = None
        for c in multipliers:
            K = kernel_matrix(Z, Z, c * med)
            var = mmd_variance_h1(K[:n, :n], K[len(Xt):len(Xt) + n, len(Xt):len(Xt) + n],
                                  K[:n, len(Xt):len(Xt) + n])
            crit = mmd2_unbiased(K, len(Xt)) / (math.sqrt(var) + ridge)
            if best is None or crit > best[0]:
                best = (crit, c)
        sigma_sq = best[1] * med
        params["multiplier"] = best[1]
        X, Y = X[tex], Y[tey]
    elif sigma_sq is None:
        sigma_sq = _half_median(X, Y)
    params["sigma_sq"] = sigma_sq
    res = two_sample_permutation_test(_as_embedded(X), _as_embedded(Y), sigma_sq, B, alpha,
                                      derive_seed(seed, "null"))
    res.selected_params, res.seed = params, seed
    return res


def fixed_hsic_test(gridsX, gridsY, sigma_K_sq: float | None = None, sigma_L_sq: float | None = None,
                    B: int = 400, alpha: float = 0.05, seed: int = 0, multipliers=None,
                    split_fraction: float = 0.5, B_inner: int = 50, ridge: float = 1e-8) -> TestResult:
    """HSIC ``Tr(KHLH)/N^2`` on gridded paired series with a re-pairing null."""
    X, Y = _stack(gridsX), _stack(gridsY)
    if len(X) != len(Y):
        raise DataError(f"paired sides differ in size: {len(X)} vs {len(Y)}")
    params = {}
    if (sigma_K_sq is None or sigma_L_sq is None) and multipliers:
        tr, te = _split_idx(len(X), split_fraction, derive_seed(seed, "split", "pairs"))
        Xt, Yt = X[tr], Y[tr]
        mk, ml = _half_median(Xt), _half_median(Yt)
        n = len(tr)
        w = np.full(n, 1.0 / n)
        perms = permutation_matrix(n, B_inner, seed, "inner")
        best = None
        for b in multipliers:
            K = kernel_matrix(Xt, Xt, b * mk)
            for c in multipliers:
                L = kernel_matrix(Yt, Yt, c * ml)
                stats = independence_null_from_grams(K, L, w, w, B_inner + 1, 0,
                                                     perms=np.vstack([np.arange(n), perms]))
                null = stats[1:]
                crit = (stats[0] - null.mean()) / (null.std() + ridge)
                if best is None or crit > best[0]:
                    best = (crit, b, c)
        sigma_K_sq, sigma_L_sq = best[1] * mk, best[2] * ml
        params.update(K_multiplier=best[1], L_multiplier=best[2])
        X, Y = X[te], Y[te]
    else:
        if sigma_K_sq is None:
            sigma_K_sq = _half_median(X)
        if sigma_L_sq is None:
            sigma_L_sq = _half_median(Y)
    params.update(sigma_K_sq=sigma_K_sq, sigma_L_sq=sigma_L_sq)
    eX = _as_embedded(X)
    eY = EmbeddedSample(Y, eX.weights, f"grid:{Y.shape[1]}")
    res = independence_permutation_test(eX, eY, sigma_K_sq, sigma_L_sq, B, alpha, derive_seed(seed, "null"))
    res.selected_params, res.seed = params, seed
    return res


def series_summary(obs: ObservationSet, T: int = DEFAULT_GRID_SIZE) -> float:
    """Mean of the spline-gridded series (over all value channels)."""
    return float(spline_to_grid(obs, T).values.mean())


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float) - np.mean(x)
    y = np.asarray(y, dtype=float) - np.mean(y)
    return float(x @ y / math.sqrt((x @ x) * (y @ y)))


def pcc_perm_test(x, y, M: int = 400, alpha: float = 0.05, seed: int = 0) -> TestResult:
    """Two-sided Pearson correlation test with a shuffle null on ``|rho|``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise DataError("pcc_perm_test needs two equal-length vectors of length >= 3")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DataError("pcc_perm_test: zero variance input")
    xc = (x - x.mean()) / np.linalg.norm(x - x.mean())
    yc = (y - y.mean()) / np.linalg.norm(y - y.mean())
    rho = float(yc @ xc)
    perms = permutation_matrix(x.size, M, seed, "pcc")
    nulls = np.abs(yc[perms] @ xc)
    res = decide(abs(rho), nulls, alpha, seed=seed)
    res.statistic = rho
    res.selected_params = {"summary": "grid-mean"}
    return res
