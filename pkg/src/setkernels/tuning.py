"""Bandwidth selection by maximizing a test-power proxy on a training split.

For the two-sample test the proxy is ``MMD^2_u / (sigma_hat + ridge)`` where
``MMD^2_u`` is the unbiased estimate and ``sigma_hat^2`` the second-order
variance estimate under the alternative. For the independence test the proxy
is RHSIC standardized by the mean and spread of its values over within-train
re-pairings. Grids are multiplicative factors applied
to median-heuristic bandwidths computed on the training part.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._seeding import derive_seed, make_rng, permutation_matrix
from .data import DataError, PairedSample, Sample
from .kernels import kernel_matrix, median_heuristic_level2, sq_dists
from .permutation import weighted_centered
from .rff import embed_sample, median_heuristic_level1, sample_basis
from .statistics import rmmd2_pooled

DEFAULT_MULTIPLIERS = (0.25, 0.5, 1.0, 2.0, 4.0)
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class ParamGrid:
    level1_multipliers: tuple = DEFAULT_MULTIPLIERS
    level2_multipliers: tuple = DEFAULT_MULTIPLIERS
    split_fraction: float = 0.5
    ridge: float = 1e-8

    def __post_init__(self):
        for name in ("level1_multipliers", "level2_multipliers"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals or any(not (v > 0 and math.isfinite(v)) for v in vals):
                raise ValueError(f"{name} must be a nonempty list of positive numbers")
            object.__setattr__(self, name, vals)
        if not 0 < self.split_fraction < 1:
            raise ValueError(f"split_fraction must lie in (0, 1), got {self.split_fraction}")
        if not self.ridge > 0:
            raise ValueError("ridge must be positive")


@dataclass
class TuningReport:
    table: list
    best: dict
    split_seed: int
    medians: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def basis_seed(seed: int, side: str = "x") -> int:
    """Seed of the level-1 basis; shared by tuning and the final test."""
    return derive_seed(seed, "basis", side)


def split(sample, fraction: float, seed: int):
    """Uniform disjoint split at the set (or pair) level into ``(train, test)``.

    The train part gets ``floor(fraction * N)`` sets. Weights are renormalized
    within each part.
    """
    n = len(sample)
    n_train = int(math.floor(fraction * n))
    if n_train < 2 or n - n_train < 2:
        raise DataError(
            f"cannot split {n} sets with fraction {fraction}: "
            f"parts of size {n_train} and {n - n_train} (need >= 2 each)"
        )
    order = make_rng(seed, "split").permutation(n)
    train_idx = np.sort(order[:n_train])
    test_idx = np.sort(order[n_train:])
    return sample.subset(train_idx), sample.subset(test_idx)


def mmd_variance_h1(K_xx, K_yy, K_xy) -> float:
    """Second-order variance estimate of the MMD V-statistic under H1.

    ``H_ij = K_xx + K_yy - K_xy - K_xy^T``;
    ``4/N^3 sum_i (sum_j H_ij)^2 - 4/N^4 (sum_ij H_ij)^2``, floored at 0.
    """
    K_xx, K_yy, K_xy = (np.asarray(a, dtype=float) for a in (K_xx, K_yy, K_xy))
    n = K_xx.shape[0]
    if not (K_xx.shape == K_yy.shape == K_xy.shape == (n, n)):
        raise ValueError(f"blocks must be square and equal-sized, got {K_xx.shape}, {K_yy.shape}, {K_xy.shape}")
    H = K_xx + K_yy - K_xy - K_xy.T
    row = H.sum(axis=1)
    var = 4.0 / n**3 * np.dot(row, row) - 4.0 / n**4 * row.sum() ** 2
    return max(float(var), 0.0)


def _pick(rows: list, keys: tuple) -> dict:
    """Argmax of ``criterion``; ties go to the cell nearest the medians, then
    to the lexicographically smaller multipliers."""
    crit = np.array([r["criterion"] for r in rows])
    top = crit.max()
    tied = [r for r, c in zip(rows, crit) if c >= top - _TIE_RTOL * abs(top)]

    def rank(r):
        mults = tuple(r[k] for k in keys)
        return (sum(abs(math.log(v)) for v in mults), mults)

    return min(tied, key=rank)


def mmd2_unbiased(K: np.ndarray, n_x: int) -> float:
    """Uniform-weight MMD^2 U-statistic from a pooled ``[X; Y]`` Gram."""
    Kxx, Kyy, Kxy = K[:n_x, :n_x], K[n_x:, n_x:], K[:n_x, n_x:]
    nx, ny = Kxx.shape[0], Kyy.shape[0]
    xx = (Kxx.sum() - np.trace(Kxx)) / (nx * (nx - 1))
    yy = (Kyy.sum() - np.trace(Kyy)) / (ny * (ny - 1))
    return float(xx + yy - 2.0 * Kxy.mean())


def _repaired(Lw, perms):
    return Lw[perms[:, :, None], perms[:, None, :]]


def _uniform(w):
    return np.full(len(w), 1.0 / len(w))


def select_params_two_sample(train_x: Sample, train_y: Sample, grid: ParamGrid, m: int, seed: int,
                             max_pairs: int = 10**6, weighting: str = "uniform",
                             kind: str = "gaussian", unbiased: bool = True) -> TuningReport:
    """Grid search over (level-1, level-2) bandwidths for the RMMD test.

    With ``unbiased=True`` the criterion numerator drops the diagonal
    ``K(mu_i, mu_i)`` terms. The V-statistic numerator carries a positive bias
    that grows as the bandwidths shrink and otherwise steers the search to the
    narrowest cell regardless of the data.
    """
    level1_med = median_heuristic_level1([train_x, train_y], max_pairs, derive_seed(seed, "median1"))
    bseed = basis_seed(seed)

    nx, ny = len(train_x), len(train_y)
    n = min(nx, ny)
    rng = make_rng(seed, "variance-subsample")
    # the variance estimator needs equal sizes: subsample the larger side
    ix = np.sort(rng.choice(nx, n, replace=False)) if nx > n else np.arange(nx)
    iy = np.sort(rng.choice(ny, n, replace=False)) if ny > n else np.arange(ny)

    rows = []
    medians2 = {}
    for a in grid.level1_multipliers:
        s1 = a * level1_med
        basis = sample_basis(m, train_x.dim, s1, bseed)
        ex, ey = embed_sample(train_x, basis), embed_sample(train_y, basis)
        level2_med = median_heuristic_level2(ex, ey)
        medians2[a] = level2_med
        if weighting == "uniform":
            wx, wy = _uniform(ex.weights), _uniform(ey.weights)
        else:
            wx, wy = ex.weights, ey.weights
        z = np.concatenate([wx, -wy])
        Zrows = np.vstack([ex.embeddings, ey.embeddings])
        d2 = sq_dists(Zrows, Zrows)
        np.fill_diagonal(d2, 0.0)
        for b in grid.level2_multipliers:
            s2 = b * level2_med
            K = np.exp(-d2 / (2.0 * s2)) if kind == "gaussian" else kernel_matrix(Zrows, Zrows, s2, kind)
            stat = float(rmmd2_pooled(K, z)[0])
            proxy = mmd2_unbiased(K, nx) if unbiased else stat
            Kxx = K[np.ix_(ix, ix)]
            Kyy = K[np.ix_(nx + iy, nx + iy)]
            Kxy = K[np.ix_(ix, nx + iy)]
            var = mmd_variance_h1(Kxx, Kyy, Kxy)
            rows.append({
                "level1_multiplier": a, "level2_multiplier": b,
                "level1": s1, "level2": s2,
                "statistic": stat, "unbiased": proxy if unbiased else None, "std": math.sqrt(var),
                "criterion": proxy / (math.sqrt(var) + grid.ridge),
            })
    best = _pick(rows, ("level1_multiplier", "level2_multiplier"))
    return TuningReport(rows, best, seed, {"level1": level1_med, "level2": medians2})


def select_params_independence(train: PairedSample, grid: ParamGrid, m: int, B_inner: int, seed: int,
                               max_pairs: int = 10**6, weighting: str = "uniform",
                               kind: str = "gaussian", centred: bool = True) -> TuningReport:
    """Grid search over (level-1, K, L) bandwidths for the RHSIC test.

    The level-1 multiplier is shared by both sides and applied to each side's
    own median (the sides may differ in dimension). The criterion is
    ``(RHSIC - mean) / (std + ridge)`` over ``B_inner`` re-pairings, the same
    re-pairings for every cell. Centring removes the positive bias that
    otherwise favours the narrowest bandwidths; ``centred=False`` drops it.
    """
    if B_inner < 20:
        raise ValueError(f"B_inner must be at least 20, got {B_inner}")
    xs, ys = train.x, train.y
    med_x = median_heuristic_level1(xs, max_pairs, derive_seed(seed, "median1", "x"))
    med_y = median_heuristic_level1(ys, max_pairs, derive_seed(seed, "median1", "y"))
    bx, by = basis_seed(seed, "x"), basis_seed(seed, "y")
    n = len(train)
    perms = np.vstack([np.arange(n), permutation_matrix(n, B_inner, seed, "inner")])
    wx = _uniform(train.weights_x) if weighting == "uniform" else train.weights_x
    wy = _uniform(train.weights_y) if weighting == "uniform" else train.weights_y

    rows = []
    medians2 = {}
    for a in grid.level1_multipliers:
        ex = embed_sample(xs, sample_basis(m, xs.dim, a * med_x, bx))
        ey = embed_sample(ys, sample_basis(m, ys.dim, a * med_y, by))
        mk, ml = median_heuristic_level2(ex), median_heuristic_level2(ey)
        medians2[a] = {"K": mk, "L": ml}
        As = [weighted_centered(kernel_matrix(ex.embeddings, ex.embeddings, b * mk, kind), wx)
              for b in grid.level2_multipliers]
        # permuted, weighted L grams for every L bandwidth: (n_L, B+1, n, n)
        Lp = np.stack([
            _repaired(kernel_matrix(ey.embeddings, ey.embeddings, c * ml, kind) * np.outer(wy, wy), perms)
            for c in grid.level2_multipliers
        ])
        for bi, b in enumerate(grid.level2_multipliers):
            stats = n * n * np.einsum("ij,lbij->lb", As[bi], Lp)
            for ci, c in enumerate(grid.level2_multipliers):
                obs, null = stats[ci, 0], stats[ci, 1:]
                sd = float(np.std(null))
                centre = float(np.mean(null)) if centred else 0.0
                rows.append({
                    "level1_multiplier": a, "K_multiplier": b, "L_multiplier": c,
                    "level1_x": a * med_x, "level1_y": a * med_y,
                    "sigma_K_sq": b * mk, "sigma_L_sq": c * ml,
                    "statistic": float(obs), "null_mean": float(np.mean(null)), "std": sd,
                    "criterion": (float(obs) - centre) / (sd + grid.ridge),
                })
    best = _pick(rows, ("level1_multiplier", "K_multiplier", "L_multiplier"))
    return TuningReport(rows, best, seed, {"level1_x": med_x, "level1_y": med_y, "level2": medians2})
