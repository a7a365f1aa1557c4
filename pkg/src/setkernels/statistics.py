"""RMMD^2 and RHSIC on weighted set embeddings, plus loop-based oracles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataError, WEIGHT_TOL
from .kernels import check_comparable, kernel_matrix
from .rff import EmbeddedSample

CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class StatisticValue:
    value: float
    kind: str
    n_x: int
    n_y: int

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise FloatingPointError(f"{self.kind} statistic is not finite: {self.value}")

    @property
    def reported(self) -> float:
        """Value for display: rounding noise around zero is shown as 0."""
        return 0.0 if abs(self.value) < CLAMP_TOL else self.value

    def __float__(self) -> float:
        return float(self.value)


def _check_normalized(w: np.ndarray, what: str) -> None:
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise DataError(f"{what} weights sum to {w.sum()!r}, not 1")


def pooled_gram(embX: EmbeddedSample, embY: EmbeddedSample, lengthscale_sq: float,
                kind: str = "gaussian") -> np.ndarray:
    """``(N+M) x (N+M)`` Gram over stacked rows ``[X; Y]``."""
    check_comparable(embX, embY)
    Z = np.vstack([embX.embeddings, embY.embeddings])
    return kernel_matrix(Z, Z, lengthscale_sq, kind)


def rmmd2_pooled(K: np.ndarray, signed_weights: np.ndarray) -> np.ndarray:
    """``z^T K z`` for each row ``z`` of ``signed_weights`` (``[w, -v]`` layout)."""
    Z = np.atleast_2d(signed_weights)
    return np.einsum("bi,bi->b", Z @ K, Z)


def rmmd2(embX: EmbeddedSample, embY: EmbeddedSample, lengthscale_sq: float,
          kind: str = "gaussian") -> StatisticValue:
    """Weighted squared MMD between the meta-distributions behind two samples.

    ``w^T K_xx w + v^T K_yy v - 2 w^T K_xy v`` with the second-level kernel
    evaluated on the mean embeddings.
    """
    _check_normalized(embX.weights, "x")
    _check_normalized(embY.weights, "y")
    K = pooled_gram(embX, embY, lengthscale_sq, kind)
    z = np.concatenate([embX.weights, -embY.weights])
    return StatisticValue(float(rmmd2_pooled(K, z)[0]), "rmmd2", len(embX), len(embY))


def centering(n: int) -> np.ndarray:
    return np.eye(n) - np.full((n, n), 1.0 / n)


def rhsic_from_grams(K: np.ndarray, L: np.ndarray, wx: np.ndarray, wy: np.ndarray) -> float:
    """``N^2 Tr(Kw H Lw H)`` with ``Kw_ij = wx_i wx_j K_ij`` and likewise for L."""
    n = K.shape[0]
    Kw = K * np.outer(wx, wx)
    Lw = L * np.outer(wy, wy)
    H = centering(n)
    return float(n * n * np.sum((H @ Kw @ H) * Lw))


def rhsic(embX: EmbeddedSample, embY: EmbeddedSample, sigma_K_sq: float, sigma_L_sq: float,
          kind: str = "gaussian") -> StatisticValue:
    """Weighted HSIC between paired set embeddings.

    With uniform weights this is ``Tr(K H L H) / N^2``. ``embX`` and ``embY``
    may come from different bases (the two sides can live in different spaces).
    """
    if len(embX) != len(embY):
        raise DataError(f"paired sides differ in size: {len(embX)} vs {len(embY)}")
    _check_normalized(embX.weights, "x")
    _check_normalized(embY.weights, "y")
    K = kernel_matrix(embX.embeddings, embX.embeddings, sigma_K_sq, kind)
    L = kernel_matrix(embY.embeddings, embY.embeddings, sigma_L_sq, kind)
    return StatisticValue(rhsic_from_grams(K, L, embX.weights, embY.weights), "rhsic", len(embX), len(embY))


# -- oracles --------------------------------------------------------------
# Deliberately written as explicit loops; they exist to check the matrix code.


def rmmd2_loop_oracle(X: np.ndarray, Y: np.ndarray, wx, wy, lengthscale_sq: float) -> float:
    def k(a, b):
        s = 0.0
        for p in range(len(a)):
            s += (a[p] - b[p]) ** 2
        return np.exp(-s / (2.0 * lengthscale_sq))

    xx = yy = xy = 0.0
    for i in range(len(X)):
        for j in range(len(X)):
            xx += wx[i] * wx[j] * k(X[i], X[j])
    for i in range(len(Y)):
        for j in range(len(Y)):
            yy += wy[i] * wy[j] * k(Y[i], Y[j])
    for i in range(len(X)):
        for j in range(len(Y)):
            xy += wx[i] * wy[j] * k(X[i], Y[j])
    return xx + yy - 2.0 * xy


def vstat_hsic_oracle(K, L) -> float:
    """HSIC as the sum of V-statistics, evaluated by explicit loops."""
    K = np.asarray(K, dtype=float)
    L = np.asarray(L, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape != L.shape:
        raise ValueError(f"need equal square matrices, got {K.shape} and {L.shape}")
    n = K.shape[0]
    t1 = 0.0
    for i in range(n):
        for j in range(n):
            t1 += K[i, j] * L[i, j]
    sk = sl = 0.0
    for i in range(n):
        for j in range(n):
            sk += K[i, j]
            sl += L[i, j]
    t2 = sk * sl  # sum_{ijqr} K_ij L_qr factorizes
    t3 = 0.0
    for i in range(n):
        for j in range(n):
            for q in range(n):
                t3 += K[i, j] * L[i, q]
    return t1 / n**2 + t2 / n**4 - 2.0 * t3 / n**3


def composed_mmd_oracle(pointsX, pointsY, level1_sq: float, level2_sq: float) -> float:
    """Exact MMD^2 V-statistic for singleton sets with the infinite-feature embedding.

    For singletons ``|mu_x - mu_y|^2 = 2 - 2 k(x, y)``, so the composed kernel is
    ``exp(-(2 - 2 k(x, y)) / (2 level2_sq))``.
    """
    X = [np.atleast_1d(np.asarray(p, dtype=float)) for p in pointsX]
    Y = [np.atleast_1d(np.asarray(p, dtype=float)) for p in pointsY]
    for p in X + Y:
        if p.ndim != 1:
            raise ValueError("composed_mmd_oracle takes one point per set")

    def kc(a, b):
        k1 = np.exp(-np.sum((a - b) ** 2) / (2.0 * level1_sq))
        return np.exp(-(2.0 - 2.0 * k1) / (2.0 * level2_sq))

    n, m = len(X), len(Y)
    xx = sum(kc(a, b) for a in X for b in X) / n**2
    yy = sum(kc(a, b) for a in Y for b in Y) / m**2
    xy = sum(kc(a, b) for a in X for b in Y) / (n * m)
    return float(xx + yy - 2.0 * xy)
