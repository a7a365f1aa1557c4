"""Permutation nulls, add-one p-values and test decisions.

Permutations act on precomputed Gram matrices: for the two-sample null the
pooled ``(N+M) x (N+M)`` Gram is computed once and each replicate re-labels
its rows; for the independence null the y-side Gram is re-indexed. Replicate
``b`` uses row ``b`` of a permutation matrix derived from the seed, so the
null vector does not depend on evaluation order or chunking.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._seeding import permutation_matrix
from .kernels import kernel_matrix
from .rff import EmbeddedSample
from .statistics import centering, pooled_gram, rmmd2_pooled

SCHEMA_VERSION = 1
_CHUNK = 64


@dataclass
class TestResult:
    statistic: float
    p_value: float
    reject: bool
    alpha: float
    n_permutations: int
    selected_params: dict = field(default_factory=dict)
    seed: int = 0
    null_stats: np.ndarray | None = None
    audit: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "statistic": float(self.statistic),
            "p_value": float(self.p_value),
            "reject": bool(self.reject),
            "alpha": float(self.alpha),
            "n_permutations": int(self.n_permutations),
            "selected_params": {k: _plain(v) for k, v in self.selected_params.items()},
            "seed": int(self.seed),
        }
        if self.audit:
            out["audit"] = {k: _plain(v) for k, v in self.audit.items()}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def _plain(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def p_value(observed: float, nulls) -> float:
    """``(1 + #{null >= observed}) / (B + 1)``; ties count against rejection."""
    nulls = np.asarray(nulls, dtype=float)
    if nulls.size == 0:
        raise ValueError("p_value needs at least one null statistic")
    return float((1 + np.count_nonzero(nulls >= observed)) / (nulls.size + 1))


def decide(observed: float, nulls, alpha: float, **kw) -> TestResult:
    p = p_value(observed, nulls)
    return TestResult(float(observed), p, p <= alpha, alpha, len(nulls), **kw)


# -- two-sample -------------------------------------------------------------


def _two_sample_stats(K, masses, n_x, perms):
    out = np.empty(perms.shape[0])
    for lo in range(0, perms.shape[0], _CHUNK):
        P = perms[lo:lo + _CHUNK]
        M = masses[P]
        gx = M[:, :n_x] / M[:, :n_x].sum(axis=1, keepdims=True)
        gy = M[:, n_x:] / M[:, n_x:].sum(axis=1, keepdims=True)
        Z = np.empty_like(M)
        rows = np.arange(P.shape[0])[:, None]
        Z[rows, P[:, :n_x]] = gx
        Z[rows, P[:, n_x:]] = -gy
        out[lo:lo + _CHUNK] = rmmd2_pooled(K, Z)
    return out


def two_sample_null_from_gram(K: np.ndarray, masses: np.ndarray, n_x: int, n_perm: int,
                              seed: int) -> np.ndarray:
    """Null RMMD^2 values from a pooled Gram and per-row masses.

    Each replicate sends the first ``n_x`` permuted rows to group X and the rest
    to Y, renormalizing the masses within each group.
    """
    if n_perm < 1:
        raise ValueError(f"need at least one permutation, got {n_perm}")
    perms = permutation_matrix(K.shape[0], n_perm, seed, "two-sample")
    return _two_sample_stats(K, masses, n_x, perms)


def pooled_masses(embX: EmbeddedSample, embY: EmbeddedSample) -> np.ndarray:
    # mean-one masses: renormalizing them within the original split recovers
    # the observed weights exactly
    return np.concatenate([embX.weights * len(embX), embY.weights * len(embY)])


def two_sample_null(embX: EmbeddedSample, embY: EmbeddedSample, lengthscale_sq: float,
                    n_perm: int, seed: int, kind: str = "gaussian") -> np.ndarray:
    K = pooled_gram(embX, embY, lengthscale_sq, kind)
    return two_sample_null_from_gram(K, pooled_masses(embX, embY), len(embX), n_perm, seed)


def two_sample_permutation_test(embX: EmbeddedSample, embY: EmbeddedSample, lengthscale_sq: float,
                                n_perm: int, alpha: float, seed: int, kind: str = "gaussian",
                                keep_nulls: bool = False) -> TestResult:
    if n_perm < 1:
        raise ValueError(f"need at least one permutation, got {n_perm}")
    K = pooled_gram(embX, embY, lengthscale_sq, kind)
    masses = pooled_masses(embX, embY)
    n = K.shape[0]
    # observed statistic = identity relabelling, evaluated in the same batch
    perms = np.vstack([np.arange(n), permutation_matrix(n, n_perm, seed, "two-sample")])
    stats = _two_sample_stats(K, masses, len(embX), perms)
    res = decide(stats[0], stats[1:], alpha, seed=seed)
    if keep_nulls:
        res.null_stats = stats[1:]
    return res


# -- independence -----------------------------------------------------------


def weighted_centered(K: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``H (K * w w^T) H``."""
    H = centering(K.shape[0])
    return H @ (K * np.outer(w, w)) @ H


def _independence_stats(A, Lw, perms):
    n = A.shape[0]
    out = np.empty(perms.shape[0])
    for lo in range(0, perms.shape[0], _CHUNK):
        P = perms[lo:lo + _CHUNK]
        Lp = Lw[P[:, :, None], P[:, None, :]]
        out[lo:lo + _CHUNK] = n * n * np.einsum("ij,bij->b", A, Lp)
    return out


def independence_null_from_grams(K: np.ndarray, L: np.ndarray, wx: np.ndarray, wy: np.ndarray,
                                 n_perm: int, seed: int, perms: np.ndarray | None = None) -> np.ndarray:
    """Null RHSIC values obtained by re-pairing the y side (rows and weights together)."""
    if n_perm < 1:
        raise ValueError(f"need at least one permutation, got {n_perm}")
    n = K.shape[0]
    if L.shape[0] != n:
        raise ValueError(f"paired sides differ in size: {n} vs {L.shape[0]}")
    if perms is None:
        perms = permutation_matrix(n, n_perm, seed, "independence")
    return _independence_stats(weighted_centered(K, wx), L * np.outer(wy, wy), perms)


def independence_null(embX: EmbeddedSample, embY: EmbeddedSample, sigma_K_sq: float, sigma_L_sq: float,
                      n_perm: int, seed: int, kind: str = "gaussian") -> np.ndarray:
    K = kernel_matrix(embX.embeddings, embX.embeddings, sigma_K_sq, kind)
    L = kernel_matrix(embY.embeddings, embY.embeddings, sigma_L_sq, kind)
    return independence_null_from_grams(K, L, embX.weights, embY.weights, n_perm, seed)


def independence_permutation_test(embX: EmbeddedSample, embY: EmbeddedSample, sigma_K_sq: float,
                                  sigma_L_sq: float, n_perm: int, alpha: float, seed: int,
                                  kind: str = "gaussian", keep_nulls: bool = False) -> TestResult:
    if len(embX) != len(embY):
        raise ValueError(f"paired sides differ in size: {len(embX)} vs {len(embY)}")
    K = kernel_matrix(embX.embeddings, embX.embeddings, sigma_K_sq, kind)
    L = kernel_matrix(embY.embeddings, embY.embeddings, sigma_L_sq, kind)
    if n_perm < 1:
        raise ValueError(f"need at least one permutation, got {n_perm}")
    n = K.shape[0]
    perms = np.vstack([np.arange(n), permutation_matrix(n, n_perm, seed, "independence")])
    stats = _independence_stats(weighted_centered(K, embX.weights), L * np.outer(embY.weights, embY.weights), perms)
    res = decide(stats[0], stats[1:], alpha, seed=seed)
    if keep_nulls:
        res.null_stats = stats[1:]
    return res
