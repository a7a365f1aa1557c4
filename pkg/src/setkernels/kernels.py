"""Second-level kernels on embedding vectors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataError
from .rff import DegenerateScaleError, EmbeddedSample

SECOND_LEVEL_KERNELS = ("gaussian", "linear")


def sq_dists(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    uu = np.einsum("ij,ij->i", U, U)
    vv = np.einsum("ij,ij->i", V, V)
    d = uu[:, None] + vv[None, :] - 2.0 * (U @ V.T)
    return np.maximum(d, 0.0)


def gaussian_K(u, v, lengthscale_sq: float) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {v.shape}")
    if not lengthscale_sq > 0:
        raise ValueError(f"bandwidth must be positive, got {lengthscale_sq}")
    diff = u - v
    return float(np.exp(-(diff @ diff) / (2.0 * lengthscale_sq)))


def kernel_matrix(U: np.ndarray, V: np.ndarray, lengthscale_sq: float, kind: str = "gaussian") -> np.ndarray:
    """Gram values between the rows of ``U`` and ``V``.

    ``kind="linear"`` gives plain inner products and ignores the bandwidth.
    """
    if kind == "linear":
        return U @ V.T
    if kind != "gaussian":
        raise ValueError(f"unknown second-level kernel {kind!r}; choose from {SECOND_LEVEL_KERNELS}")
    if not lengthscale_sq > 0:
        raise ValueError(f"bandwidth must be positive, got {lengthscale_sq}")
    if U is V:
        # exact zeros on the diagonal; the expansion can leave ~1e-16 residue
        K = np.exp(-sq_dists(U, U) / (2.0 * lengthscale_sq))
        np.fill_diagonal(K, 1.0)
        return K
    return np.exp(-sq_dists(U, V) / (2.0 * lengthscale_sq))


@dataclass(frozen=True)
class GramMatrix:
    values: np.ndarray
    row_weights: np.ndarray
    col_weights: np.ndarray
    lengthscale_sq: float


def check_comparable(A: EmbeddedSample, B: EmbeddedSample) -> None:
    if A.basis_fingerprint != B.basis_fingerprint:
        raise DataError(
            f"embeddings come from different bases ({A.basis_fingerprint} vs {B.basis_fingerprint})"
        )


def gram(A: EmbeddedSample, B: EmbeddedSample, lengthscale_sq: float, kind: str = "gaussian") -> GramMatrix:
    check_comparable(A, B)
    U = A.embeddings
    V = U if B is A else B.embeddings
    return GramMatrix(kernel_matrix(U, V, lengthscale_sq, kind), A.weights, B.weights, float(lengthscale_sq))


def median_heuristic_level2(*embedded) -> float:
    """Half the median squared distance between embedding rows pooled over inputs."""
    rows = np.concatenate([e.embeddings if isinstance(e, EmbeddedSample) else np.asarray(e) for e in embedded])
    if rows.shape[0] < 2:
        raise DataError("level-2 median heuristic needs at least 2 embeddings")
    i, j = np.triu_indices(rows.shape[0], k=1)
    diff = rows[i] - rows[j]
    med = float(np.median(np.einsum("ij,ij->i", diff, diff)))
    if med <= 0:
        raise DegenerateScaleError("level-2 median heuristic is zero: embeddings are identical")
    return med / 2.0
