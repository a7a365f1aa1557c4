"""Random Fourier features for the level-1 Gaussian kernel and set embeddings."""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._seeding import make_rng
from .data import DataError, ObservationSet, Sample, WEIGHT_TOL


class DegenerateScaleError(ValueError):
    """A median-heuristic bandwidth came out as zero (all inputs identical)."""


@dataclass(frozen=True)
class RffBasis:
    """Frequencies ``omegas`` (m x d), phases (m,), and the level-1 bandwidth.

    ``phi(x)_j = sqrt(2/m) cos(<omega_j, x> + b_j)`` approximates
    ``k(x, y) = exp(-|x - y|^2 / (2 * lengthscale_sq))``.
    """

    omegas: np.ndarray
    phases: np.ndarray
    lengthscale_sq: float
    seed: int

    @property
    def m(self) -> int:
        return self.omegas.shape[0]

    @property
    def d(self) -> int:
        return self.omegas.shape[1]

    @property
    def fingerprint(self) -> str:
        return basis_fingerprint(self.seed, self.m, self.d, self.lengthscale_sq)


def basis_fingerprint(seed: int, m: int, d: int, lengthscale_sq: float) -> str:
    """64-bit hex hash of the quantities that determine a basis."""
    payload = struct.pack("<QQQd", int(seed) & (2**64 - 1), m, d, float(lengthscale_sq))
    return hashlib.blake2b(payload, digest_size=8).hexdigest()


def sample_basis(m: int, d: int, lengthscale_sq: float, seed: int) -> RffBasis:
    """Draw ``omega ~ N(0, I / lengthscale_sq)`` and ``b ~ U[0, 2pi)``.

    The standard-normal directions depend only on ``(seed, m, d)``, so bases
    with the same seed but different bandwidths are rescalings of each other.
    """
    if m < 1 or d < 1:
        raise ValueError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    if not lengthscale_sq > 0:
        raise ValueError(f"lengthscale_sq must be positive, got {lengthscale_sq}")
    rng = make_rng(seed, "rff", m, d)
    z = rng.standard_normal((m, d))
    b = rng.uniform(0.0, 2 * np.pi, size=m)
    omegas = z / np.sqrt(lengthscale_sq)
    omegas.setflags(write=False)
    b.setflags(write=False)
    return RffBasis(omegas, b, float(lengthscale_sq), int(seed))


def feature_map(x, basis: RffBasis) -> np.ndarray:
    """Feature vector(s) for a point ``(d,)`` or a batch ``(n, d)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != basis.d:
        raise DataError(f"point dimension {x.shape[-1]} does not match basis dimension {basis.d}")
    return np.sqrt(2.0 / basis.m) * np.cos(x @ basis.omegas.T + basis.phases)


def mean_embed(obs: ObservationSet, basis: RffBasis) -> np.ndarray:
    pts = obs.points if isinstance(obs, ObservationSet) else np.asarray(obs, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise DataError("cannot embed an empty set")
    return feature_map(pts, basis).mean(axis=0)


@dataclass(frozen=True)
class EmbeddedSample:
    """Row ``i`` is the mean embedding of set ``i``; weights ride along."""

    embeddings: np.ndarray
    weights: np.ndarray
    basis_fingerprint: str

    def __post_init__(self):
        e = np.asarray(self.embeddings, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if e.ndim != 2 or e.shape[0] < 1:
            raise DataError("embeddings must be a non-empty 2-D array")
        if w.shape != (e.shape[0],):
            raise DataError(f"expected {e.shape[0]} weights, got shape {w.shape}")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise DataError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "embeddings", e)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.embeddings.shape[0]

    def subset(self, idx) -> "EmbeddedSample":
        idx = np.asarray(idx)
        w = self.weights[idx]
        return EmbeddedSample(self.embeddings[idx], w / w.sum(), self.basis_fingerprint)

    def with_uniform_weights(self) -> "EmbeddedSample":
        n = len(self)
        return EmbeddedSample(self.embeddings, np.full(n, 1.0 / n), self.basis_fingerprint)

    def to_json(self) -> str:
        return json.dumps({
            "basis_fingerprint": self.basis_fingerprint,
            "embeddings": self.embeddings.tolist(),
            "weights": self.weights.tolist(),
        })

    @classmethod
    def from_json(cls, text: str, expect_fingerprint: str | None = None) -> "EmbeddedSample":
        rec = json.loads(text)
        if expect_fingerprint is not None and rec["basis_fingerprint"] != expect_fingerprint:
            raise DataError(
                f"cached embedding was built with basis {rec['basis_fingerprint']}, "
                f"expected {expect_fingerprint}"
            )
        return cls(np.array(rec["embeddings"], dtype=float), np.array(rec["weights"]), rec["basis_fingerprint"])

    def save(self, path) -> None:
        np.savez(path, embeddings=self.embeddings, weights=self.weights,
                 basis_fingerprint=np.array(self.basis_fingerprint))

    @classmethod
    def load(cls, path, expect_fingerprint: str | None = None) -> "EmbeddedSample":
        with np.load(path) as z:
            fp = str(z["basis_fingerprint"])
            if expect_fingerprint is not None and fp != expect_fingerprint:
                raise DataError(f"cached embedding was built with basis {fp}, expected {expect_fingerprint}")
            return cls(z["embeddings"], z["weights"], fp)


def embed_sample(sample: Sample, basis: RffBasis) -> EmbeddedSample:
    if sample is None or len(sample.sets) == 0:
        raise DataError("cannot embed an empty sample")
    if sample.dim != basis.d:
        raise DataError(f"sample dimension {sample.dim} does not match basis dimension {basis.d}")
    # one matmul over the pooled points, then segment means
    sizes = sample.sizes
    feats = feature_map(sample.pooled_points(), basis)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    emb = np.add.reduceat(feats, starts, axis=0) / sizes[:, None]
    return EmbeddedSample(emb, sample.weights, basis.fingerprint)


def _pair_sq_dists(points: np.ndarray, max_pairs: int, rng) -> np.ndarray:
    n = points.shape[0]
    n_pairs = n * (n - 1) // 2
    if n_pairs <= max_pairs:
        i, j = np.triu_indices(n, k=1)
    else:
        i = rng.integers(0, n, size=max_pairs)
        j = rng.integers(0, n - 1, size=max_pairs)
        j = j + (j >= i)  # uniform over j != i
    diff = points[i] - points[j]
    return np.einsum("ij,ij->i", diff, diff)


def median_sq_distance(points: np.ndarray, max_pairs: int = 10**6, seed: int = 0) -> float:
    """Median squared Euclidean distance over (possibly subsampled) distinct pairs."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 2:
        raise DataError("median heuristic needs at least 2 points")
    return float(np.median(_pair_sq_dists(points, max_pairs, make_rng(seed, "median"))))


def median_heuristic_level1(sample, max_pairs: int = 10**6, seed: int = 0) -> float:
    """Level-1 bandwidth: half the median squared distance between pooled points.

    ``sample`` may be a :class:`Sample` or a sequence of samples (pooled).
    """
    samples = sample if isinstance(sample, (list, tuple)) else [sample]
    pts = np.concatenate([s.pooled_points() for s in samples], axis=0)
    med = median_sq_distance(pts, max_pairs, seed)
    if med <= 0:
        raise DegenerateScaleError("level-1 median heuristic is zero: pooled points are (mostly) identical")
    return med / 2.0
