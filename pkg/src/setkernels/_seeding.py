"""Deterministic seed derivation.

Every random stream in the package is keyed by a master seed plus a tuple of
labels (strings, ints, floats). Streams therefore do not depend on call
order, which keeps parallel and sequential runs bit-identical.
"""
from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, *keys) -> int:
    """Hash ``(seed, *keys)`` to a 64-bit unsigned integer."""
    h = hashlib.blake2b(digest_size=8)
    h.update(repr((int(seed),) + tuple(_canon(k) for k in keys)).encode())
    return int.from_bytes(h.digest(), "little")


def make_rng(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))


def permutation_matrix(n: int, n_perm: int, seed: int, *keys) -> np.ndarray:
    """``(n_perm, n)`` array whose row ``b`` is a uniform permutation of ``range(n)``.

    Row ``b`` is the argsort of the uniforms at stream positions
    ``[b*n, (b+1)*n)``, so it depends only on ``(seed, keys, b, n)`` and not
    on ``n_perm``.
    """
    rng = make_rng(seed, "perm", n, *keys)
    return np.argsort(rng.random((n_perm, n)), axis=1, kind="stable")


def _canon(k):
    if isinstance(k, (float, np.floating)):
        return float(k).hex()
    if isinstance(k, (np.integer,)):
        return int(k)
    return k
