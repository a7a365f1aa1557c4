"""Synthetic set-valued time series for power and calibration experiments.

Two-sample design: set ``i`` observes ``x = eta * sin(2 pi t) + eps`` at
``t ~ U[0, 1]`` with ``eps ~ N(0, sigma_i + sigma)`` (a variance), where the
per-set excess variance ``sigma_i`` is inverse-gamma distributed.

Independence design: pair ``i`` has latent mean curve
``f_i(t) = beta_i sin(2 pi t) + alpha_i t``; the x-set observes ``f_i`` and
the y-set observes ``g(f_i)``, both with ``N(0, sigma^2)`` noise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._seeding import make_rng
from .data import ObservationSet, PairedSample, Sample

LINKS = {
    "square": np.square,
    "cube": lambda v: v**3,
    "cos": np.cos,
    "negexp": lambda v: np.exp(-v),
}


def invgamma_sample(shape: float, rng: np.random.Generator, size=None):
    """Draw from ``f(x; mu) = x^(-mu-1) exp(-1/x) / Gamma(mu)`` as ``1 / Gamma(mu, 1)``."""
    if not shape > 0:
        raise ValueError(f"inverse-gamma shape must be positive, got {shape}")
    return 1.0 / rng.gamma(shape, 1.0, size=size)


def _check_range(rng_range, n):
    lo, hi = rng_range
    if int(lo) != lo or int(hi) != hi or lo < 1 or hi < lo:
        raise ValueError(f"set_size_range must be integers with 1 <= low <= high, got {rng_range}")
    if n < 1:
        raise ValueError(f"N must be at least 1, got {n}")


def _set_sizes(rng, n, size_range, size_mix):
    if size_mix is None:
        return rng.integers(size_range[0], size_range[1] + 1, size=n)
    # exact proportions, randomly assigned to sets
    sizes = []
    counts = np.floor(np.array([f for _, f in size_mix]) * n).astype(int)
    counts[-1] = n - counts[:-1].sum()
    for (size, _), c in zip(size_mix, counts):
        sizes += [int(size)] * int(c)
    return rng.permutation(np.array(sizes))


@dataclass(frozen=True)
class TwoSampleDesign:
    eta: float = 1.0
    sigma: float = 0.1
    invgamma_shape: float = 3.0
    N: int = 100
    set_size_range: tuple = (5, 50)
    dims: int = 1
    seed: int = 0
    baseline_eta: float = 1.0
    size_mix: tuple | None = None
    id_prefix: str = "set"

    def __post_init__(self):
        _check_range(self.set_size_range, self.N)
        if self.sigma < 0:
            raise ValueError("baseline variance sigma must be nonnegative")
        if self.dims < 1:
            raise ValueError("dims must be >= 1")
        if not self.invgamma_shape > 0:
            raise ValueError("invgamma_shape must be positive")
        if self.size_mix is not None:
            fr = [f for _, f in self.size_mix]
            if any(s < 1 for s, _ in self.size_mix) or abs(sum(fr) - 1) > 1e-9 or min(fr) < 0:
                raise ValueError("size_mix must be (size >= 1, fraction) pairs with fractions summing to 1")


def gen_two_sample(design: TwoSampleDesign) -> Sample:
    """One population of ``N`` irregular series with points ``(t, x_1, ..., x_dims)``.

    Only the first channel uses amplitude ``eta``; extra channels use
    ``baseline_eta`` so that populations differ in the first channel alone.
    """
    rng = make_rng(design.seed, "two-sample")
    sizes = _set_sizes(rng, design.N, design.set_size_range, design.size_mix)
    amps = np.array([design.eta] + [design.baseline_eta] * (design.dims - 1))
    sets = []
    for i, n_i in enumerate(sizes):
        sigma_i = invgamma_sample(design.invgamma_shape, rng)
        t = rng.uniform(0.0, 1.0, size=n_i)
        sd = np.sqrt(sigma_i + design.sigma)
        x = amps[None, :] * np.sin(2 * np.pi * t)[:, None] + sd * rng.standard_normal((n_i, design.dims))
        sets.append(ObservationSet(f"{design.id_prefix}{i}", np.column_stack([t, x])))
    return Sample(tuple(sets))


@dataclass(frozen=True)
class IndependenceDesign:
    sigma: float = 0.5
    link: str = "square"
    N: int = 100
    set_size_range: tuple = (5, 50)
    dims: int = 1
    seed: int = 0
    shared_times: bool = False
    id_prefix: str = "pair"

    def __post_init__(self):
        _check_range(self.set_size_range, self.N)
        if self.sigma < 0:
            raise ValueError("noise sigma must be nonnegative")
        if self.dims < 1:
            raise ValueError("dims must be >= 1")
        if self.link not in LINKS:
            raise ValueError(f"unknown link {self.link!r}; choose from {sorted(LINKS)}")


def _latents(rng, n, dims):
    beta = rng.uniform(0.5, 1.5, size=(n, dims))
    alpha = rng.uniform(-0.5, 0.5, size=(n, dims))
    return beta, alpha


def _curve(beta, alpha, t):
    return beta[None, :] * np.sin(2 * np.pi * t)[:, None] + alpha[None, :] * t[:, None]


def gen_independence(design: IndependenceDesign, dependent: bool = True, latents=None) -> PairedSample:
    """Paired series whose dependence is carried by the latent ``(beta_i, alpha_i)``.

    With ``dependent=False`` the y side reads its latents from a separate
    stream, so pairs are independent. Only the first channel of each side is
    coupled; extra channels (``dims > 1``) get independent latents per side.
    ``latents=(beta, alpha)`` with shapes ``(N,)`` forces the first-channel
    latents of both sides.
    """
    g = LINKS[design.link]
    n, dims = design.N, design.dims
    lat_x = _latents(make_rng(design.seed, "latent", "x"), n, dims)
    lat_y = _latents(make_rng(design.seed, "latent", "y"), n, dims)
    if dependent:
        lat_y = (lat_y[0].copy(), lat_y[1].copy())
        lat_y[0][:, 0], lat_y[1][:, 0] = lat_x[0][:, 0], lat_x[1][:, 0]
    if latents is not None:
        beta, alpha = (np.broadcast_to(np.asarray(v, dtype=float), (n,)) for v in latents)
        for lat in (lat_x, lat_y):
            lat[0][:, 0], lat[1][:, 0] = beta, alpha

    rng = make_rng(design.seed, "observations")
    lo, hi = design.set_size_range
    pairs = []
    for i in range(n):
        nx = int(rng.integers(lo, hi + 1))
        tx = rng.uniform(0.0, 1.0, size=nx)
        if design.shared_times:
            ny, ty = nx, tx
        else:
            ny = int(rng.integers(lo, hi + 1))
            ty = rng.uniform(0.0, 1.0, size=ny)
        x = _curve(lat_x[0][i], lat_x[1][i], tx) + design.sigma * rng.standard_normal((nx, dims))
        y = g(_curve(lat_y[0][i], lat_y[1][i], ty)) + design.sigma * rng.standard_normal((ny, dims))
        sid = f"{design.id_prefix}{i}"
        pairs.append((ObservationSet(sid, np.column_stack([tx, x])), ObservationSet(sid, np.column_stack([ty, y]))))
    return PairedSample(tuple(pairs))
