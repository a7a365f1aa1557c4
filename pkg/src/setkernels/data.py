"""Set-valued data containers, JSONL ingestion and set-size weights.

A *set* is a bag of ``n_i`` points in ``R^d``. A :class:`Sample` is a weighted
collection of sets drawn from one population; a :class:`PairedSample` holds
aligned ``(x-set, y-set)`` pairs for independence testing. Time series are
encoded with time as the first coordinate, ``(t, x_1, ..., x_k)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

WEIGHT_TOL = 1e-12


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""


def compute_weights(set_sizes: Sequence[int]) -> np.ndarray:
    """Set-size weights ``n_i / sum_j n_j``.

    Larger sets have lower-variance embeddings and receive proportionally more
    weight.
    """
    sizes = np.asarray(set_sizes, dtype=float)
    if sizes.ndim != 1 or sizes.size == 0:
        raise DataError("compute_weights needs a non-empty 1-D vector of set sizes")
    if np.any(sizes < 1) or np.any(sizes != np.floor(sizes)):
        raise DataError(f"set sizes must be integers >= 1, got {list(set_sizes)}")
    return sizes / sizes.sum()


def uniform_weights(n: int) -> np.ndarray:
    if n < 1:
        raise DataError(f"uniform_weights needs n >= 1, got {n}")
    return np.full(n, 1.0 / n)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _check_weights(w: np.ndarray, n: int, what: str) -> None:
    if w.shape != (n,):
        raise DataError(f"{what}: expected {n} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DataError(f"{what}: weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise DataError(f"{what}: weights sum to {w.sum()!r}, not 1")


@dataclass(frozen=True)
class ObservationSet:
    id: str
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1 and pts.size:
            raise DataError(f"set {self.id!r}: points must be a list of vectors")
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DataError(f"set {self.id!r}: needs at least one point of dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise DataError(f"set {self.id!r}: non-finite coordinate")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _common_dim(sets: Sequence[ObservationSet], what: str) -> int:
    d = sets[0].dim
    for s in sets:
        if s.dim != d:
            raise DataError(
                f"{what}: set {s.id!r} has dimension {s.dim}, expected {d}"
            )
    return d


@dataclass(frozen=True)
class Sample:
    """Weighted collection of ``N >= 2`` sets sharing one dimension."""

    sets: tuple
    weights: np.ndarray = None

    def __post_init__(self):
        sets = tuple(self.sets)
        if len(sets) < 2:
            raise DataError(f"a sample needs at least 2 sets, got {len(sets)}")
        _common_dim(sets, "sample")
        w = compute_weights([s.size for s in sets]) if self.weights is None else self.weights
        w = _frozen(w)
        _check_weights(w, len(sets), "sample")
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.sets)

    @property
    def dim(self) -> int:
        return self.sets[0].dim

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.sets]

    @property
    def sizes(self) -> np.ndarray:
        return np.array([s.size for s in self.sets])

    def pooled_points(self) -> np.ndarray:
        return np.concatenate([s.points for s in self.sets], axis=0)

    def subset(self, idx: Iterable[int]) -> "Sample":
        """Sets at ``idx`` with their weights renormalized to sum to one."""
        idx = list(idx)
        w = self.weights[idx]
        return Sample(tuple(self.sets[i] for i in idx), w / w.sum())

    def with_uniform_weights(self) -> "Sample":
        return Sample(self.sets, uniform_weights(len(self)))


@dataclass(frozen=True)
class PairedSample:
    """Aligned pairs ``(x_i, y_i)``; the two sides may differ in dimension."""

    pairs: tuple
    weights_x: np.ndarray = None
    weights_y: np.ndarray = None

    def __post_init__(self):
        pairs = tuple((x, y) for x, y in self.pairs)
        if len(pairs) < 2:
            raise DataError(f"a paired sample needs at least 2 pairs, got {len(pairs)}")
        _common_dim([p[0] for p in pairs], "paired sample (x side)")
        _common_dim([p[1] for p in pairs], "paired sample (y side)")
        wx = self.weights_x
        wy = self.weights_y
        # each side is weighted by its own set sizes
        if wx is None:
            wx = compute_weights([p[0].size for p in pairs])
        if wy is None:
            wy = compute_weights([p[1].size for p in pairs])
        wx, wy = _frozen(wx), _frozen(wy)
        _check_weights(wx, len(pairs), "paired sample (x side)")
        _check_weights(wy, len(pairs), "paired sample (y side)")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "weights_x", wx)
        object.__setattr__(self, "weights_y", wy)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def x(self) -> Sample:
        return Sample(tuple(p[0] for p in self.pairs), self.weights_x)

    @property
    def y(self) -> Sample:
        return Sample(tuple(p[1] for p in self.pairs), self.weights_y)

    @property
    def ids(self) -> list[str]:
        return [p[0].id for p in self.pairs]

    def subset(self, idx: Iterable[int]) -> "PairedSample":
        idx = list(idx)
        wx, wy = self.weights_x[idx], self.weights_y[idx]
        return PairedSample(tuple(self.pairs[i] for i in idx), wx / wx.sum(), wy / wy.sum())

    def with_uniform_weights(self) -> "PairedSample":
        n = len(self)
        return PairedSample(self.pairs, uniform_weights(n), uniform_weights(n))


# -- JSONL ------------------------------------------------------------------


def _parse_lines(path: Path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"{path}: no such file") from None
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise DataError(f"{path}:{lineno}: expected a JSON object")
        yield lineno, rec


def _make_set(path, lineno, sid, pts) -> ObservationSet:
    if not isinstance(pts, list) or not all(isinstance(p, list) for p in pts):
        raise DataError(f"{path}:{lineno}: set {sid!r}: points must be a list of lists")
    lens = {len(p) for p in pts}
    if len(lens) > 1:
        raise DataError(f"{path}:{lineno}: set {sid!r}: points of mixed dimension {sorted(lens)}")
    try:
        arr = np.array(pts, dtype=float)
    except (TypeError, ValueError):
        raise DataError(f"{path}:{lineno}: set {sid!r}: non-numeric coordinate") from None
    try:
        return ObservationSet(sid, arr.reshape(len(pts), -1) if len(pts) else arr)
    except DataError as exc:
        raise DataError(f"{path}:{lineno}: {exc}") from None


def _weights_override(path, found: list, n: int, key: str):
    given = [w for w in found if w is not None]
    if not given:
        return None
    if len(given) != n:
        raise DataError(f"{path}: '{key}' must be given on every line or on none")
    w = np.array(given, dtype=float)
    if not np.all(np.isfinite(w)) or np.any(w < 0) or w.sum() <= 0:
        raise DataError(f"{path}: '{key}' values must be finite, nonnegative, not all zero")
    return w / w.sum()


def load_sample(path, schema: str = "two-sample"):
    """Read a JSONL file into a :class:`Sample` or :class:`PairedSample`.

    Two-sample lines look like ``{"id": ..., "points": [[...], ...], "weight": w}``
    (``weight`` optional). Paired lines look like ``{"id": ..., "x": [[...]],
    "y": [[...]]}`` with optional ``weight_x``/``weight_y``. Explicit weights
    must be present on every line or on none; they are renormalized.
    """
    if schema not in ("two-sample", "paired"):
        raise ValueError(f"unknown schema {schema!r}")
    path = Path(path)
    if schema == "two-sample":
        sets, wts = [], []
        for lineno, rec in _parse_lines(path):
            sid = str(rec.get("id", f"line{lineno}"))
            if "points" not in rec:
                raise DataError(f"{path}:{lineno}: missing 'points'")
            sets.append(_make_set(path, lineno, sid, rec["points"]))
            wts.append(rec.get("weight"))
        if not sets:
            raise DataError(f"{path}: no sets")
        try:
            return Sample(tuple(sets), _weights_override(path, wts, len(sets), "weight"))
        except DataError as exc:
            raise DataError(f"{path}: {exc}") from None

    pairs, wx, wy = [], [], []
    for lineno, rec in _parse_lines(path):
        sid = str(rec.get("id", f"line{lineno}"))
        if "x" not in rec or "y" not in rec:
            raise DataError(f"{path}:{lineno}: paired record needs both 'x' and 'y'")
        pairs.append((_make_set(path, lineno, sid, rec["x"]), _make_set(path, lineno, sid, rec["y"])))
        wx.append(rec.get("weight_x"))
        wy.append(rec.get("weight_y"))
    if not pairs:
        raise DataError(f"{path}: no pairs")
    try:
        return PairedSample(
            tuple(pairs),
            _weights_override(path, wx, len(pairs), "weight_x"),
            _weights_override(path, wy, len(pairs), "weight_y"),
        )
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def _needs_weights(w: np.ndarray, sizes) -> bool:
    return not np.allclose(w, compute_weights(sizes), rtol=0, atol=WEIGHT_TOL)


def dumps_sample(sample, include_weights: bool | None = None) -> str:
    """JSONL text for a sample. Weights are written only when they differ from
    the set-size rule, unless ``include_weights`` forces the choice."""
    lines = []
    if isinstance(sample, PairedSample):
        inc = include_weights
        if inc is None:
            inc = _needs_weights(sample.weights_x, [p[0].size for p in sample.pairs]) or \
                _needs_weights(sample.weights_y, [p[1].size for p in sample.pairs])
        for i, (x, y) in enumerate(sample.pairs):
            rec = {"id": x.id, "x": x.points.tolist(), "y": y.points.tolist()}
            if inc:
                rec["weight_x"] = float(sample.weights_x[i])
                rec["weight_y"] = float(sample.weights_y[i])
            lines.append(json.dumps(rec))
    else:
        inc = include_weights
        if inc is None:
            inc = _needs_weights(sample.weights, sample.sizes)
        for i, s in enumerate(sample.sets):
            rec = {"id": s.id, "points": s.points.tolist()}
            if inc:
                rec["weight"] = float(sample.weights[i])
            lines.append(json.dumps(rec))
    return "".join(line + "\n" for line in lines)


def save_sample(sample, path, include_weights: bool | None = None) -> None:
    Path(path).write_text(dumps_sample(sample, include_weights), encoding="utf-8")
