"""Datasets over the unit hypercube: CSV ingestion, shuffling, splits, fixtures."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ContractError, ParseError, SchemaError

log = logging.getLogger(__name__)

LEGITIMATE = 0
MALICIOUS = 1

SYNTHETIC_KINDS = ("separable-2d", "two-blob-nonconvex")
BUNDLED = ("cancer",)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable labeled sample collection. ``X`` is (n, d), ``y`` holds 0/1."""

    name: str
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        y = np.array(self.y, dtype=np.int64, copy=True).reshape(-1)
        if X.ndim == 1:
            X = X.reshape(len(y), -1) if len(y) else X.reshape(0, 0)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ContractError(f"{self.name}: {X.shape[0]} samples but {y.shape[0]} labels")
        if not np.isin(y, (LEGITIMATE, MALICIOUS)).all():
            raise SchemaError(f"{self.name}: labels must be 0 or 1")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.X.shape[0]

    @property
    def single_class(self) -> bool:
        return len(np.unique(self.y)) < 2

    def subset(self, idx, name=None) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(name or self.name, self.X[idx], self.y[idx])

    def of_label(self, label: int) -> np.ndarray:
        return self.X[self.y == label]

    def pairs(self):
        """Sorted list of (features, label) tuples; handy for multiset comparisons."""
        return sorted((tuple(x), int(l)) for x, l in zip(self.X.tolist(), self.y.tolist()))


def minmax_normalize(X: np.ndarray) -> np.ndarray:
    # constant columns map to 0
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return X.copy()
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    out = np.zeros_like(X)
    nz = span > 0
    out[:, nz] = (X[:, nz] - lo[nz]) / span[nz]
    return np.clip(out, 0.0, 1.0)


def load_csv(path, normalize: bool = True, name: str | None = None) -> Dataset:
    """Read ``f0,...,f{d-1},label`` rows into a Dataset.

    Row order is preserved. With ``normalize`` every feature column is min-max
    scaled over the whole file. A file holding only one class loads fine but is
    logged as such (see ``Dataset.single_class``).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: missing header row") from None
        header = [h.strip() for h in header]
        if not header or header[-1] != "label":
            raise SchemaError(f"{path}: last column must be named 'label'")
        width = len(header)
        feats, labels = [], []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise ParseError(f"expected {width} fields, got {len(row)}", row=row_no)
            try:
                values = [float(c) for c in row[:-1]]
                label = float(row[-1])
            except ValueError as exc:
                raise ParseError(str(exc), row=row_no) from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError("non-finite feature value", row=row_no)
            if label not in (0.0, 1.0):
                raise SchemaError(f"{path}: row {row_no}: label {row[-1]!r} not in {{0,1}}")
            feats.append(values)
            labels.append(int(label))
    X = np.array(feats, dtype=float).reshape(len(feats), width - 1)
    if normalize:
        X = minmax_normalize(X)
    ds = Dataset(name or path.stem, X, np.array(labels, dtype=np.int64))
    if len(ds) and ds.single_class:
        log.warning("%s: only one class present (%d rows)", path, len(ds))
    return ds


def save_csv(ds: Dataset, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i}" for i in range(ds.d)] + ["label"])
        for x, label in zip(ds.X.tolist(), ds.y.tolist()):
            w.writerow([repr(v) for v in x] + [label])
    return path


def export_points(points, path, label=LEGITIMATE, labels=None) -> Path:
    """Write bare points (anchors, exploration pools) in the dataset CSV schema."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if labels is None:
        labels = np.full(len(points), label)
    return save_csv(Dataset(Path(path).stem, points, labels), path)


def shuffle(ds: Dataset, seed) -> Dataset:
    rng = np.random.default_rng(seed)
    return ds.subset(rng.permutation(len(ds)))


def split(ds: Dataset, fraction: float, seed) -> tuple[Dataset, Dataset]:
    """Random disjoint partition with sizes ceil(f*n) and the rest; both parts nonempty."""
    if not 0.0 < fraction < 1.0:
        raise ContractError(f"fraction must lie in (0, 1), got {fraction}")
    n = len(ds)
    if n < 2:
        raise ContractError("need at least 2 samples to split")
    k = min(max(math.ceil(fraction * n), 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    return ds.subset(perm[:k]), ds.subset(perm[k:])


def _separable_2d(n_legit, n_mal, rng):
    # Legitimate below the anti-diagonal, Malicious above, with a 0.1-wide empty band.
    def draw(center, count, sign):
        out = np.empty((0, 2))
        while len(out) < count:
            pts = rng.normal(center, 0.08, size=(2 * count, 2))
            margin = (pts.sum(axis=1) - 1.0) / math.sqrt(2.0)
            ok = (sign * margin >= 0.05) & (pts >= 0).all(axis=1) & (pts <= 1).all(axis=1)
            out = np.vstack([out, pts[ok]])
        return out[:count]

    return draw((0.3, 0.3), n_legit, -1.0), draw((0.7, 0.7), n_mal, 1.0)


def _two_blob_nonconvex(n_legit, n_mal, rng):
    # Two Legitimate blobs left/right, a full-height Malicious band between them.
    left = n_legit - n_legit // 2
    legit = np.vstack([
        rng.normal((0.2, 0.5), 0.06, size=(left, 2)),
        rng.normal((0.8, 0.5), 0.06, size=(n_legit - left, 2)),
    ])
    mal = np.column_stack([rng.uniform(0.4, 0.6, n_mal), rng.uniform(0.0, 1.0, n_mal)])
    return np.clip(legit, 0.0, 1.0), mal


def make_synthetic(kind: str, n: int, seed=0) -> Dataset:
    if kind not in SYNTHETIC_KINDS:
        raise ContractError(f"unknown synthetic kind {kind!r}; choose from {SYNTHETIC_KINDS}")
    if n < 20:
        raise ContractError("synthetic datasets need n >= 20")
    rng = np.random.default_rng(seed)
    n_legit = n - n // 2
    n_mal = n // 2
    gen = _separable_2d if kind == "separable-2d" else _two_blob_nonconvex
    legit, mal = gen(n_legit, n_mal, rng)
    X = np.vstack([legit, mal])
    y = np.r_[np.zeros(len(legit), dtype=np.int64), np.ones(len(mal), dtype=np.int64)]
    return Dataset(kind, X, y)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("evasim") / "data" / f"{name}.csv"))


def resolve_dataset(spec: str, seed=0) -> Dataset:
    """Turn a CLI/config dataset reference into a Dataset.

    Accepts a CSV path, a bundled fixture name (``cancer``), or a synthetic kind
    with optional size, e.g. ``separable-2d`` or ``two-blob-nonconvex:600``.
    """
    base, _, size = spec.partition(":")
    if base in SYNTHETIC_KINDS:
        return make_synthetic(base, int(size) if size else 400, seed=seed)
    if base in BUNDLED:
        ds = load_csv(bundled_path(base), normalize=True, name=base)
        if size:
            ds = shuffle(ds, seed).subset(np.arange(min(int(size), len(ds))))
        return ds
    path = Path(spec)
    if not path.exists():
        raise ContractError(f"dataset {spec!r} is neither a file nor a known fixture")
    return load_csv(path, normalize=True)
