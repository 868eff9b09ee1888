import numpy as np

from ..dataspace import Dataset
from ..errors import ConfigError, ContractError


class KNNModel:
    """Majority vote of the k nearest training points (Euclidean).

    Equal distances are broken by training-set index, so the earlier point wins.
    """

    kind = "knn"

    def __init__(self, X, y, k):
        self.X = X
        self.y = y
        self.k = k
        self._sq = (X * X).sum(axis=1)

    def predict(self, X, chunk=2048):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        out = np.empty(len(X), dtype=np.int64)
        for s in range(0, len(X), chunk):
            Q = X[s:s + chunk]
            d2 = ((Q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
            nearest = np.argsort(d2, axis=1, kind="stable")[:, :self.k]
            votes = self.y[nearest].sum(axis=1)
            out[s:s + chunk] = (2 * votes > self.k).astype(np.int64)
        return int(out[0]) if single else out

    def describe(self):
        return f"knn(k={self.k})"


def train_knn(ds: Dataset, k: int = 3) -> KNNModel:
    if k < 1 or k % 2 == 0:
        raise ConfigError(f"k must be a positive odd number, got {k}")
    if k > len(ds):
        raise ContractError(f"k={k} exceeds the {len(ds)} training points")
    return KNNModel(np.array(ds.X), np.array(ds.y), k)
