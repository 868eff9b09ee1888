import numpy as np

from ..dataspace import Dataset
from ..errors import ContractError, StratificationError


def stratified_folds(y, folds, seed):
    """Fold index per sample; each class is shuffled then dealt round-robin."""
    rng = np.random.default_rng(seed)
    assign = np.empty(len(y), dtype=np.int64)
    offset = 0
    for label in (0, 1):
        idx = np.flatnonzero(y == label)
        idx = idx[rng.permutation(len(idx))]
        assign[idx] = (np.arange(len(idx)) + offset) % folds
        offset += len(idx)
    return assign


def cross_val_accuracy(ds: Dataset, trainer, folds: int = 5, seed=0) -> float:
    """Mean held-out accuracy over stratified folds.

    ``trainer`` maps a training Dataset to a model with ``predict``.
    """
    if folds < 2:
        raise ContractError("folds must be >= 2")
    if folds > len(ds):
        raise ContractError(f"{folds} folds but only {len(ds)} samples")
    assign = stratified_folds(ds.y, folds, seed)
    scores = []
    for k in range(folds):
        test = assign == k
        train = ds.subset(np.flatnonzero(~test))
        if train.single_class:
            raise StratificationError(f"fold {k}: training part lacks a class")
        model = trainer(train)
        pred = np.asarray(model.predict(ds.X[test]))
        scores.append(float((pred == ds.y[test]).mean()))
    return float(np.mean(scores))
