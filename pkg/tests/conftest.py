import numpy as np
import pytest

from evasim.dataspace import Dataset, make_synthetic, resolve_dataset


class ConstantModel:
    def __init__(self, label):
        self.label = label

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return self.label
        return np.full(len(X), self.label, dtype=np.int64)


class HalfPlaneModel:
    """Legitimate iff x[0] < 0.5."""

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return int(X[0] >= 0.5)
        return (X[:, 0] >= 0.5).astype(np.int64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def separable():
    return make_synthetic("separable-2d", 200, seed=0)


@pytest.fixture(scope="session")
def nonconvex():
    return make_synthetic("two-blob-nonconvex", 400, seed=0)


@pytest.fixture(scope="session")
def cancer():
    return resolve_dataset("cancer")


@pytest.fixture
def tiny():
    return Dataset("tiny", [[0.1, 0.2], [0.9, 0.8], [0.2, 0.1], [0.8, 0.9]], [0, 1, 0, 1])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
