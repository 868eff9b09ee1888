"""Probe-budgeted black-box access to a trained classifier.

Attack code only ever sees a ``BlackBoxOracle``: it can submit a point, get the
Accept/Reject label back, and read its own probe ledger. The wrapped model is
kept private.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExhausted, ContractError

FREE_CAP = 10**6


@dataclass
class ProbeLedger:
    budget: int
    used: int = 0
    by_phase: Counter = field(default_factory=Counter)

    @property
    def remaining(self) -> int:
        return self.budget - self.used


class BlackBoxOracle:
    __slots__ = ("_model", "_dim", "ledger", "phase", "log")

    def __init__(self, model, budget: int, dim: int, record: bool = False):
        if budget < 0:
            raise ContractError("budget must be >= 0")
        self._model = model
        self._dim = int(dim)
        self.ledger = ProbeLedger(int(budget))
        self.phase = "explore"
        # (index, sample, label) triples when record=True
        self.log = [] if record else None

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def used(self) -> int:
        return self.ledger.used

    @property
    def budget(self) -> int:
        return self.ledger.budget

    @property
    def remaining(self) -> int:
        return self.ledger.remaining

    def extend_budget(self, extra: int):
        self.ledger.budget += int(extra)

    def probe(self, x) -> int:
        x = np.asarray(x, dtype=float)
        if x.shape != (self._dim,):
            raise ContractError(f"probe has shape {x.shape}, oracle expects ({self._dim},)")
        if self.ledger.used >= self.ledger.budget:
            raise BudgetExhausted(f"probe budget of {self.ledger.budget} exhausted")
        label = int(self._model.predict(x))
        self.ledger.used += 1
        self.ledger.by_phase[self.phase] += 1
        if self.log is not None:
            self.log.append((self.ledger.used - 1, x.copy(), label))
        return label

    def __repr__(self):
        return f"BlackBoxOracle(dim={self._dim}, used={self.used}, budget={self.budget})"


def probe(oracle: BlackBoxOracle, x) -> int:
    return oracle.probe(x)


def free_oracle(model, dim: int | None = None, cap: int = FREE_CAP, record: bool = False) -> BlackBoxOracle:
    """Oracle over a model the adversary owns (the surrogate); the cap only guards runaway loops.

    ``dim`` defaults to the length of a linear model's weight vector.
    """
    if dim is None:
        w = getattr(model, "w", None)
        if w is None:
            raise ContractError("dim is required for models without a weight vector")
        dim = len(w)
    return BlackBoxOracle(model, cap, dim, record=record)
