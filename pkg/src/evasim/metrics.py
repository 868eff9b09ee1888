"""Attack outcome metrics and run aggregation."""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ContractError

RECORD_COLUMNS = ("dataset", "defender", "method", "run", "ear", "anchor_yield",
                  "surrogate_fidelity", "probes_used", "seed")


def ear(defender, attacks) -> float:
    """Fraction of attack samples the defender labels Legitimate (its false-negative rate on them).

    Scored with direct model access; no probe ledger is involved.
    """
    X = getattr(attacks, "samples", attacks)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.size == 0 or len(X) == 0:
        raise ContractError("EAR needs a nonempty attack set")
    pred = np.asarray(defender.predict(X))
    return int(np.count_nonzero(pred == 0)) / len(X)


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    defender: str
    method: str
    run: int
    ear: float
    anchor_yield: float
    surrogate_fidelity: float | None
    probes_used: int
    seed: int

    @property
    def key(self):
        return (self.dataset, self.defender, self.method)


@dataclass(frozen=True)
class Aggregate:
    dataset: str
    defender: str
    method: str
    runs: int
    ear_mean: float
    ear_std: float
    anchor_yield: float
    surrogate_fidelity: float | None
    initial_accuracy: float | None = None


def _mean(values):
    return math.fsum(values) / len(values)


def _std(values):
    return statistics.stdev(values) if len(values) > 1 else 0.0


def summarize(records) -> list[Aggregate]:
    groups = {}
    for r in records:
        groups.setdefault(r.key, []).append(r)
    out = []
    for key in sorted(groups):
        rs = groups[key]
        # sorted inputs make float sums independent of record order
        ears = sorted(r.ear for r in rs)
        fids = sorted(r.surrogate_fidelity for r in rs if r.surrogate_fidelity is not None)
        out.append(Aggregate(
            *key, runs=len(rs), ear_mean=_mean(ears), ear_std=_std(ears),
            anchor_yield=_mean(sorted(r.anchor_yield for r in rs)),
            surrogate_fidelity=_mean(fids) if fids else None,
        ))
    return out


@dataclass
class AttackReport:
    records: list = field(default_factory=list)
    # (dataset, defender) -> cross-validated defender accuracy
    initial_accuracy: dict = field(default_factory=dict)
    # (dataset, defender, method, run, message) for cells that failed
    errors: list = field(default_factory=list)

    @property
    def aggregates(self) -> list[Aggregate]:
        aggs = summarize(self.records)
        return [
            Aggregate(**{**{f.name: getattr(a, f.name) for f in fields(a)},
                         "initial_accuracy": self.initial_accuracy.get((a.dataset, a.defender))})
            for a in aggs
        ]

    def aggregate_for(self, dataset, defender, method) -> Aggregate:
        for a in self.aggregates:
            if (a.dataset, a.defender, a.method) == (dataset, defender, method):
                return a
        raise KeyError((dataset, defender, method))


def aggregate(records, initial_accuracy=None) -> AttackReport:
    return AttackReport(list(records), dict(initial_accuracy or {}))
