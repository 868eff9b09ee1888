"""Reverse Engineering attack.

Exploration places probes on the mid-perpendicular of random Legitimate/Malicious
pairs (Gram-Schmidt step), grows both pools from the oracle's answers and fits a
linear surrogate on them. Exploitation runs the Anchor Points attack against the
surrogate only, so it costs no real probes, and keeps candidates the surrogate
accepts.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .attack_ap import APConfig, AttackSet, explore_ap, exploit_ap
from .classifier_zoo import LinearModel, train_linear
from .dataspace import Dataset
from .errors import AttackInfeasible, BudgetExhausted, ContractError, RunError
from .oracle import BlackBoxOracle, free_oracle

log = logging.getLogger(__name__)

MAX_DIRECTION_DRAWS = 16
MAX_PAIR_DRAWS = 16
MAX_VALIDATION_ATTEMPTS = 100


@dataclass(frozen=True)
class REConfig:
    b_explore: int = 1000
    lambda_max: float = 0.25
    surrogate_c: float = 10.0
    r_exploit: float = 0.5
    n_attack: int = 2000
    local_budget: int = 5000
    r_min: float = 0.1
    r_max: float = 0.5
    surrogate_trainer: Callable | None = None

    def __post_init__(self):
        if self.lambda_max <= 0:
            raise ContractError("lambda_max must be > 0")
        if self.b_explore < 1 or self.local_budget < 1:
            raise ContractError("b_explore and local_budget must be >= 1")
        if self.n_attack < 0 or self.r_exploit < 0:
            raise ContractError("n_attack and r_exploit must be >= 0")
        if not 0 <= self.r_min <= self.r_max:
            raise ContractError("need 0 <= r_min <= r_max")


@dataclass
class ExplorationPools:
    legit: np.ndarray
    malicious: np.ndarray
    n_seed_legit: int
    n_seed_malicious: int

    def as_dataset(self, name="explored") -> Dataset:
        X = np.vstack([self.legit, self.malicious])
        y = np.r_[np.zeros(len(self.legit), dtype=np.int64), np.ones(len(self.malicious), dtype=np.int64)]
        return Dataset(name, X, y)

    @property
    def explored_legit(self):
        return self.legit[self.n_seed_legit:]

    @property
    def explored_malicious(self):
        return self.malicious[self.n_seed_malicious:]


@dataclass
class SurrogateModel:
    linear: LinearModel
    fidelity: float | None = None

    def predict(self, X):
        return self.linear.predict(X)


def gs_probe_point(x_l, x_m, lambda_max: float, rng: np.random.Generator, *,
                   lam: float | None = None, direction=None, clamp: bool = True) -> np.ndarray:
    """Point at distance ``lam ~ U[0, lambda_max]`` from the pair's midpoint, orthogonal to ``x_l - x_m``.

    ``direction`` fixes the raw random vector (normally standard normal) and ``lam``
    fixes the magnitude; both exist for testing. ``clamp=False`` returns the
    unclipped construction.
    """
    x_l = np.asarray(x_l, dtype=float)
    x_m = np.asarray(x_m, dtype=float)
    x0 = x_l - x_m
    x0_sq = float(x0 @ x0)
    if x0_sq == 0.0:
        raise ContractError("x_L and x_M coincide; the mid-perpendicular is undefined")
    draws = 1 if direction is not None else MAX_DIRECTION_DRAWS
    norm = 0.0
    for _ in range(draws):
        x_r = rng.standard_normal(x0.shape) if direction is None else np.asarray(direction, dtype=float)
        x_r = x_r - (x_r @ x0) / x0_sq * x0
        # second pass removes the residual left by cancellation
        x_r = x_r - (x_r @ x0) / x0_sq * x0
        norm = float(np.linalg.norm(x_r))
        if norm > 1e-12:
            break
    if norm <= 1e-12:
        raise ContractError("random direction is parallel to x_L - x_M (orthogonal part vanished)")
    lam_i = rng.uniform(0.0, lambda_max) if lam is None else float(lam)
    x_s = (lam_i / norm) * x_r + (x_l + x_m) / 2.0
    return np.clip(x_s, 0.0, 1.0) if clamp else x_s


def explore_re(seed: Dataset, oracle: BlackBoxOracle, cfg: REConfig, rng: np.random.Generator):
    """Grow Legitimate/Malicious pools with mid-perpendicular probes, then fit the surrogate.

    Returns ``(ExplorationPools, SurrogateModel)``; exactly ``cfg.b_explore`` real
    probes are spent.
    """
    legit0 = seed.of_label(0)
    mal0 = seed.of_label(1)
    if len(legit0) == 0 or len(mal0) == 0:
        raise ContractError("RE exploration needs at least one Legitimate and one Malicious seed")
    if seed.d != oracle.dim:
        raise ContractError(f"seed dimension {seed.d} != oracle dimension {oracle.dim}")
    if oracle.remaining < cfg.b_explore:
        raise BudgetExhausted(f"oracle has {oracle.remaining} probes left, exploration needs {cfg.b_explore}")
    d = seed.d
    cap = cfg.b_explore
    legit = np.empty((len(legit0) + cap, d))
    mal = np.empty((len(mal0) + cap, d))
    legit[:len(legit0)] = legit0
    mal[:len(mal0)] = mal0
    n_l, n_m = len(legit0), len(mal0)
    for _ in range(cfg.b_explore):
        for _attempt in range(MAX_PAIR_DRAWS):
            x_l = legit[rng.integers(n_l)]
            x_m = mal[rng.integers(n_m)]
            if not np.array_equal(x_l, x_m):
                break
        else:
            raise RunError("could not draw a distinct Legitimate/Malicious pair")
        x_s = gs_probe_point(x_l, x_m, cfg.lambda_max, rng)
        if oracle.probe(x_s) == 0:
            legit[n_l] = x_s
            n_l += 1
        else:
            mal[n_m] = x_s
            n_m += 1
    pools = ExplorationPools(legit[:n_l].copy(), mal[:n_m].copy(), len(legit0), len(mal0))
    return pools, train_surrogate(pools, cfg)


def train_surrogate(pools: ExplorationPools, cfg: REConfig) -> SurrogateModel:
    trainer = cfg.surrogate_trainer
    data = pools.as_dataset("surrogate-train")
    model = trainer(data) if trainer is not None else train_linear(data, c=cfg.surrogate_c)
    return SurrogateModel(model)


def surrogate_fidelity(sur, reference: Dataset) -> float:
    if len(reference) == 0:
        raise ContractError("reference dataset is empty")
    pred = np.asarray(sur.predict(reference.X))
    return float((pred == reference.y).mean())


def exploit_re(pools: ExplorationPools, sur: SurrogateModel, cfg: REConfig,
               rng: np.random.Generator) -> AttackSet:
    """AP over the surrogate, then keep candidates the surrogate calls Legitimate.

    A rejected candidate is regenerated up to 100 times; after that it is emitted
    anyway and counted in ``AttackSet.unvalidated``. The real oracle is never used.
    """
    if len(pools.legit) == 0:
        raise AttackInfeasible("no Legitimate exploration samples to start from")
    local = free_oracle(sur, dim=pools.legit.shape[1])
    ap_cfg = APConfig(b_explore=cfg.local_budget, r_min=cfg.r_min, r_max=cfg.r_max,
                      r_exploit=cfg.r_exploit, n_attack=cfg.n_attack)
    anchors = explore_ap(pools.legit, local, ap_cfg, rng)
    out = exploit_ap(anchors, ap_cfg, rng).samples
    pending = np.flatnonzero(np.asarray(sur.predict(out)) != 0) if len(out) else np.array([], dtype=int)
    for _ in range(MAX_VALIDATION_ATTEMPTS):
        if len(pending) == 0:
            break
        fresh = exploit_ap(anchors, ap_cfg, rng, n_attack=len(pending)).samples
        out[pending] = fresh
        pending = pending[np.asarray(sur.predict(fresh)) != 0]
    if len(pending):
        log.info("%d attack samples left unvalidated by the surrogate", len(pending))
    return AttackSet(out, unvalidated=len(pending))

