"""Anchor Points attack.

Exploration walks outward from a few known-Legitimate seeds, keeping every probe
the oracle accepts; the neighborhood radius widens as the acceptance rate rises.
Exploitation then mixes pairs of jittered anchors SMOTE-style without touching
the oracle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AttackInfeasible, BudgetExhausted, ContractError
from .oracle import BlackBoxOracle


@dataclass(frozen=True)
class APConfig:
    b_explore: int = 1000
    r_min: float = 0.1
    r_max: float = 0.5
    r_exploit: float = 0.1
    n_attack: int = 2000

    def __post_init__(self):
        if not 0 <= self.r_min <= self.r_max:
            raise ContractError(f"need 0 <= r_min <= r_max, got [{self.r_min}, {self.r_max}]")
        if self.b_explore < 1:
            raise ContractError("b_explore must be >= 1")
        if self.n_attack < 0:
            raise ContractError("n_attack must be >= 0")
        if self.r_exploit < 0:
            raise ContractError("r_exploit must be >= 0")


@dataclass
class AnchorSet:
    anchors: np.ndarray
    n_seed: int
    count_legitimate: int
    b_explore: int
    radii: np.ndarray = field(default=None, repr=False)

    @property
    def anchor_yield(self) -> float:
        return self.count_legitimate / self.b_explore if self.b_explore else 0.0

    @property
    def explored(self) -> np.ndarray:
        """Anchors found by probing (seeds excluded)."""
        return self.anchors[self.n_seed:]

    def __len__(self):
        return len(self.anchors)


@dataclass
class AttackSet:
    samples: np.ndarray
    # candidates a surrogate could not confirm within the retry cap
    unvalidated: int = 0

    def __len__(self):
        return len(self.samples)


def radius_at(r_min: float, r_max: float, count_legitimate: int, i: int) -> float:
    if i < 1:
        raise ContractError("iteration index starts at 1")
    if not 0 <= count_legitimate <= i:
        raise ContractError(f"count_legitimate={count_legitimate} outside [0, {i}]")
    return (r_max - r_min) * (count_legitimate / i) + r_min


def perturb(x, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Add N(0, scale^2) noise to every coordinate and clamp to [0, 1]."""
    if scale < 0:
        raise ContractError("scale must be >= 0")
    x = np.asarray(x, dtype=float)
    if scale == 0:
        return x.copy()
    return np.clip(x + rng.normal(0.0, scale, size=x.shape), 0.0, 1.0)


def explore_ap(seed, oracle: BlackBoxOracle, cfg: APConfig, rng: np.random.Generator) -> AnchorSet:
    seed = np.atleast_2d(np.asarray(seed, dtype=float))
    if seed.size == 0 or len(seed) == 0:
        raise ContractError("AP exploration needs at least one seed sample")
    if seed.shape[1] != oracle.dim:
        raise ContractError(f"seed dimension {seed.shape[1]} != oracle dimension {oracle.dim}")
    if oracle.remaining < cfg.b_explore:
        raise BudgetExhausted(f"oracle has {oracle.remaining} probes left, exploration needs {cfg.b_explore}")
    d = seed.shape[1]
    pool = np.empty((len(seed) + cfg.b_explore, d))
    pool[:len(seed)] = seed
    size = len(seed)
    count = 0
    radii = np.empty(cfg.b_explore)
    for i in range(1, cfg.b_explore + 1):
        x = pool[rng.integers(size)]
        r = radius_at(cfg.r_min, cfg.r_max, count, i)
        radii[i - 1] = r
        x_hat = perturb(x, r, rng)
        if oracle.probe(x_hat) == 0:
            pool[size] = x_hat
            size += 1
            count += 1
    return AnchorSet(pool[:size].copy(), len(seed), count, cfg.b_explore, radii)


def combine(x_a, x_b, lam):
    return lam * x_a + (1.0 - lam) * x_b


def exploit_ap(anchors, cfg: APConfig, rng: np.random.Generator, n_attack: int | None = None,
               lam=None) -> AttackSet:
    """Build attack samples from random anchor pairs; no oracle probes are spent.

    ``lam`` pins the mixing weight (all samples) instead of drawing it from U[0, 1].
    """
    pts = anchors.anchors if isinstance(anchors, AnchorSet) else np.atleast_2d(np.asarray(anchors, dtype=float))
    if pts.size == 0 or len(pts) == 0:
        raise AttackInfeasible("no anchor points to exploit")
    n = cfg.n_attack if n_attack is None else n_attack
    a = pts[rng.integers(len(pts), size=n)]
    b = pts[rng.integers(len(pts), size=n)]
    a_hat = perturb(a, cfg.r_exploit, rng)
    b_hat = perturb(b, cfg.r_exploit, rng)
    lams = rng.uniform(0.0, 1.0, size=(n, 1)) if lam is None else np.full((n, 1), float(lam))
    # clip only absorbs rounding; a convex combination of points in the cube stays inside it
    return AttackSet(np.clip(combine(a_hat, b_hat, lams), 0.0, 1.0))
