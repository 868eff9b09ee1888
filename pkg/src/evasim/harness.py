"""Experiment orchestration: the dataset x defender x method x run matrix and parameter sweeps."""
from __future__ import annotations

import configparser
import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .attack_ap import APConfig, exploit_ap, explore_ap
from .attack_re import REConfig, exploit_re, explore_re, surrogate_fidelity
from .classifier_zoo import MODEL_KINDS, cross_val_accuracy, make_trainer
from .dataspace import Dataset, resolve_dataset, shuffle, split
from .errors import AttackInfeasible, ConfigError
from .metrics import AttackReport, RunRecord, ear
from .oracle import BlackBoxOracle

log = logging.getLogger(__name__)

METHODS = ("AP", "RE")
SWEEP_PARAMS = ("r_exploit", "b_explore")


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple = ("separable-2d",)
    defenders: tuple = ("linear",)
    methods: tuple = ("AP", "RE")
    runs: int = 30
    ap: APConfig = field(default_factory=APConfig)
    re: REConfig = field(default_factory=REConfig)
    master_seed: int = 0
    # defender's share of each dataset; the rest is the adversary's seed pool
    train_fraction: float = 0.7
    ap_seeds: int = 10
    re_seeds: int = 5
    cv_folds: int = 5
    defender_params: dict = field(default_factory=dict)
    fixture_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "defenders", tuple(self.defenders))
        object.__setattr__(self, "methods", tuple(m.upper() for m in self.methods))
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        bad = [d for d in self.defenders if d not in MODEL_KINDS]
        if bad:
            raise ConfigError(f"unknown defenders {bad}; choose from {MODEL_KINDS}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {METHODS}")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.ap_seeds < 1 or self.re_seeds < 1:
            raise ConfigError("seed counts must be >= 1")


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    base: ExperimentConfig

    def __post_init__(self):
        param = self.parameter.replace("-", "_")
        if param not in SWEEP_PARAMS:
            raise ConfigError(f"cannot sweep {self.parameter!r}; choose from {SWEEP_PARAMS}")
        object.__setattr__(self, "parameter", param)
        vals = tuple(self.values)
        if not vals:
            raise ConfigError("sweep needs at least one value")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep values must be strictly increasing")
        object.__setattr__(self, "values", vals)


def derive_seed(master_seed, *parts) -> int:
    """Stable 63-bit seed from the master seed and a cell coordinate."""
    text = "|".join(str(p) for p in (master_seed, *parts))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big") >> 1


def defender_trainer(cfg: ExperimentConfig, kind: str, seed: int):
    return make_trainer(kind, seed=seed, **cfg.defender_params.get(kind, {}))


def _partition(ds: Dataset, cfg: ExperimentConfig, seed: int):
    shuffled = shuffle(ds, derive_seed(seed, "shuffle"))
    return split(shuffled, cfg.train_fraction, derive_seed(seed, "split"))


def _pick(rng, X, k):
    k = min(k, len(X))
    return X[np.sort(rng.choice(len(X), size=k, replace=False))]


def run_cell(ds: Dataset, defender: str, method: str, run: int, cfg: ExperimentConfig) -> RunRecord:
    """One attack run: partition, train the defender, attack it through the oracle, score EAR."""
    seed = derive_seed(cfg.master_seed, ds.name, defender, method, run)
    train, adversary = _partition(ds, cfg, seed)
    model = defender_trainer(cfg, defender, derive_seed(seed, "defender"))(train)
    rng = np.random.default_rng(derive_seed(seed, "attack"))
    if method == "AP":
        oracle = BlackBoxOracle(model, cfg.ap.b_explore, ds.d)
        legit = adversary.of_label(0)
        if len(legit) == 0:
            raise AttackInfeasible("adversary pool has no Legitimate samples to seed AP")
        anchors = explore_ap(_pick(rng, legit, cfg.ap_seeds), oracle, cfg.ap, rng)
        oracle.phase = "exploit"
        attacks = exploit_ap(anchors, cfg.ap, rng)
        return RunRecord(ds.name, defender, method, run, ear(model, attacks),
                         anchors.anchor_yield, None, oracle.used, seed)
    oracle = BlackBoxOracle(model, cfg.re.b_explore, ds.d)
    legit, mal = adversary.of_label(0), adversary.of_label(1)
    if len(legit) == 0 or len(mal) == 0:
        raise AttackInfeasible("adversary pool lacks a class needed to seed RE")
    seed_pts = np.vstack([_pick(rng, legit, cfg.re_seeds), _pick(rng, mal, cfg.re_seeds)])
    n_l = min(cfg.re_seeds, len(legit))
    seed_ds = Dataset("re-seed", seed_pts, np.r_[np.zeros(n_l), np.ones(len(seed_pts) - n_l)])
    pools, sur = explore_re(seed_ds, oracle, cfg.re, rng)
    fidelity = surrogate_fidelity(sur, ds)
    oracle.phase = "exploit"
    attacks = exploit_re(pools, sur, cfg.re, rng)
    legit_yield = len(pools.explored_legit) / cfg.re.b_explore
    return RunRecord(ds.name, defender, method, run, ear(model, attacks),
                     legit_yield, fidelity, oracle.used, seed)


def initial_accuracy(ds: Dataset, defender: str, cfg: ExperimentConfig) -> float:
    """Cross-validated accuracy of the defender on its own training split, as the defender sees it."""
    seed = derive_seed(cfg.master_seed, ds.name, defender, "cv")
    train, _ = _partition(ds, cfg, seed)
    trainer = defender_trainer(cfg, defender, derive_seed(seed, "defender"))
    return cross_val_accuracy(train, trainer, cfg.cv_folds, derive_seed(seed, "folds"))


def _cell_job(args):
    ds, defender, method, run, cfg = args
    try:
        return run_cell(ds, defender, method, run, cfg), None
    except Exception as exc:  # one bad cell must not sink the matrix
        return None, f"{type(exc).__name__}: {exc}"


def _cv_job(args):
    ds, defender, cfg = args
    try:
        return initial_accuracy(ds, defender, cfg), None
    except Exception as exc:
        return None, f"{type(exc).__name__}: {exc}"


def load_datasets(cfg: ExperimentConfig) -> list[Dataset]:
    return [resolve_dataset(spec, seed=cfg.fixture_seed) for spec in cfg.datasets]


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, datasets=None) -> AttackReport:
    """Run every (dataset, defender, method, run) cell.

    Results do not depend on ``jobs``: each cell's randomness is derived from its
    coordinate alone. Failed cells are listed in ``report.errors``.
    """
    datasets = load_datasets(cfg) if datasets is None else datasets
    cv_jobs = [(ds, dfn, cfg) for ds in datasets for dfn in cfg.defenders]
    cells = [(ds, dfn, m, r, cfg) for ds in datasets for dfn in cfg.defenders
             for m in cfg.methods for r in range(cfg.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cv_out = list(pool.map(_cv_job, cv_jobs))
            cell_out = list(pool.map(_cell_job, cells, chunksize=max(1, len(cells) // (4 * jobs))))
    else:
        cv_out = [_cv_job(j) for j in cv_jobs]
        cell_out = [_cell_job(c) for c in cells]
    report = AttackReport()
    for (ds, dfn, _), (acc, err) in zip(cv_jobs, cv_out):
        if err is None:
            report.initial_accuracy[(ds.name, dfn)] = acc
        else:
            report.errors.append((ds.name, dfn, "CV", -1, err))
    for (ds, dfn, m, r, _), (rec, err) in zip(cells, cell_out):
        if err is None:
            report.records.append(rec)
        else:
            log.warning("cell %s/%s/%s/run %d failed: %s", ds.name, dfn, m, r, err)
            report.errors.append((ds.name, dfn, m, r, err))
    if report.errors:
        log.warning("%d of %d cells failed", len(report.errors), len(cells) + len(cv_jobs))
    return report


def with_parameter(cfg: ExperimentConfig, parameter: str, value) -> ExperimentConfig:
    """Set an attack parameter on both method configs."""
    parameter = parameter.replace("-", "_")
    if parameter == "b_explore":
        value = int(value)
    return replace(cfg, ap=replace(cfg.ap, **{parameter: value}), re=replace(cfg.re, **{parameter: value}))


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[tuple]:
    datasets = load_datasets(spec.base)
    return [(v, run_experiment(with_parameter(spec.base, spec.parameter, v), jobs=jobs, datasets=datasets))
            for v in spec.values]


# -- config files --------------------------------------------------------------

_LIST_KEYS = ("datasets", "defenders", "methods")


def _coerce(text, like):
    if isinstance(like, bool):
        return text.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(text)
    if isinstance(like, float):
        return float(text)
    return text.strip()


def config_from_mapping(values: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply flat keys (``runs``, ``ap.b_explore``, ``re.lambda_max`` ...) onto a config."""
    cfg = base or ExperimentConfig()
    top, ap, re_ = {}, {}, {}
    top_names = {f.name: f for f in fields(ExperimentConfig)}
    for key, raw in values.items():
        if raw is None:
            continue
        key = key.strip().replace("-", "_")
        if key.startswith(("ap.", "re.")):
            section, name = key.split(".", 1)
            target_cfg = cfg.ap if section == "ap" else cfg.re
            if name not in {f.name for f in fields(target_cfg)} or name == "surrogate_trainer":
                raise ConfigError(f"unknown config key {key!r}")
            like = getattr(target_cfg, name)
            (ap if section == "ap" else re_)[name] = _coerce(raw, like) if isinstance(raw, str) else raw
        elif key in _LIST_KEYS:
            top[key] = tuple(s.strip() for s in raw.split(",") if s.strip()) if isinstance(raw, str) else tuple(raw)
        elif key in top_names and key not in ("ap", "re", "defender_params"):
            top[key] = _coerce(raw, getattr(cfg, key)) if isinstance(raw, str) else raw
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return replace(cfg, ap=replace(cfg.ap, **ap), re=replace(cfg.re, **re_), **top)


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read an INI-style file with a single ``[experiment]`` section of flat keys."""
    parser = configparser.ConfigParser()
    path = Path(path)
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    if not parser.has_section("experiment"):
        raise ConfigError(f"{path}: missing [experiment] section")
    return config_from_mapping(dict(parser.items("experiment")), base)
