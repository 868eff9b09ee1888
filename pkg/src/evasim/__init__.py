"""Simulation of exploratory evasion attacks on black-box binary classifiers."""
from .attack_ap import APConfig, AnchorSet, AttackSet, exploit_ap, explore_ap, perturb, radius_at
from .attack_re import (ExplorationPools, REConfig, SurrogateModel, exploit_re, explore_re,
                        gs_probe_point, surrogate_fidelity)
from .dataspace import Dataset, load_csv, make_synthetic, shuffle, split
from .errors import BudgetExhausted
from .harness import ExperimentConfig, SweepSpec, run_experiment, run_sweep
from .metrics import AttackReport, RunRecord, aggregate, ear
from .oracle import BlackBoxOracle, free_oracle, probe
from .report import emit_report

__version__ = "0.1.0"
