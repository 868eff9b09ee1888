import numpy as np
import pytest

from conftest import ConstantModel, HalfPlaneModel
from evasim.attack_re import (ExplorationPools, REConfig, SurrogateModel, exploit_re, explore_re,
                              gs_probe_point, surrogate_fidelity, train_surrogate)
from evasim.classifier_zoo import train_linear
from evasim.dataspace import Dataset
from evasim.errors import AttackInfeasible, BudgetExhausted, ContractError
from evasim.oracle import BlackBoxOracle

GRID = np.stack(np.meshgrid(np.linspace(0.01, 0.99, 40), np.linspace(0.01, 0.99, 25)), -1).reshape(-1, 2)


def half_plane_seed():
    return Dataset("seed", [[0.2, 0.3], [0.3, 0.7], [0.8, 0.4], [0.7, 0.6]], [0, 0, 1, 1])


def test_gs_worked_example(rng):
    x = gs_probe_point([1.0, 0.5], [0.0, 0.5], 0.25, rng, lam=0.2, direction=[3.0, 4.0])
    np.testing.assert_allclose(x, [0.5, 0.7], atol=1e-12)
    mid = gs_probe_point([1.0, 0.5], [0.0, 0.5], 0.25, rng, lam=0.0, direction=[3.0, 4.0])
    np.testing.assert_allclose(mid, [0.5, 0.5], atol=1e-12)


def test_gs_orthogonality_and_dispersion():
    rng = np.random.default_rng(0)
    lam_max = 0.25
    dists = []
    for _ in range(10_000):
        x_l, x_m = rng.random(5), rng.random(5)
        x = gs_probe_point(x_l, x_m, lam_max, rng, clamp=False)
        offset = x - (x_l + x_m) / 2
        x0 = x_l - x_m
        cos = abs(offset @ x0) / (np.linalg.norm(offset) * np.linalg.norm(x0) + 1e-300)
        assert cos < 1e-9
        dists.append(np.linalg.norm(offset))
    dists = np.array(dists)
    assert dists.max() <= lam_max + 1e-12
    # magnitude is uniform on [0, lam_max]
    assert abs(dists.mean() - lam_max / 2) < 0.005
    assert abs(np.quantile(dists, 0.25) - lam_max / 4) < 0.01


def test_gs_degenerate_inputs(rng):
    with pytest.raises(ContractError):
        gs_probe_point([0.5, 0.5], [0.5, 0.5], 0.25, rng)
    with pytest.raises(ContractError):
        gs_probe_point([1.0, 0.0], [0.0, 0.0], 0.25, rng, direction=[2.0, 0.0])
    # one-dimensional space has no orthogonal complement
    with pytest.raises(ContractError):
        gs_probe_point([1.0], [0.0], 0.25, rng)


def test_gs_clamped_to_unit_box(rng):
    for _ in range(500):
        x = gs_probe_point([1.0, 1.0], [0.0, 1.0], 0.25, rng)
        assert (x >= 0).all() and (x <= 1).all()


def test_half_plane_surrogate_agreement(rng):
    oracle = BlackBoxOracle(HalfPlaneModel(), 1000, dim=2)
    pools, sur = explore_re(half_plane_seed(), oracle, REConfig(b_explore=1000), rng)
    assert oracle.used == 1000
    truth = HalfPlaneModel().predict(GRID)
    assert (sur.predict(GRID) == truth).mean() >= 0.95


def test_pool_partition_and_soundness(rng):
    oracle = BlackBoxOracle(HalfPlaneModel(), 300, dim=2)
    seed = half_plane_seed()
    pools, _ = explore_re(seed, oracle, REConfig(b_explore=300), rng)
    assert len(pools.explored_legit) + len(pools.explored_malicious) == 300
    assert (pools.n_seed_legit, pools.n_seed_malicious) == (2, 2)
    assert (HalfPlaneModel().predict(pools.explored_legit) == 0).all()
    assert (HalfPlaneModel().predict(pools.explored_malicious) == 1).all()
    np.testing.assert_array_equal(pools.legit[:2], seed.of_label(0))


def test_constant_legitimate_oracle(rng):
    oracle = BlackBoxOracle(ConstantModel(0), 100, dim=2)
    pools, sur = explore_re(half_plane_seed(), oracle, REConfig(b_explore=100), rng)
    assert len(pools.explored_legit) == 100 and len(pools.explored_malicious) == 0
    assert len(pools.malicious) == 2
    assert isinstance(sur, SurrogateModel)


def test_explore_contracts(rng):
    only_legit = Dataset("l", [[0.1, 0.1], [0.2, 0.2]], [0, 0])
    with pytest.raises(ContractError):
        explore_re(only_legit, BlackBoxOracle(ConstantModel(0), 10, 2), REConfig(b_explore=10), rng)
    short = BlackBoxOracle(ConstantModel(0), 5, 2)
    with pytest.raises(BudgetExhausted):
        explore_re(half_plane_seed(), short, REConfig(b_explore=10), rng)
    assert short.used == 0
    with pytest.raises(ContractError):
        REConfig(lambda_max=0)


def test_fidelity_examples():
    ref = Dataset("ref", GRID, HalfPlaneModel().predict(GRID))
    assert surrogate_fidelity(HalfPlaneModel(), ref) == 1.0
    flipped = Dataset("f", GRID, 1 - HalfPlaneModel().predict(GRID))
    assert surrogate_fidelity(HalfPlaneModel(), flipped) == 0.0
    # a constant predictor on a half-split grid agrees half the time
    assert surrogate_fidelity(ConstantModel(0), ref) == pytest.approx(0.5)
    with pytest.raises(ContractError):
        surrogate_fidelity(ConstantModel(0), Dataset("e", np.zeros((0, 2)), []))


def test_exploit_outputs_validated_and_free(rng):
    oracle = BlackBoxOracle(HalfPlaneModel(), 400, dim=2)
    cfg = REConfig(b_explore=400, n_attack=500, local_budget=1000)
    pools, sur = explore_re(half_plane_seed(), oracle, cfg, rng)
    used = oracle.used
    attacks = exploit_re(pools, sur, cfg, rng)
    assert oracle.used == used
    assert len(attacks) == 500
    assert attacks.unvalidated == 0
    assert (sur.predict(attacks.samples) == 0).all()
    assert (attacks.samples >= 0).all() and (attacks.samples <= 1).all()


def test_exploit_reports_unvalidated(rng):
    # surrogate that rejects everything: every sample exhausts its regenerations
    pools = ExplorationPools(np.array([[0.2, 0.2]]), np.array([[0.8, 0.8]]), 1, 1)
    cfg = REConfig(n_attack=20, local_budget=10)
    attacks = exploit_re(pools, SurrogateModel(ConstantModel(1)), cfg, rng)
    assert len(attacks) == 20 and attacks.unvalidated == 20


def test_exploit_needs_legitimate_pool(rng):
    pools = ExplorationPools(np.zeros((0, 2)), np.array([[0.8, 0.8]]), 0, 1)
    with pytest.raises(AttackInfeasible):
        exploit_re(pools, SurrogateModel(ConstantModel(0)), REConfig(), rng)


def test_custom_surrogate_trainer(rng):
    pools = ExplorationPools(np.array([[0.1, 0.1], [0.2, 0.3]]), np.array([[0.9, 0.8]]), 2, 1)
    seen = []
    cfg = REConfig(surrogate_trainer=lambda d: seen.append(len(d)) or train_linear(d))
    sur = train_surrogate(pools, cfg)
    assert seen == [3]
    assert sur.predict(np.array([0.1, 0.1])) == 0


def test_exploration_is_reproducible():
    runs = []
    for _ in range(2):
        oracle = BlackBoxOracle(HalfPlaneModel(), 200, dim=2)
        pools, sur = explore_re(half_plane_seed(), oracle, REConfig(b_explore=200), np.random.default_rng(3))
        runs.append((pools.legit, sur.linear.w))
    np.testing.assert_array_equal(runs[0][0], runs[1][0])
    np.testing.assert_array_equal(runs[0][1], runs[1][1])
