"""Limit utilities, best responses, equilibria and stability."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bpagame.analysis import fixed_point, steady_cut_fraction
from bpagame.game import (
    GameConfig,
    Stability,
    best_response,
    find_equilibria,
    finite_horizon_utility,
    is_nash,
    limit_utility,
    potential,
    response_utilities,
    stability_check,
)
from bpagame.model import Color, DomainError, MixingMatrix, ModelParams

from conftest import within_pooled_se

rho = st.floats(0.0, 1.0)
rate = st.floats(0.01, 0.99)
weight = st.floats(0.0, 1.0)


@pytest.mark.parametrize("kwargs", [dict(r=0.0, gamma=0.5), dict(r=0.3, gamma=1.2),
                                    dict(r=0.3, gamma=0.5, grid_resolution=1),
                                    dict(r=0.3, gamma=0.5, epsilon=0.0)])
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        GameConfig(**kwargs)


def test_default_epsilon_is_one_grid_step():
    c = GameConfig(0.3, 0.5, grid_resolution=8)
    assert c.step == 0.125 and len(c.grid) == 9
    assert GameConfig(0.3, 0.5, epsilon=0.01).step == 0.01


def test_limit_utility_examples():
    assert limit_utility(Color.RED, 0.3, MixingMatrix.homophily(), 1.0) == pytest.approx(0.3)
    assert limit_utility(Color.BLUE, 0.3, MixingMatrix.homophily(), 1.0) == pytest.approx(0.7)
    for c in Color:
        assert limit_utility(c, 0.3, MixingMatrix.heterophily(), 0.0) == 0.5


@given(rate, rho, rho, weight)
@settings(max_examples=200)
def test_utilities_sum_identity(r, rho_r, rho_b, gamma):
    pi = MixingMatrix(rho_r, rho_b)
    c = steady_cut_fraction(r, pi)
    total = limit_utility(Color.RED, r, pi, gamma) + limit_utility(Color.BLUE, r, pi, gamma)
    assert total == pytest.approx(gamma + (1 - gamma) * c, abs=1e-12)


@given(rate, rho, rho, weight)
@settings(max_examples=200)
def test_potential_is_twice_the_limit_utility(r, rho_r, rho_b, gamma):
    pi = MixingMatrix(rho_r, rho_b)
    alpha = fixed_point(r, pi).alpha
    for c in Color:
        assert potential(c, r, pi, gamma, alpha) == pytest.approx(
            2 * limit_utility(c, r, pi, gamma), abs=1e-11)


def test_potential_examples():
    assert potential(Color.RED, 0.3, MixingMatrix.heterophily(), 0.5, 0.5) == 1.0
    assert potential(Color.RED, 0.3, MixingMatrix.homophily(), 1.0, 0.3) == pytest.approx(0.6)
    for a in (0.1, 0.5, 0.9):
        assert potential(Color.RED, 0.3, MixingMatrix.heterophily(), 0.0, a) == 1.0
    with pytest.raises(DomainError):
        potential(Color.RED, 0.3, MixingMatrix.unbiased(), 0.5, 1.0)


def test_best_response_examples():
    assert best_response(Color.RED, 1.0, GameConfig(0.3, 1.0)) == [1.0]
    assert best_response(Color.BLUE, 0.5, GameConfig(0.3, 1.0, grid_resolution=10)) == [1.0]
    cfg = GameConfig(0.5, 0.2)
    for opp in cfg.grid:
        assert best_response(Color.RED, float(opp), cfg) == [0.0]


def test_low_weight_heterophily_is_not_dominant_at_small_r():
    # Against a mildly heterophilic blue player, red prefers a little homophily.
    assert best_response(Color.RED, 0.25, GameConfig(0.1, 0.0)) == [0.25]


@pytest.mark.parametrize("r", [0.1, 0.3, 0.5, 0.7])
def test_homophily_strictly_dominant_at_full_weight(r):
    cfg = GameConfig(r, 1.0)
    for c in Color:
        for opp in cfg.grid:
            assert best_response(c, float(opp), cfg) == [1.0]
    report = find_equilibria(cfg)
    assert report.equilibria == [((1.0, 1.0), Stability.STABLE)]


@pytest.mark.parametrize("r", [0.1, 0.3, 0.5])
@pytest.mark.parametrize("gamma", [0.51, 0.7, 0.9])
def test_utility_nondecreasing_in_own_homophily_above_half(r, gamma):
    cfg = GameConfig(r, gamma)
    for c in Color:
        for opp in cfg.grid:
            assert np.all(np.diff(response_utilities(c, float(opp), cfg)) >= 0)


@pytest.mark.parametrize("gamma, expected", [(0.7, {(1.0, 1.0)}), (0.2, {(0.0, 0.0)})])
def test_find_equilibria_examples(gamma, expected):
    report = find_equilibria(GameConfig(0.3, gamma))
    assert report.profiles == expected
    for p in report.profiles:
        assert is_nash(p, GameConfig(0.3, gamma))


def test_half_weight_utility_flat_along_pure_opponent():
    # At gamma = 1/2 the red utility depends on rho_r only through P_RR,
    # which drops out once blue plays a pure strategy.
    cfg = GameConfig(0.3, 0.5)
    for opp in (0.0, 1.0):
        u = response_utilities(Color.RED, opp, cfg)
        assert np.ptp(u) <= 1e-12
    assert np.ptp(response_utilities(Color.RED, 0.5, cfg)) > 1e-6


def test_argmax_invariant_under_positive_scaling():
    cfg = GameConfig(0.3, 0.7)
    for opp in cfg.grid:
        u = response_utilities(Color.RED, float(opp), cfg)
        for scale in (2.0, 1e3, 10_000.0):
            assert np.argmax(u * scale) == np.argmax(u)


def test_stability_at_full_weight():
    assert stability_check((1.0, 1.0), GameConfig(0.3, 1.0)) is Stability.STABLE


def test_report_serialises():
    d = find_equilibria(GameConfig(0.3, 0.7, grid_resolution=4)).to_dict()
    assert d["equilibria"] == [{"rho_r": 1.0, "rho_b": 1.0, "classification": "stable"}]
    assert set(d["best_response_table"]) == {"red", "blue"}


def test_finite_horizon_exact_cases():
    mean, se = finite_horizon_utility(Color.RED, ModelParams(0.3, MixingMatrix.heterophily()),
                                      1.0, 10**4, trials=20, seed=0, jobs=1)
    assert mean == 0.5 and se == 0.0
    mean, _ = finite_horizon_utility(Color.RED, ModelParams(0.3, MixingMatrix.homophily()),
                                     0.0, 10**4, trials=20, seed=0, jobs=1)
    assert mean == pytest.approx(1 / (2 * (10**4 + 1)), abs=1e-18)
    with pytest.raises(DomainError):
        finite_horizon_utility(Color.RED, ModelParams(0.3, MixingMatrix.unbiased()), 0.5, 0, 1, 0)


@pytest.mark.slow
def test_finite_horizon_matches_limit():
    params = ModelParams(0.3, MixingMatrix(0.7, 0.4))
    mean, se = finite_horizon_utility(Color.RED, params, 0.6, 10**5, trials=100, seed=0, jobs=1)
    assert within_pooled_se(mean, se, limit_utility(Color.RED, 0.3, params.pi, 0.6))
