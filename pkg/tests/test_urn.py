"""Urn shadow process: ball identity, drift, increment law, graph equivalence."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from bpagame import graph
from bpagame.analysis import drift_F, fixed_point, steady_cut_fraction
from bpagame.ensemble import mean_and_se, urn_ensemble
from bpagame.model import DomainError, MixingMatrix, ModelParams, step_outcome_distribution
from bpagame.urn import UrnState, sample_increments, urn_final, urn_run, urn_step

from conftest import within_pooled_se


def test_default_state():
    s = UrnState()
    assert (s.red_balls, s.blue_balls, s.t) == (1, 1, 0)
    assert s.alpha == 0.5


@pytest.mark.parametrize("red, blue", [(0, 2), (2, 0), (1, 2)])
def test_invalid_state(red, blue):
    with pytest.raises(DomainError):
        UrnState(red, blue)


def test_horizon_zero():
    traj = urn_run(ModelParams(0.3, MixingMatrix(0.7, 0.4)), seed=0, horizon=0)
    assert traj.alpha_series.tolist() == [0.5]


@given(st.floats(0.01, 0.99), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 2**31))
@settings(max_examples=50, deadline=None)
def test_ball_count_identity(r, rho_r, rho_b, seed):
    traj = urn_run(ModelParams(r, MixingMatrix(rho_r, rho_b)), seed, horizon=500)
    s = traj.final_state
    assert s.red_balls + s.blue_balls == 2 * (s.t + 1) == 1002
    totals = 2 * np.arange(1, 502)
    red = np.rint(traj.alpha_series * totals).astype(int)
    assert set(np.unique(np.diff(red))) <= {0, 1, 2}


def test_homophily_increments_are_monochromatic():
    rng = np.random.default_rng(1)
    params = ModelParams(0.999, MixingMatrix.homophily())
    s = UrnState()
    for _ in range(200):
        nxt = urn_step(s, params, rng)
        assert nxt.red_balls - s.red_balls in (0, 2)
        s = nxt
    assert s.red_balls > 300  # nearly every arrival is red


def test_heterophily_adds_one_red_ball_per_step():
    traj = urn_run(ModelParams(0.8, MixingMatrix.heterophily()), 4, horizon=1000)
    assert traj.final_state.red_balls == 1001


def test_python_step_matches_compiled_path():
    params = ModelParams(0.3, MixingMatrix(0.7, 0.4))
    rng = np.random.default_rng(11)
    s = UrnState()
    for _ in range(400):
        s = urn_step(s, params, rng)
    assert urn_final(params, 11, 400) == s


@pytest.mark.parametrize("pi", [MixingMatrix(0.7, 0.4), MixingMatrix.unbiased(),
                                MixingMatrix(0.2, 0.9)])
def test_same_stream_as_exact_graph(pi):
    params = ModelParams(0.3, pi, 3000)
    g = graph.run(params, 17)
    u = urn_run(params, 17)
    assert np.array_equal(g.alpha_series, u.alpha_series)
    assert np.array_equal(g.cut_series, u.cut_series)


def test_increment_distribution_chi_square():
    params = ModelParams(0.3, MixingMatrix(0.7, 0.4))
    state = UrnState(500, 500, 499, 1)
    draws = sample_increments(state, params, np.random.default_rng(7), 10**5)
    observed = np.bincount(draws, minlength=3)
    expected = step_outcome_distribution(0.5, params.pi, params.r) * draws.size
    _, p = stats.chisquare(observed, expected)
    assert p > 0.001


def test_one_step_drift():
    params = ModelParams(0.3, MixingMatrix(0.7, 0.4))
    state = UrnState(800, 1200, 999, 1)  # x = 0.4 at t = 999
    n = sample_increments(state, params, np.random.default_rng(2024), 10**6)
    delta = (state.red_balls + n) / (state.total + 2) - state.alpha
    expected = (drift_F(0.4, params.r, params.pi) - 0.4) / (999 + 2)
    assert within_pooled_se(*mean_and_se(delta), expected)


@pytest.mark.slow
@pytest.mark.parametrize("pi", [MixingMatrix(0.7, 0.4), MixingMatrix.homophily()],
                         ids=["custom", "homophily"])
def test_long_horizon_mean(pi):
    params = ModelParams(0.3, pi)
    alpha, cut = urn_ensemble(params, range(100), horizon=10**6, jobs=1)
    fp = fixed_point(params.r, pi).alpha
    assert within_pooled_se(*mean_and_se(alpha), fp)
    if pi == MixingMatrix(0.7, 0.4):
        assert within_pooled_se(*mean_and_se(cut), steady_cut_fraction(params.r, pi))
