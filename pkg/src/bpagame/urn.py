"""Polya-urn shadow of the BPA graph process.

Only the red/blue ball counts are tracked: the red count equals the red
degree sum d_t(R).  The urn also counts cut edges, since a step adds a cut
edge exactly when it adds one ball of each color.

The urn reads the same three-uniforms-per-step stream as the exact graph
simulator and makes the same color decisions, so for a given seed its alpha
path coincides with ``graph.run(..., mode=EXACT)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .model import Color, DomainError, ModelParams, p_same

_BLOCK_STEPS = 1 << 16


@dataclass(frozen=True)
class UrnState:
    red_balls: int = 1
    blue_balls: int = 1
    t: int = 0
    cut: int = 1

    def __post_init__(self):
        if self.red_balls < 1 or self.blue_balls < 1:
            raise DomainError("the urn needs at least one ball of each color")
        if (self.red_balls + self.blue_balls) % 2:
            raise DomainError("ball total must be even (two endpoints per edge)")

    @property
    def total(self) -> int:
        return self.red_balls + self.blue_balls

    @property
    def alpha(self) -> float:
        return self.red_balls / self.total

    @property
    def cut_fraction(self) -> float:
        return self.cut / (self.total // 2)


@dataclass
class UrnTrajectory:
    alpha_series: np.ndarray
    cut_series: np.ndarray
    final_state: UrnState


def _increment(red: bool, same: bool) -> int:
    if same:
        return 2 if red else 0
    return 1


def urn_step(state: UrnState, params: ModelParams, rng: np.random.Generator) -> UrnState:
    """One arrival: draw N in {0, 1, 2} new red balls, add N red and 2 - N blue."""
    red = rng.random() < params.r
    color = Color.RED if red else Color.BLUE
    same = rng.random() < p_same(color, state.alpha, params.pi)
    rng.random()  # pick slot of the shared stream layout; unused by the urn
    n_red = _increment(red, same)
    return UrnState(
        state.red_balls + n_red,
        state.blue_balls + 2 - n_red,
        state.t + 1,
        state.cut + (n_red == 1),
    )


def sample_increments(state: UrnState, params: ModelParams, rng: np.random.Generator,
                      size: int) -> np.ndarray:
    """``size`` independent draws of N from ``state`` (the state is not advanced)."""
    x = state.alpha
    ps_red = p_same(Color.RED, x, params.pi)
    ps_blue = p_same(Color.BLUE, x, params.pi)
    u = rng.random((size, 2))
    red = u[:, 0] < params.r
    same = u[:, 1] < np.where(red, ps_red, ps_blue)
    return np.where(same, np.where(red, 2, 0), 1)


def _advance(ctr: np.ndarray, params: ModelParams, rng: np.random.Generator, steps: int,
             record: bool) -> tuple[np.ndarray, np.ndarray]:
    n_out = steps if record else 0
    alpha = np.empty(n_out)
    cut = np.empty(n_out)
    pi = params.pi
    done = 0
    while done < steps:
        block = min(_BLOCK_STEPS, steps - done)
        u = rng.random(K.UNIFORMS_PER_EXACT_STEP * block)
        if record:
            K.urn_steps(ctr, params.r, pi.rho_r, pi.rho_b, u,
                        alpha[done:done + block], cut[done:done + block], True)
        else:
            K.urn_steps(ctr, params.r, pi.rho_r, pi.rho_b, u, alpha, cut, False)
        done += block
    return alpha, cut


def urn_run(params: ModelParams, seed: int, horizon: int | None = None,
            initial: UrnState | None = None) -> UrnTrajectory:
    """Iterate ``urn_step`` for ``horizon`` steps (default ``params.n``)."""
    horizon = params.n if horizon is None else int(horizon)
    start = initial or UrnState()
    ctr = np.array([start.red_balls, start.blue_balls, start.cut, start.t], dtype=np.int64)
    alpha, cut = _advance(ctr, params, np.random.default_rng(seed), horizon, record=True)
    final = UrnState(int(ctr[0]), int(ctr[1]), int(ctr[3]), int(ctr[2]))
    return UrnTrajectory(
        np.concatenate([[start.alpha], alpha]),
        np.concatenate([[start.cut_fraction], cut]),
        final,
    )


def urn_final(params: ModelParams, seed: int, horizon: int | None = None,
              initial: UrnState | None = None) -> UrnState:
    """Like ``urn_run`` but keeps only the final state (for large ensembles)."""
    horizon = params.n if horizon is None else int(horizon)
    start = initial or UrnState()
    ctr = np.array([start.red_balls, start.blue_balls, start.cut, start.t], dtype=np.int64)
    _advance(ctr, params, np.random.default_rng(seed), horizon, record=False)
    return UrnState(int(ctr[0]), int(ctr[1]), int(ctr[3]), int(ctr[2]))
