"""The two-player evolving-network game on top of the BPA process.

Each player picks its own homophily parameter (red: rho_r, blue: rho_b).
Payoffs weight the player's degree share against the normalised cut:

    U(R) = gamma * d(R)/d + (1 - gamma) * phi / (2 m)

and symmetrically for blue.  In the long-run limit d(R)/d -> alpha and
phi/m -> c, the steady cut fraction, so U(R) = gamma alpha + (1 - gamma) c/2.

Equilibria are searched on the strategy grid {0, 1/k, ..., 1}.  A profile is
a (weak) Nash equilibrium when each strategy lies in the player's
best-response set; best responses keep every strategy within ``tolerance``
of the maximum, so exact ties are reported rather than broken.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import graph
from .analysis import fixed_point, steady_cut_fraction
from .ensemble import mean_and_se, run_trials
from .model import Color, DomainError, MixingMatrix, ModelParams, p_bb_raw, p_rr_raw


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class GameConfig:
    r: float
    gamma: float
    grid_resolution: int = 20
    epsilon: float | None = None
    tolerance: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise DomainError(f"r must lie in (0, 1), got {self.r!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        if int(self.grid_resolution) != self.grid_resolution or self.grid_resolution < 2:
            raise DomainError(f"grid_resolution must be an integer >= 2, got {self.grid_resolution!r}")
        if self.epsilon is not None and not 0.0 < self.epsilon <= 1.0:
            raise DomainError(f"epsilon must lie in (0, 1], got {self.epsilon!r}")
        if self.tolerance < 0.0:
            raise DomainError("tolerance must be non-negative")

    @property
    def grid(self) -> np.ndarray:
        k = self.grid_resolution
        return np.arange(k + 1) / k

    @property
    def step(self) -> float:
        return self.epsilon if self.epsilon is not None else 1.0 / self.grid_resolution


@dataclass
class EquilibriumReport:
    r: float
    gamma: float
    grid_resolution: int
    equilibria: list[tuple[tuple[float, float], Stability]]
    best_response_table: dict[Color, dict[float, list[float]]] = field(repr=False)

    @property
    def profiles(self) -> set[tuple[float, float]]:
        return {p for p, _ in self.equilibria}

    def classification(self, profile: tuple[float, float]) -> Stability:
        return dict(self.equilibria)[profile]

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "gamma": self.gamma,
            "grid_resolution": self.grid_resolution,
            "equilibria": [
                {"rho_r": p[0], "rho_b": p[1], "classification": s.value}
                for p, s in self.equilibria
            ],
            "best_response_table": {
                c.name.lower(): {f"{opp:.6g}": brs for opp, brs in table.items()}
                for c, table in self.best_response_table.items()
            },
        }


# ---------------------------------------------------------------------------
# limit utilities


@lru_cache(maxsize=1 << 16)
def _limit_state(r: float, rho_r: float, rho_b: float) -> tuple[float, float]:
    pi = MixingMatrix(rho_r, rho_b)
    alpha = fixed_point(r, pi).alpha
    return alpha, steady_cut_fraction(r, pi, alpha)


def limit_utility(player: Color, r: float, pi: MixingMatrix, gamma: float) -> float:
    alpha, cut = _limit_state(float(r), pi.rho_r, pi.rho_b)
    share = alpha if Color(player) is Color.RED else 1.0 - alpha
    return gamma * share + (1.0 - gamma) * cut / 2.0


def potential(player: Color, r: float, pi: MixingMatrix, gamma: float, alpha: float) -> float:
    """Expected one-step increment of gamma * d(X) + (1 - gamma) * phi at share ``alpha``."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    prr = p_rr_raw(alpha, pi.rho_r)
    pbb = p_bb_raw(alpha, pi.rho_b)
    if Color(player) is Color.RED:
        return 1.0 - (1.0 - r) * pbb + r * (2.0 * gamma - 1.0) * prr
    return 1.0 - r * prr + (1.0 - r) * (2.0 * gamma - 1.0) * pbb


def _profile(responder: Color, own: float, opponent: float) -> MixingMatrix:
    if responder is Color.RED:
        return MixingMatrix(own, opponent)
    return MixingMatrix(opponent, own)


def response_utilities(responder: Color, opponent_rho: float, config: GameConfig,
                       strategies: np.ndarray | None = None) -> np.ndarray:
    strategies = config.grid if strategies is None else strategies
    return np.array([
        limit_utility(responder, config.r, _profile(responder, s, opponent_rho), config.gamma)
        for s in strategies
    ])


def best_response(responder: Color, opponent_rho: float, config: GameConfig) -> list[float]:
    """Grid strategies within ``config.tolerance`` of the best achievable utility."""
    responder = Color(responder)
    utils = response_utilities(responder, opponent_rho, config)
    keep = utils >= utils.max() - config.tolerance
    return [float(s) for s in config.grid[keep]]


def _in(value: float, strategies: list[float]) -> bool:
    return any(abs(value - s) <= 1e-12 for s in strategies)


def is_nash(profile: tuple[float, float], config: GameConfig) -> bool:
    rho_r, rho_b = profile
    return (_in(rho_r, best_response(Color.RED, rho_b, config))
            and _in(rho_b, best_response(Color.BLUE, rho_r, config)))


def stability_check(profile: tuple[float, float], config: GameConfig) -> Stability:
    """Classify a grid equilibrium under one-step unilateral perturbations.

    For every admissible move of one player by +-epsilon:
    (i)  the other player's strategy is still a best response, and
    (ii) the mover is strictly worse off than at its original strategy.
    All moves satisfying (i) and (ii) -> stable; all satisfying (ii) but some
    violating (i) -> unstable; anything else -> indeterminate.
    """
    eps = config.step
    tol = config.tolerance
    all_i = True
    all_ii = True
    for mover in (Color.RED, Color.BLUE):
        own = profile[0] if mover is Color.RED else profile[1]
        other = profile[1] if mover is Color.RED else profile[0]
        base = limit_utility(mover, config.r, _profile(mover, own, other), config.gamma)
        for moved in (own - eps, own + eps):
            if not -1e-12 <= moved <= 1.0 + 1e-12:
                continue
            moved = min(max(moved, 0.0), 1.0)
            after = limit_utility(mover, config.r, _profile(mover, moved, other), config.gamma)
            all_ii &= after < base - tol
            all_i &= _in(other, best_response(mover.complement, moved, config))
    if all_i and all_ii:
        return Stability.STABLE
    if all_ii:
        return Stability.UNSTABLE
    return Stability.INDETERMINATE


def best_response_table(config: GameConfig) -> dict[Color, dict[float, list[float]]]:
    return {
        c: {float(opp): best_response(c, float(opp), config) for opp in config.grid}
        for c in (Color.RED, Color.BLUE)
    }


def find_equilibria(config: GameConfig) -> EquilibriumReport:
    table = best_response_table(config)
    equilibria = []
    for rho_r in config.grid:
        for rho_b in config.grid:
            rho_r, rho_b = float(rho_r), float(rho_b)
            if _in(rho_r, table[Color.RED][rho_b]) and _in(rho_b, table[Color.BLUE][rho_r]):
                equilibria.append(((rho_r, rho_b), stability_check((rho_r, rho_b), config)))
    return EquilibriumReport(config.r, config.gamma, config.grid_resolution, equilibria, table)


# ---------------------------------------------------------------------------
# finite-horizon Monte Carlo


def _finite_utility_trial(args) -> float:
    player, params, gamma, seed, mode = args
    state = graph.run(params, seed, mode).final_state
    d = state.d_red + state.d_blue
    own = state.d_red if player is Color.RED else state.d_blue
    return (gamma * own + (1.0 - gamma) * state.cut_count) / d


def finite_horizon_utility(player: Color, params: ModelParams, gamma: float, horizon: int,
                           trials: int, seed: int, mode: graph.Mode = graph.EXACT,
                           jobs: int | None = None) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of U_t at ``t = horizon``.

    Trial ``i`` uses seed ``seed + i``.
    """
    if horizon < 1:
        raise DomainError("horizon must be at least 1")
    p = ModelParams(params.r, params.pi, horizon)
    tasks = [(Color(player), p, gamma, seed + i, mode) for i in range(trials)]
    values = run_trials(_finite_utility_trial, tasks, jobs=jobs)
    return mean_and_se(values)
