"""Simulation of the evolving bi-populated network G_t under BPA(n, r, pi).

Vertices are integers; each edge endpoint is a "ball" stored in the pool of
its vertex's color, so a uniform index into a pool is a degree-weighted
vertex draw.  Two interchangeable attachment procedures are provided:

``ExactConditional``
    flip same-vs-other color with the closed-form acceptance probability,
    then draw degree-proportionally inside the chosen color.
``RejectionLoop``
    the literal two-stage procedure: tentative pick over all balls, accept
    with the mixing-matrix probability, restart on rejection.

Both induce the same distribution over graphs.  ``step`` is a plain-Python
reference implementation; ``run`` drives compiled kernels that consume the
random stream in exactly the same order, so the two agree bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels as K
from .model import Color, DomainError, ModelParams, p_bb_raw, p_rr_raw

RNG_ID = "numpy-PCG64/default_rng(seed)/float64-uniform-stream"

_BLOCK_STEPS = 1 << 16


class RejectionCapExceeded(RuntimeError):
    """The literal rejection loop restarted more often than allowed."""


@dataclass(frozen=True)
class ExactConditional:
    name = "exact"


@dataclass(frozen=True)
class RejectionLoop:
    cap: int = 10**6
    name = "rejection"


Mode = Union[ExactConditional, RejectionLoop]
EXACT = ExactConditional()


def parse_mode(name: str, cap: int = 10**6) -> Mode:
    key = name.strip().lower()
    if key in ("exact", "exactconditional", "exact_conditional"):
        return EXACT
    if key in ("rejection", "rejectionloop", "rejection_loop"):
        return RejectionLoop(cap=int(cap))
    raise DomainError(f"unknown attachment mode {name!r}; expected exact or rejection")


class ColoredGraphState:
    """Mutable multigraph with per-color ball pools.

    Arrays are preallocated and grown geometrically; the public attributes
    are views trimmed to the live size.
    """

    def __init__(self, vertex_colors, edges):
        colors = np.asarray(vertex_colors, dtype=np.int8)
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        nv, ne = colors.shape[0], edges.shape[0]
        self._colors = colors.copy()
        self._edges = edges.copy()
        degree = np.bincount(edges.ravel(), minlength=nv)
        balls_r = np.repeat(np.flatnonzero(colors == K.RED), degree[colors == K.RED])
        balls_b = np.repeat(np.flatnonzero(colors == K.BLUE), degree[colors == K.BLUE])
        self._pool_r = balls_r.astype(np.int64)
        self._pool_b = balls_b.astype(np.int64)
        cut = int(np.count_nonzero(colors[edges[:, 0]] != colors[edges[:, 1]])) if ne else 0
        self._ctr = np.array([nv, ne, balls_r.size, balls_b.size, cut, 0], dtype=np.int64)

    # live views -----------------------------------------------------------
    @property
    def vertex_colors(self) -> np.ndarray:
        return self._colors[: self._ctr[0]]

    @property
    def edges(self) -> np.ndarray:
        return self._edges[: self._ctr[1]]

    @property
    def ball_pool_red(self) -> np.ndarray:
        return self._pool_r[: self._ctr[2]]

    @property
    def ball_pool_blue(self) -> np.ndarray:
        return self._pool_b[: self._ctr[3]]

    @property
    def n_vertices(self) -> int:
        return int(self._ctr[0])

    @property
    def n_edges(self) -> int:
        return int(self._ctr[1])

    @property
    def d_red(self) -> int:
        return int(self._ctr[2])

    @property
    def d_blue(self) -> int:
        return int(self._ctr[3])

    @property
    def cut_count(self) -> int:
        return int(self._ctr[4])

    @property
    def t(self) -> int:
        return int(self._ctr[5])

    @property
    def alpha(self) -> float:
        return self.d_red / (self.d_red + self.d_blue)

    @property
    def cut_fraction(self) -> float:
        return self.cut_count / self.n_edges

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def copy(self) -> ColoredGraphState:
        new = object.__new__(ColoredGraphState)
        new._colors = self._colors.copy()
        new._edges = self._edges.copy()
        new._pool_r = self._pool_r.copy()
        new._pool_b = self._pool_b.copy()
        new._ctr = self._ctr.copy()
        return new

    def reserve(self, steps: int) -> None:
        """Make room for ``steps`` more arrivals."""
        nv, ne, dr, db = (int(v) for v in self._ctr[:4])
        self._colors = _grow(self._colors, nv, nv + steps)
        self._edges = _grow(self._edges, ne, ne + steps)
        self._pool_r = _grow(self._pool_r, dr, dr + 2 * steps)
        self._pool_b = _grow(self._pool_b, db, db + 2 * steps)

    def check_invariants(self) -> None:
        """Recompute every cached counter from scratch; raise on mismatch."""
        deg = self.degrees()
        colors = self.vertex_colors
        expect = {
            "d_red": int(deg[colors == K.RED].sum()),
            "d_blue": int(deg[colors == K.BLUE].sum()),
            "cut_count": cut_size(self),
        }
        got = {"d_red": self.d_red, "d_blue": self.d_blue, "cut_count": self.cut_count}
        if expect != got:
            raise AssertionError(f"cached counters {got} disagree with recount {expect}")
        if self.d_red + self.d_blue != 2 * self.n_edges:
            raise AssertionError("degree sum is not twice the edge count")
        pool_deg_r = np.bincount(self.ball_pool_red, minlength=self.n_vertices)
        pool_deg_b = np.bincount(self.ball_pool_blue, minlength=self.n_vertices)
        if not np.array_equal(pool_deg_r + pool_deg_b, deg):
            raise AssertionError("ball pools do not match vertex degrees")
        if np.any(colors[self.ball_pool_red] != K.RED) or np.any(colors[self.ball_pool_blue] != K.BLUE):
            raise AssertionError("ball filed under the wrong color")


def _grow(arr: np.ndarray, live: int, need: int) -> np.ndarray:
    if arr.shape[0] >= need:
        return arr
    size = max(need, 2 * arr.shape[0], 16)
    out = np.zeros((size,) + arr.shape[1:], dtype=arr.dtype)
    out[:live] = arr[:live]
    return out


@dataclass
class Trajectory:
    alpha_series: np.ndarray
    cut_series: np.ndarray
    final_state: ColoredGraphState


def init_default() -> ColoredGraphState:
    """One red and one blue vertex joined by a single edge."""
    return ColoredGraphState([K.RED, K.BLUE], [(0, 1)])


def init_custom(vertex_colors, edges) -> ColoredGraphState:
    """Start from an arbitrary seed graph.

    Each color must own at least one ball (positive degree sum), otherwise a
    perfectly heterophilic arrival could never attach.
    """
    colors = np.asarray([int(Color(c)) for c in vertex_colors], dtype=np.int8)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= colors.size):
        raise DomainError("edge endpoint refers to a missing vertex")
    state = ColoredGraphState(colors, edges)
    if state.d_red < 1 or state.d_blue < 1:
        raise DomainError(
            "initial graph needs at least one edge endpoint of each color "
            f"(got d_red={state.d_red}, d_blue={state.d_blue})"
        )
    return state


def cut_size(state: ColoredGraphState) -> int:
    e = state.edges
    c = state.vertex_colors
    return int(np.count_nonzero(c[e[:, 0]] != c[e[:, 1]]))


def degree_sums(state: ColoredGraphState) -> tuple[int, int]:
    deg = state.degrees()
    c = state.vertex_colors
    return int(deg[c == K.RED].sum()), int(deg[c == K.BLUE].sum())


def step(state: ColoredGraphState, params: ModelParams, rng: np.random.Generator,
         mode: Mode = EXACT) -> ColoredGraphState:
    """Add one vertex and one edge; ``state`` is updated in place and returned."""
    pi = params.pi
    state.reserve(1)
    ctr = state._ctr
    dr, db = int(ctr[2]), int(ctr[3])
    red = rng.random() < params.r
    if isinstance(mode, RejectionLoop):
        d = dr + db
        restarts = 0
        while True:
            i = K.pick_index.py_func(rng.random(), d)
            target_red = i < dr
            target = state._pool_r[i] if target_red else state._pool_b[i - dr]
            if red:
                acc = pi.rho_r if target_red else 1.0 - pi.rho_r
            else:
                acc = 1.0 - pi.rho_b if target_red else pi.rho_b
            if rng.random() < acc:
                break
            restarts += 1
            if restarts > mode.cap:
                raise RejectionCapExceeded(
                    f"more than {mode.cap} restarts at t={state.t} "
                    f"(d_red={dr}, d_blue={db}, rho_r={pi.rho_r}, rho_b={pi.rho_b})"
                )
    else:
        x = dr / (dr + db)
        ps = p_rr_raw(x, pi.rho_r) if red else p_bb_raw(x, pi.rho_b)
        same = rng.random() < ps
        u = rng.random()
        if red == same:
            target = state._pool_r[K.pick_index.py_func(u, dr)]
        else:
            target = state._pool_b[K.pick_index.py_func(u, db)]
    K.add_edge.py_func(state._colors, state._edges, state._pool_r, state._pool_b,
                       ctr, K.RED if red else K.BLUE, int(target))
    return state


def advance(state: ColoredGraphState, params: ModelParams, rng: np.random.Generator,
            steps: int, mode: Mode = EXACT) -> tuple[np.ndarray, np.ndarray]:
    """Run ``steps`` steps with the compiled kernels.

    Returns the alpha and cut-fraction values after each step.
    """
    state.reserve(steps)
    alpha = np.empty(steps)
    cut = np.empty(steps)
    pi = params.pi
    args = (state._colors, state._edges, state._pool_r, state._pool_b, state._ctr,
            params.r, pi.rho_r, pi.rho_b)
    if isinstance(mode, RejectionLoop):
        _advance_rejection(args, rng, steps, mode.cap, alpha, cut, state)
        return alpha, cut
    done = 0
    while done < steps:
        block = min(_BLOCK_STEPS, steps - done)
        u = rng.random(K.UNIFORMS_PER_EXACT_STEP * block)
        K.graph_exact(*args, u, alpha[done:done + block], cut[done:done + block])
        done += block
    return alpha, cut


def _advance_rejection(args, rng, steps, cap, alpha, cut, state):
    u = rng.random(4 * min(steps, _BLOCK_STEPS) + 16)
    pos = 0
    done = 0
    while done < steps:
        n_done, pos, status = K.graph_reject(*args, u, pos, steps - done, cap, alpha, cut, done)
        done += n_done
        if status == K.CAP_EXCEEDED:
            raise RejectionCapExceeded(
                f"more than {cap} restarts at t={state.t} "
                f"(d_red={state.d_red}, d_blue={state.d_blue}, rho={args[6]}, {args[7]})"
            )
        if status == K.NEED_MORE:
            extra = max(4 * min(steps - done, _BLOCK_STEPS), u.shape[0] - pos) + 16
            u = np.concatenate([u[pos:], rng.random(extra)])
            pos = 0


def run(params: ModelParams, seed: int, mode: Mode = EXACT,
        initial: ColoredGraphState | None = None) -> Trajectory:
    """Simulate ``params.n`` steps from the default (or given) seed graph."""
    state = init_default() if initial is None else initial.copy()
    alpha0, cut0 = state.alpha, state.cut_fraction
    rng = np.random.default_rng(seed)
    alpha, cut = advance(state, params, rng, params.n, mode)
    return Trajectory(np.concatenate([[alpha0], alpha]),
                      np.concatenate([[cut0], cut]), state)
