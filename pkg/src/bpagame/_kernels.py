"""Compiled inner loops for the graph and urn simulators.

Every kernel consumes a pre-drawn array of uniforms so that the random
stream is owned by a ``numpy.random.Generator`` on the Python side.  Stream
layout per step:

* exact conditional sampling and the urn: 3 uniforms
  (arrival color, same-vs-other color, pick inside the chosen pool);
  the urn ignores the third.
* rejection loop: 1 uniform for the arrival color, then 2 per attempt
  (tentative pick over all balls, accept/reject).

Counter arrays:
  graph: [n_vertices, n_edges, d_red, d_blue, cut, t]
  urn:   [red, blue, cut, t]
"""
from numba import njit

from .model import p_bb_raw, p_rr_raw

RED = 0
BLUE = 1

OK = 0
NEED_MORE = 1
CAP_EXCEEDED = 2

UNIFORMS_PER_EXACT_STEP = 3

_p_rr = njit(cache=True)(p_rr_raw)
_p_bb = njit(cache=True)(p_bb_raw)


@njit(cache=True)
def pick_index(u, size):
    i = int(u * size)
    if i >= size:
        i = size - 1
    return i


@njit(cache=True)
def add_edge(colors, edges, pool_r, pool_b, ctr, v_color, target):
    v = ctr[0]
    m = ctr[1]
    colors[v] = v_color
    edges[m, 0] = v
    edges[m, 1] = target
    ctr[0] = v + 1
    ctr[1] = m + 1
    if v_color == RED:
        pool_r[ctr[2]] = v
        ctr[2] += 1
    else:
        pool_b[ctr[3]] = v
        ctr[3] += 1
    t_color = colors[target]
    if t_color == RED:
        pool_r[ctr[2]] = target
        ctr[2] += 1
    else:
        pool_b[ctr[3]] = target
        ctr[3] += 1
    if t_color != v_color:
        ctr[4] += 1
    ctr[5] += 1


@njit(cache=True)
def graph_exact(colors, edges, pool_r, pool_b, ctr, r, rho_r, rho_b, u,
                alpha_out, cut_out):
    steps = u.shape[0] // 3
    for s in range(steps):
        dr = ctr[2]
        db = ctr[3]
        x = dr / (dr + db)
        red = u[3 * s] < r
        if red:
            ps = _p_rr(x, rho_r)
        else:
            ps = _p_bb(x, rho_b)
        same = u[3 * s + 1] < ps
        if red == same:
            target = pool_r[pick_index(u[3 * s + 2], dr)]
        else:
            target = pool_b[pick_index(u[3 * s + 2], db)]
        add_edge(colors, edges, pool_r, pool_b, ctr, RED if red else BLUE, target)
        alpha_out[s] = ctr[2] / (ctr[2] + ctr[3])
        cut_out[s] = ctr[4] / ctr[1]


@njit(cache=True)
def graph_reject(colors, edges, pool_r, pool_b, ctr, r, rho_r, rho_b, u, pos,
                 steps, cap, alpha_out, cut_out, out_offset):
    """Run up to ``steps`` literal rejection-loop steps.

    Returns ``(steps_done, pos, status)``.  On ``NEED_MORE`` the returned
    position is the start of the unfinished step, whose draws must be
    replayed with more uniforms appended; state is only touched on
    acceptance, so replaying is exact.
    """
    n = u.shape[0]
    done = 0
    while done < steps:
        start = pos
        if pos >= n:
            return done, start, NEED_MORE
        red = u[pos] < r
        pos += 1
        dr = ctr[2]
        d = dr + ctr[3]
        restarts = 0
        while True:
            if pos + 2 > n:
                return done, start, NEED_MORE
            i = pick_index(u[pos], d)
            if i < dr:
                target = pool_r[i]
                target_red = True
            else:
                target = pool_b[i - dr]
                target_red = False
            if red:
                acc = rho_r if target_red else 1.0 - rho_r
            else:
                acc = 1.0 - rho_b if target_red else rho_b
            accepted = u[pos + 1] < acc
            pos += 2
            if accepted:
                break
            restarts += 1
            if restarts > cap:
                return done, start, CAP_EXCEEDED
        add_edge(colors, edges, pool_r, pool_b, ctr, RED if red else BLUE, target)
        alpha_out[out_offset + done] = ctr[2] / (ctr[2] + ctr[3])
        cut_out[out_offset + done] = ctr[4] / ctr[1]
        done += 1
    return done, pos, OK


@njit(cache=True)
def urn_steps(ctr, r, rho_r, rho_b, u, alpha_out, cut_out, record):
    steps = u.shape[0] // 3
    for s in range(steps):
        red_balls = ctr[0]
        blue_balls = ctr[1]
        x = red_balls / (red_balls + blue_balls)
        red = u[3 * s] < r
        if red:
            same = u[3 * s + 1] < _p_rr(x, rho_r)
        else:
            same = u[3 * s + 1] < _p_bb(x, rho_b)
        if red and same:
            ctr[0] += 2
        elif same:
            ctr[1] += 2
        else:
            ctr[0] += 1
            ctr[1] += 1
            ctr[2] += 1
        ctr[3] += 1
        if record:
            total = ctr[0] + ctr[1]
            alpha_out[s] = ctr[0] / total
            cut_out[s] = ctr[2] / (total // 2)
