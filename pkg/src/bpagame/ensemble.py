"""Independent Monte-Carlo trials, optionally spread over worker processes.

Results always come back in task order, so the reduction is identical for
any number of jobs.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from . import graph, urn
from .model import ModelParams


def default_jobs() -> int:
    return os.cpu_count() or 1


def run_trials(fn: Callable, tasks: Iterable, jobs: int | None = None) -> list:
    tasks = list(tasks)
    jobs = default_jobs() if jobs is None else int(jobs)
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def mean_and_se(values: Sequence[float]) -> tuple[float, float]:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("no values")
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


def pooled_se(*ses: float) -> float:
    return math.sqrt(sum(s * s for s in ses))


def _urn_trial(args) -> tuple[float, float]:
    params, seed, horizon = args
    s = urn.urn_final(params, seed, horizon)
    return s.alpha, s.cut_fraction


def _graph_trial(args) -> tuple[float, float]:
    params, seed, mode = args
    s = graph.run(params, seed, mode).final_state
    return s.alpha, s.cut_fraction


def urn_ensemble(params: ModelParams, seeds: Sequence[int], horizon: int | None = None,
                 jobs: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Final alpha and cut fraction of the urn for each seed."""
    horizon = params.n if horizon is None else horizon
    out = run_trials(_urn_trial, [(params, int(s), horizon) for s in seeds], jobs)
    arr = np.array(out).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def graph_ensemble(params: ModelParams, seeds: Sequence[int], mode: graph.Mode = graph.EXACT,
                   jobs: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Final alpha and cut fraction of the graph process for each seed."""
    out = run_trials(_graph_trial, [(params, int(s), mode) for s in seeds], jobs)
    arr = np.array(out).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]
