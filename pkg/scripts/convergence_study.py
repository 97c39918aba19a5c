"""Ensemble mean of the red share versus its limit as the horizon grows.

Prints mean, standard error, and the gap to the analytic fixed point for a
geometric sequence of horizons (urn process, seeds 0..trials-1).
"""
import argparse

import numpy as np

from bpagame.analysis import fixed_point
from bpagame.ensemble import mean_and_se, urn_ensemble
from bpagame.model import MixingMatrix, ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r", type=float, default=0.3)
    ap.add_argument("--rho-r", type=float, default=0.7)
    ap.add_argument("--rho-b", type=float, default=0.4)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--max-exp", type=int, default=6)
    ap.add_argument("--jobs", type=int, default=None)
    args = ap.parse_args()
    pi = MixingMatrix(args.rho_r, args.rho_b)
    params = ModelParams(args.r, pi)
    target = fixed_point(args.r, pi).alpha
    print(f"limit alpha = {target:.10f}")
    print(f"{'t':>9} {'mean':>12} {'se':>10} {'gap':>11} {'gap/se':>7}")
    for e in range(2, args.max_exp + 1):
        alpha, _ = urn_ensemble(params, range(args.trials), horizon=10**e, jobs=args.jobs)
        m, se = mean_and_se(alpha)
        ratio = abs(m - target) / se if se else np.nan
        print(f"{10**e:9d} {m:12.8f} {se:10.2e} {m - target:+11.2e} {ratio:7.2f}")


if __name__ == "__main__":
    main()
