"""Closed form vs exact solve vs Monte Carlo on the four canonical graphs."""

import argparse
import itertools

from glauber_retention import closedform
from glauber_retention.core import ModelParams, linear_chain, triangle, uncoupled
from glauber_retention.dynamics import SimulationConfig, estimate_retention
from glauber_retention.exact import retention_time_exact

BUILDERS = {
    "single": lambda s, h: uncoupled(1, h),
    "uncoupled3": lambda s, h: uncoupled(3, h),
    "triangle": triangle,
    "linear3": linear_chain,
}

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    params = ModelParams()
    cfg = SimulationConfig(seed=args.seed, n_samples=args.samples)
    print(f"{'topology':<11}{'bs':>5}{'bh':>5}{'closed':>14}{'exact':>14}{'mc':>12}{'z':>7}")
    for name, (bs, bh) in itertools.product(BUILDERS, itertools.product([0.0, 1.0], [0.0, 1.0])):
        topo = BUILDERS[name](bs, bh)
        cf = closedform.FORMULAS[name](bh, bs)
        ex = retention_time_exact(topo, params)
        est = estimate_retention(topo, params, cfg)
        z = (est.mean_events - ex) / est.std_error
        print(f"{name:<11}{bs:>5}{bh:>5}{cf:>14.6f}{ex:>14.6f}{est.mean_events:>12.4f}{z:>7.2f}")
