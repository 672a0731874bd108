#!/usr/bin/env python3
"""Long IDRM run at a constant ambient level; prints the molecule budget."""
import argparse

import numpy as np

from mcdds.idrm import EndogenousPulseTrain, IdrmConfig, simulate
from mcdds.quantities import PER_SAMPLE, PER_UM3, SECOND, TimeGrid, TimeSeries


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=1_000_000)
    ap.add_argument("--lam", type=float, default=2.0, help="mean arrivals per step")
    ap.add_argument("--capacity", type=int, default=5_000)
    ap.add_argument("--quantum", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    g = TimeGrid(0.0, 0.1, args.steps, SECOND)
    lam = TimeSeries(g, np.full(g.n, args.lam), PER_SAMPLE)
    amb = TimeSeries(g, np.zeros(g.n), PER_UM3)
    pulses = EndogenousPulseTrain.periodic(0.0, g.t_end, 1.0, 2e-6)
    cfg = IdrmConfig(capacity=args.capacity, release_quantum=args.quantum)
    run = simulate(cfg, amb, pulses, args.seed, intensity=lam)
    a, r, o = run.tallies
    print(f"absorbed {a}  released {r}  overflow {o}  final {run.final.stored}")
    print(f"balance holds: {a - r == run.final.stored}")


if __name__ == "__main__":
    main()
