"""Time the subset-enumeration kernel on both backends at detection-experiment size.

    python benchmarks/bench_enumerate.py [--nodes 8] [--grid 7] [--repeat 5]
"""
import argparse
import time

import numpy as np

from mprdisc import kernels
from mprdisc.channel import ChannelParams
from mprdisc.detectors import equal_area_radii
from mprdisc.signals import signature_bank


def case(nodes, grid, seed=0):
    ch = ChannelParams()
    S = signature_bank(range(nodes)).astype(float)
    amps = np.sqrt(ch.mean_power(equal_area_radii(1000.0, grid)))
    rng = np.random.default_rng(seed)
    tx = rng.random(nodes) < 0.5
    y = (rng.choice(amps, nodes) * tx) @ S + rng.normal(0, np.sqrt(ch.noise_power_N), S.shape[1])
    return y, S, amps, ch.noise_power_N


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=8)
    ap.add_argument("--grid", type=int, default=7)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    y, S, amps, N = case(args.nodes, args.grid)
    terms = (1 + args.grid) ** args.nodes
    ref = None
    print(f"nodes={args.nodes} grid={args.grid} likelihood terms={terms}")
    for backend in kernels.available_backends():
        best = float("inf")
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            out = kernels.subset_log_marginals(y, S, amps, N, backend=backend)
            best = min(best, time.perf_counter() - t0)
        agree = "" if ref is None else f"  max|diff|={np.max(np.abs(out - ref)):.2e}"
        ref = out if ref is None else ref
        print(f"{backend:>7}: {best * 1e3:9.1f} ms  ({terms / best / 1e6:6.1f} M terms/s){agree}")


if __name__ == "__main__":
    main()
