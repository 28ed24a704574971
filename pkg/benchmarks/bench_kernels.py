"""Time every kernel on each available backend.

Usage::

    python3 benchmarks/bench_kernels.py [--discs 20000] [--repeat 3]

Prints one line per (kernel, backend) with the best wall time and checks that
all backends return identical arrays.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from simart import kernels
from simart.kernels import NEVER, DiscHash


def make_discs(m: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    band = rng.integers(0, 10, m)
    rad = rng.uniform(0.05, 0.5, m) * 2.0 ** -(band + 1.0)
    return rng.uniform(-1, 1, (m, 2)), rad, band


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--discs", type=int, default=20_000)
    ap.add_argument("--resolution", type=int, default=2048)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    centers, rad, band = make_discs(args.discs)
    level = (band + 1).astype(np.uint8)
    N = args.resolution
    pts = np.random.default_rng(1).uniform(-1, 1, (200_000, 2))
    dh = DiscHash(centers, rad, band)

    def raster(impl):
        kill = np.full((N, N), NEVER, dtype=np.uint8)
        kernels.raster_kill_2d(centers[:, 0], centers[:, 1], rad, level, -1.0, -1.0, 2.0 / N,
                               kill, impl=impl)
        return kill

    def segment(impl):
        kill = np.full(1 << 20, NEVER, dtype=np.uint8)
        kernels.segment_kill([-1.0, 0.1], [1.0, 0.0], 2.0 / (1 << 20), centers, rad, level, kill,
                             impl=impl)
        return kill

    def points(impl):
        return dh.kill_levels(pts, impl=impl)

    print(f"active backend: {kernels.BACKEND}; {args.discs} discs")
    for name, fn in (("raster_kill_2d", raster), ("segment_kill", segment), ("point_kill", points)):
        results = {}
        for bname, impl in kernels.backends().items():
            dt, out = best_of(lambda: fn(impl), args.repeat)
            results[bname] = out
            print(f"{name:15s} {bname:7s} {dt * 1e3:10.1f} ms")
        outs = list(results.values())
        if not all(np.array_equal(outs[0], o) for o in outs[1:]):
            raise SystemExit(f"{name}: backends disagree")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
