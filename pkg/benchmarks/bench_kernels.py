"""Time the compiled kernels against the pure-Python fallback on typical inputs.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--size N]
"""
import argparse
import time

import numpy as np

from kostlab.kernels import available_backends, load_backend


def workloads(size, rng):
    t = np.linspace(-1.0, 1.0, size)
    A, B = np.meshgrid(t, t, indexing="ij")
    f = np.sin(9 * A) * np.cos(7 * B) + 0.003 * rng.standard_normal(A.shape)
    center = 0.25 * (f[:-1, :-1] + f[1:, :-1] + f[:-1, 1:] + f[1:, 1:])
    n = size * size
    edges = rng.integers(0, n, size=(2 * n, 2))
    s = np.linspace(0, 2 * np.pi, 4 * size, endpoint=False)
    knot = np.column_stack([np.sin(s) + 2 * np.sin(2 * s), np.cos(s) - 2 * np.cos(2 * s),
                            -np.sin(3 * s)])
    return {
        "trace_contours": lambda k: k.trace_contours(f, center),
        "label_components": lambda k: k.label_components(n, edges),
        "segment_crossings": lambda k: k.segment_crossings(knot[:, :2]),
        "min_pair_distance": lambda k: k.min_pair_distance(knot, 8),
    }


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--size", type=int, default=200, help="grid side / curve scale")
    args = ap.parse_args(argv)
    backends = available_backends()
    jobs = workloads(args.size, np.random.default_rng(0))
    print(f"{'kernel':20s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, job in jobs.items():
        times = [best_of(lambda: job(load_backend(b)), args.repeat) for b in backends]
        row = f"{name:20s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
