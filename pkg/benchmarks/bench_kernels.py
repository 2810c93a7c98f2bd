#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Shapes cover the two regimes that matter: small training layers (where call
overhead dominates) and wide operator-table layers (where GEMM throughput
dominates).  Run after `pip install -e .`:

    python benchmarks/bench_kernels.py [--csv out.csv]
"""

import argparse
import time

import numpy as np

from butterflynet import kernels

SHAPES = [
    # (label,                  B,   S,  T, G,  ci, co)
    ("train layer0 (N=128)", 256, 16, 8, 1, 1, 24),
    ("train middle dense", 256, 8, 2, 1, 48, 96),
    ("train middle grouped", 256, 8, 2, 4, 12, 24),
    ("table1 middle grouped", 512, 16, 2, 64, 16, 32),
    ("table1 layer0", 64, 512, 32, 1, 1, 32),
]


def bench(fn, *args, reps=5):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--csv", default=None)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rows = []
    backends = kernels.available_backends()
    print(f"backends: {backends}")
    header = f"{'shape':24s} {'op':9s}" + "".join(f" {b:>12s}" for b in backends)
    print(header)
    for label, b, s, t, g, ci, co in SHAPES:
        x = rng.standard_normal((b, s, t, g, ci))
        w = rng.standard_normal((g, t, ci, co))
        grad = rng.standard_normal((b, s, g, co))
        for op_name, fn_args in (
            ("forward", lambda k: k.conv_forward(x, w)),
            ("bwd_in", lambda k: k.conv_backward_input(grad, w, x.shape)),
            ("bwd_wt", lambda k: k.conv_backward_weights(x, grad)),
        ):
            times = {}
            for name in backends:
                kernels.set_backend(name)
                import butterflynet.kernels as km

                mod = km._BACKENDS[name]
                times[name] = bench(fn_args, mod)
            rows.append((label, op_name, times))
            cells = "".join(f" {times[n] * 1e3:9.3f} ms" for n in backends)
            print(f"{label:24s} {op_name:9s}{cells}")
    kernels.set_backend("cython" if "cython" in backends else "numpy")
    if args.csv:
        lines = ["shape,op," + ",".join(backends)]
        for label, op_name, times in rows:
            lines.append(
                f"{label},{op_name}," + ",".join(repr(times[n]) for n in backends)
            )
        with open(args.csv, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
