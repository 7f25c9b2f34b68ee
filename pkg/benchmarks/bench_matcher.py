#!/usr/bin/env python3
"""Compare the compiled (numba) matcher kernel against the pure-Python one.

Usage: python3 benchmarks/bench_matcher.py [--sizes 16,32,64,128] [--reps 3]

Run with REDOSBR_PURE_PYTHON unset: both kernels are exercised from the same
process (the pure-Python function is always importable); the numba kernel is
warmed before timing so JIT compilation is excluded.
"""

from __future__ import annotations

import argparse
import time

from redosbr.automaton import compile_pattern
from redosbr.matcher import KERNEL_MODE, CompiledMfa, bt_run

CASES = [
    ("(a*)\\1b quadratic", r"(a*)\1b", lambda n: "a" * n),
    ("(a*)ba*\\1c two-block", r"(a*)ba*\1c", lambda n: "a" * n + "b" + "a" * 2 * n + "x"),
    ("(ab)c*\\1 safe", r"(ab)c*\1", lambda n: "ab" + "c" * n + "ab"),
]


def bench(kernel: str, compiled, text: str, reps: int) -> tuple:
    best = float("inf")
    steps = 0
    for _ in range(reps):
        t0 = time.perf_counter()
        out = bt_run(compiled, text, exhaustive=True, kernel=kernel)
        best = min(best, time.perf_counter() - t0)
        steps = out.steps
    return best, steps


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="16,32,64,128,256")
    ap.add_argument("--reps", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    kernels = ["python"] if KERNEL_MODE == "python" else ["numba", "python"]
    if KERNEL_MODE == "python":
        print("REDOSBR_PURE_PYTHON is set: numba kernel unavailable, "
              "benchmarking the pure-Python path only.\n")
    print(f"{'case':30} {'n':>6} " + "".join(f"{k + ' (s)':>14}" for k in kernels)
          + ("      speedup" if len(kernels) == 2 else "") + f" {'steps':>12}")
    for name, pattern, make in CASES:
        compiled = CompiledMfa(compile_pattern(pattern))
        if "numba" in kernels:
            bt_run(compiled, make(4), exhaustive=True, kernel="numba")  # warm JIT
        for n in sizes:
            text = make(n)
            times = {}
            steps = 0
            for k in kernels:
                times[k], steps = bench(k, compiled, text, args.reps)
            row = f"{name:30} {n:>6} " + "".join(f"{times[k]:>14.6f}" for k in kernels)
            if len(kernels) == 2:
                row += f" {times['python'] / times['numba']:>11.1f}x"
            print(row + f" {steps:>12}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
