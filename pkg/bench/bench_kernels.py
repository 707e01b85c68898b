"""Times the hot kernels with numba against the pure numpy fallback.

The parent process measures whatever variant the current environment gives
(numba when importable), then re-runs itself in a child process with
OPENTODA_NO_NUMBA=1 and prints both timings side by side. Results are per
call, best of five samples, after a warmup call that absorbs jit
compilation.

    python3 bench/bench_kernels.py [--n 64] [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def workloads(n):
    from opentoda import (
        FlowSpec,
        JacobiMatrix,
        direct_transform,
        evolve,
        hamiltonian_gradient,
        inverse_transform,
        lax_rhs,
    )

    rng = np.random.default_rng(0)
    J = JacobiMatrix(v=rng.uniform(-1.0, 1.0, n), c=rng.uniform(0.5, 1.5, n - 1))
    S = direct_transform(J)
    spec = FlowSpec(k=2, method="rk4-lax", t_final=0.2, dt=1e-3)
    return [
        (f"direct_transform n={n}", lambda: direct_transform(J)),
        (f"inverse_transform n={n}", lambda: inverse_transform(S)),
        (f"hamiltonian_gradient m=4 n={n}", lambda: hamiltonian_gradient(J, 4)),
        (f"lax_rhs k=3 n={n}", lambda: lax_rhs(J, 3)),
        (f"rk4-lax 200 steps n={n}", lambda: evolve(J, spec, record_every=10**6)),
    ]


def measure(n, repeat):
    results = {}
    for name, fn in workloads(n):
        fn()  # warmup; also triggers jit compilation
        t0 = time.perf_counter()
        fn()
        probe = time.perf_counter() - t0
        loops = max(1, int(0.02 / max(probe, 1e-7)))
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            for _ in range(loops):
                fn()
            best = min(best, (time.perf_counter() - t0) / loops)
        results[name] = best * 1e3
    return results


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, default=64, help="matrix size")
    ap.add_argument("--repeat", type=int, default=5, help="samples per workload")
    ap.add_argument("--json", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    here = measure(args.n, args.repeat)
    if args.json:
        json.dump(here, sys.stdout)
        return

    from opentoda._accel import HAS_NUMBA

    if not HAS_NUMBA:
        print("numba not importable here; timing the fallback against itself")
    env = dict(os.environ, OPENTODA_NO_NUMBA="1")
    child = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--n", str(args.n),
         "--repeat", str(args.repeat), "--json"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    fallback = json.loads(child.stdout)

    width = max(len(k) for k in here)
    print(f"{'workload':<{width}}  {'numba ms':>10}  {'numpy ms':>10}  {'speedup':>8}")
    for name, ms in here.items():
        other = fallback[name]
        print(f"{name:<{width}}  {ms:10.4f}  {other:10.4f}  {other / ms:7.1f}x")


if __name__ == "__main__":
    main()
