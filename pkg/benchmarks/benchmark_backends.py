"""Compare the numpy and numba kernel backends on the same solve.

The backend is pinned per subprocess via the DAGMF_BACKEND environment
variable, so each measurement runs in a fresh interpreter. Numba timings
include a discarded warm-up solve so jit compilation is not measured.

Usage:
    python3 benchmarks/benchmark_backends.py [--sides 32 64] [--iters 200]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from dagmf import Lattice, ProblemSpec, SolverParams, build_superobject_dag, solve
from dagmf.kernels import backend_name
from helpers import overlapping_groups_spec, three_region_phantom

side, iters, repeats = json.loads(sys.argv[1])
rng = np.random.default_rng(7)
res = build_superobject_dag(overlapping_groups_spec())
data = three_region_phantom(rng, side, n_labels=5)
smooth = {lid: np.full((side, side), 0.15 * res.smoothness_scale.get(lid, 1))
          for lid in res.graph.labels if lid != res.graph.source}
problem = ProblemSpec.build(res.graph, Lattice((side, side)), data, smooth)
params = SolverParams(tol=1e-12, max_iters=iters)

solve(problem, SolverParams(max_iters=5))  # warm up / jit compile
best = float("inf")
for _ in range(repeats):
    t0 = time.perf_counter()
    _, report = solve(problem, params)
    best = min(best, time.perf_counter() - t0)
print(json.dumps({"backend": backend_name(), "side": side,
                  "iterations": report.iterations, "primal": report.primal,
                  "seconds": best}))
"""


def run_case(backend: str, side: int, iters: int, repeats: int) -> dict:
    env = dict(os.environ, DAGMF_BACKEND=backend,
               PYTHONPATH=os.path.join(os.path.dirname(__file__), "..", "tests"))
    out = subprocess.run([sys.executable, "-c", WORKER,
                          json.dumps([side, iters, repeats])],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sides", type=int, nargs="+", default=[32, 64])
    parser.add_argument("--iters", type=int, default=200,
                        help="fixed iteration count per solve")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed repetitions; the best is reported")
    args = parser.parse_args(argv)

    print(f"{'side':>6} {'backend':>8} {'iters':>6} {'seconds':>9} "
          f"{'it/s':>8} {'primal':>12}")
    for side in args.sides:
        rows = [run_case(b, side, args.iters, args.repeats)
                for b in ("numpy", "numba")]
        for row in rows:
            rate = row["iterations"] / row["seconds"]
            print(f"{row['side']:>6} {row['backend']:>8} "
                  f"{row['iterations']:>6} {row['seconds']:>9.3f} "
                  f"{rate:>8.1f} {row['primal']:>12.6f}")
        if abs(rows[0]["primal"] - rows[1]["primal"]) > 1e-9:
            print(f"  warning: backends disagree on the primal energy")
        print(f"  numba speedup: {rows[0]['seconds'] / rows[1]['seconds']:.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
