"""Time the ensemble kernels on the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0] [--json out.json]

Both backends draw identical particles, so the script also checks that
their curves agree before reporting timings.  Numba compile time is paid
in a warm-up call and excluded.
"""

import argparse
import json
import os
import time

import numpy as np

from motional import kernels
from motional.distributions import StableLaw, StudentT, TruncatedDistribution
from motional.montecarlo import CollisionProcess, SimulationConfig, log_r0_table, simulate

CASES = [
    # name, distribution, process, t_max, points, N
    ("free_stable", StableLaw(0.5, 1.0), CollisionProcess.none(), 3.0, 31, 200_000),
    ("poisson_student", StudentT(0.5), CollisionProcess.poisson(10.0), 3.0, 61, 50_000),
    ("fixed_gauss", StableLaw(2.0, 0.5), CollisionProcess.fixed(0.05), 3.0, 31, 50_000),
    ("truncated_fast", TruncatedDistribution(StudentT(0.5), 1e3), CollisionProcess.poisson(1e3),
     0.5, 2, 20_000),
]


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def run(repeat=3, scale=1.0):
    rows = []
    for name, dist, proc, t_max, points, n in CASES:
        n = max(2, int(n * scale))
        for est in ("phase", "conditional"):
            cfg = SimulationConfig(dist, proc, np.linspace(0, t_max, points), n, seed=1,
                                   estimator=est)
            if est == "conditional":
                log_r0_table(dist, t_max)  # table build is setup, not kernel time
            row = {"case": name, "estimator": est, "N": n,
                   "events": n * proc.expected_events(t_max)}
            curves = {}
            for backend in kernels.available_backends():
                simulate(SimulationConfig(dist, proc, cfg.times, 64, 1, est), backend=backend)
                dt, res = _time(lambda: simulate(cfg, backend=backend), repeat)
                row[backend] = dt
                curves[backend] = res.values
            if len(curves) == 2:
                row["max_diff"] = float(np.max(np.abs(curves["numba"] - curves["numpy"])))
                row["speedup"] = row["numpy"] / row["numba"]
            rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply every ensemble size")
    ap.add_argument("--json", help="also write the rows to this file")
    args = ap.parse_args()
    rows = run(args.repeat, args.scale)
    print(f"cores: {os.cpu_count()}, numba threads: {kernels.set_threads(None)}")
    head = f"{'case':<16}{'estimator':<12}{'N':>8}{'numba s':>10}{'numpy s':>10}{'speedup':>9}{'max diff':>10}"
    print(head)
    print("-" * len(head))
    for r in rows:
        print(f"{r['case']:<16}{r['estimator']:<12}{r['N']:>8}{r.get('numba', float('nan')):>10.3f}"
              f"{r['numpy']:>10.3f}{r.get('speedup', float('nan')):>9.1f}"
              f"{r.get('max_diff', float('nan')):>10.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
