"""Pruned vs unpruned family sizes on hard random games, written as CSV.

    python3 scripts/pruning_experiment.py --instances 100 --out artifacts/pruning.csv
"""
import argparse
import time
from pathlib import Path

from mosg.corpus import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=100)
    ap.add_argument("--m", type=int, default=10)
    ap.add_argument("--l", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kmax", type=int, default=10)
    ap.add_argument("--timeout", type=float, default=10.0, help="seconds per instance and run")
    ap.add_argument("--out", default="artifacts/pruning.csv")
    a = ap.parse_args()
    Path(a.out).parent.mkdir(parents=True, exist_ok=True)
    cfg = ExperimentConfig(instances=a.instances, m=a.m, l=a.l, seed=a.seed,
                           horizons=tuple(range(1, a.kmax + 1)), timeout=a.timeout)
    t0 = time.perf_counter()
    rows, runs, screened = run_experiment(cfg, csv_path=a.out)
    print(f"{len(runs)} hard instances out of {screened} screened "
          f"({100 * (1 - len(runs) / screened):.1f}% had one polytope per state throughout)")
    print(f"{'k':>3} {'pruned':>9} {'unpruned':>9} {'T/O p':>6} {'T/O u':>6}")
    for r in rows:
        fmt = lambda x: "-" if x is None else f"{x:.2f}"
        print(f"{r.k:>3} {fmt(r.mean_pruned):>9} {fmt(r.mean_unpruned):>9} {r.timeouts_pruned:>6} {r.timeouts_unpruned:>6}")
    print(f"wrote {a.out} in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
