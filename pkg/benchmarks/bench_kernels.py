"""Time the compiled kernels against the pure Python fallback.

    python3 benchmarks/bench_kernels.py [--n 2000] [--d 50] [--repeat 3] [--json out.json]

Each kernel runs on the same inputs under both backends; outputs are
compared for equality before timings are reported.
"""
import argparse
import json
import time

import numpy as np

from onesided import kernels
from onesided.instances import random_regular


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(np.asarray(a), np.asarray(b))
    return a == b


def workloads(n, d, seed):
    rng = np.random.default_rng(seed)
    g = random_regular(n, d, seed)
    indptr, indices = g.csr_arrays
    colors = rng.integers(0, 3, n)
    noisy = colors.copy()
    noisy[rng.random(n) < 0.3] = -1
    eu, ev = g.edges[:, 0].astype(np.int64), g.edges[:, 1].astype(np.int64)
    dist = rng.random((n, 40))
    combos = np.array([rng.choice(40, 3, replace=False) for _ in range(500)], dtype=np.int64)
    return {
        "matching_cover": lambda m: m.matching_cover(eu, ev, n),
        "assign_combos": lambda m: m.assign_combos(dist, combos),
        "uncolor_fixpoint": lambda m: m.uncolor_fixpoint(indptr, indices, colors, 3, d / 18.0),
        "safe_recolor_fixpoint": lambda m: m.safe_recolor_fixpoint(indptr, indices, noisy, 3),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--d", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="write results here")
    args = ap.parse_args(argv)

    mods = kernels.backends()
    rows = []
    print(f"n={args.n} d={args.d} backends={sorted(mods)} active={kernels.BACKEND}")
    print(f"{'kernel':24s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}  equal")
    for name, fn in workloads(args.n, args.d, args.seed).items():
        tp, outp = best_time(lambda: fn(mods["python"]), args.repeat)
        row = {"kernel": name, "python": tp}
        if "cython" in mods:
            tc, outc = best_time(lambda: fn(mods["cython"]), args.repeat)
            row.update(cython=tc, speedup=tp / tc if tc > 0 else float("inf"), equal=same(outp, outc))
            print(f"{name:24s} {tp:10.4f} {tc:10.4f} {row['speedup']:8.1f}  {row['equal']}")
        else:
            print(f"{name:24s} {tp:10.4f} {'-':>10s} {'-':>8s}  -")
        rows.append(row)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"n": args.n, "d": args.d, "results": rows}, fh, indent=2, sort_keys=True)
    return 0 if all(r.get("equal", True) for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
