"""Time the compiled and NumPy kernel backends on identical inputs.

Usage: python benchmarks/bench_kernels.py [--n 20000] [--repeat 5] [--json]
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from lpnorm_minimax.kernels import backends


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n: int, rng: np.random.Generator) -> dict:
    x1 = rng.normal(size=n)
    h1 = 0.2
    lo1, dx1 = x1.min() - h1 - 0.01, h1 / 16
    ng1 = int((x1.max() + h1 + 0.01 - lo1) / dx1) + 2
    x2 = rng.normal(size=(n // 4, 2))
    h2 = (0.3, 0.3)
    lo2 = x2.min(axis=0) - 0.31
    dx2 = (h2[0] / 8, h2[1] / 8)
    ng2 = tuple(int(v) for v in (x2.max(axis=0) + 0.31 - lo2) / dx2 + 2)
    xp = np.ascontiguousarray(np.sort(rng.uniform(size=(n, 1)), axis=0))
    xp2 = rng.normal(size=(n // 4, 2))
    xp2 = np.ascontiguousarray(xp2[np.argsort(xp2[:, 0])])
    return {
        "kde_grid_1d": lambda k: k.kde_grid_1d(x1, h1, lo1, dx1, ng1),
        "kde_grid_2d": lambda k: k.kde_grid_2d(x2, *h2, *lo2, *dx2, *ng2),
        "pair_kernel_sum_1d": lambda k: k.pair_kernel_sum(xp, np.array([0.02])),
        "pair_kernel_sum_2d": lambda k: k.pair_kernel_sum(xp2, np.array([0.2, 0.2])),
    }


def main(argv=None) -> dict:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    impls = backends()
    results = {}
    for name, fn in cases(args.n, np.random.default_rng(args.seed)).items():
        row = {}
        outs = {}
        for bname, mod in impls.items():
            outs[bname] = np.asarray(fn(mod))
            row[bname] = _best(lambda: fn(mod), args.repeat)
        if len(outs) == 2:
            a, b = outs["cython"], outs["python"]
            row["max_rel_diff"] = float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
            row["speedup"] = row["python"] / row["cython"]
        results[name] = row
    if args.json:
        print(json.dumps(results, indent=2))
    else:
        print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in impls) + f"{'speedup':>10}{'rel diff':>12}")
        for name, row in results.items():
            line = f"{name:<22}" + "".join(f"{row[b]:>11.4f}s" for b in impls)
            if "speedup" in row:
                line += f"{row['speedup']:>9.1f}x{row['max_rel_diff']:>12.1e}"
            print(line)
    return results


if __name__ == "__main__":
    main()
