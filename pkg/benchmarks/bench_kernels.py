"""Compare the compiled and pure-Python kernels on the same inputs.

Usage: python3 benchmarks/bench_kernels.py [count] [repeats]
"""

import sys
import time

import numpy as np

from sudlerlab import kernels
from sudlerlab.rotation import resolve_alpha


def bench(mod, alpha, count, repeats):
    limbs = alpha.to_limbs()
    frac, dist, terms, pref = (np.empty(count) for _ in range(4))
    timings = {}

    def clock(name, fn):
        best = float("inf")
        for _ in range(repeats):
            t = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t)
        timings[name] = best

    clock("fill_orbit", lambda: mod.fill_orbit(limbs, np.zeros_like(limbs), count, frac, dist))
    clock("eval_terms", lambda: mod.eval_terms(0, frac, dist, 0.0, 0.0, 0.0, 2 * np.e, terms))
    clock("compensated_prefix", lambda: mod.compensated_prefix(terms, pref, 0.0, 0.0))
    return timings, pref.copy()


def main(argv):
    count = int(float(argv[1])) if len(argv) > 1 else 10**6
    repeats = int(argv[2]) if len(argv) > 2 else 3
    alpha = resolve_alpha("golden", count)
    found = kernels.backends()
    results = {name: bench(mod, alpha, count, repeats) for name, mod in sorted(found.items())}
    print(f"{count} points, {alpha.bits}-bit orbit, best of {repeats}")
    print(f"{'kernel':<20}" + "".join(f"{name:>12}" for name in results) + ("     speedup" if len(results) > 1 else ""))
    for kernel in ("fill_orbit", "eval_terms", "compensated_prefix"):
        row = [results[name][0][kernel] for name in results]
        line = f"{kernel:<20}" + "".join(f"{t:>11.4f}s" for t in row)
        if "cython" in results and "python" in results:
            line += f"{results['python'][0][kernel] / results['cython'][0][kernel]:>11.1f}x"
        print(line)
    if len(results) > 1:
        outs = [r[1] for r in results.values()]
        print("outputs bit-identical:", all(np.array_equal(outs[0], o) for o in outs[1:]))


if __name__ == "__main__":
    main(sys.argv)
