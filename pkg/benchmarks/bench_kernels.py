"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--sizes 200 400 800] [--repeat 3]
"""

import argparse
import random
import time

from rdfexchange import kernels


def random_edges(rng, n, labels, m):
    return [(rng.randrange(n), rng.randrange(labels), rng.randrange(n)) for _ in range(m)]


def best_of(repeat, fn):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 400, 800])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    impls = kernels.backends()
    if len(impls) == 1:
        print("compiled extension not built; only the Python kernels are available")
    rng = random.Random(a.seed)
    print(f"{'kernel':<12}{'nodes':>7}{'edges':>8}" + "".join(f"{name:>12}" for name in impls)
          + ("   speedup" if len(impls) > 1 else ""))
    for n in a.sizes:
        left = random_edges(rng, n, 4, 3 * n)
        right = random_edges(rng, n, 4, 3 * n)
        start = bytearray([1]) * (n * n)
        sim = {name: best_of(a.repeat, lambda impl=impl: kernels.refine_simulation(
            n, n, left, right, bytearray(start), impl)) for name, impl in impls.items()}
        init = [rng.randrange(2) for _ in range(n)]
        bis = {name: best_of(a.repeat, lambda impl=impl: kernels.bisim_blocks(
            n, left, init, impl)) for name, impl in impls.items()}
        for label, times in (("simulation", sim), ("bisim", bis)):
            row = f"{label:<12}{n:>7}{3 * n:>8}" + "".join(f"{t * 1000:>10.1f}ms" for t in times.values())
            if len(times) > 1:
                row += f"   {times['python'] / times['cython']:>6.1f}x"
            print(row)


if __name__ == "__main__":
    main()
