"""Compare the compiled and pure-python kernel backends on one grid cell.

Runs the same cell through both backends, checks that the failure counts
match bit for bit, and reports wall times and the speedup. Usage:

    python benchmarks/bench_kernels.py --m 1024 --k 64 --trials 65536
"""

import argparse
import time

from hashtrick._kernels import available_backends, get_backend
from hashtrick.experiment import DEFAULT_SEED
from hashtrick.projection import FeatureHasher
from hashtrick.rng import mix64


def time_backend(name, tables, m, k, trials, exps, repeats):
    kernel = get_backend(name)
    best = None
    counts = None
    for _ in range(repeats):
        start = time.perf_counter()
        counts = kernel.run_cell(*tables, m, k, trials, exps)
        elapsed = time.perf_counter() - start
        best = elapsed if best is None else min(best, elapsed)
    return best, counts


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=1024, help="bucket count")
    parser.add_argument("--k", type=int, default=64, help="keys per trial")
    parser.add_argument("--trials", type=int, default=1 << 16)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats; the best run is reported")
    args = parser.parse_args()

    hasher = FeatureHasher.from_seed(mix64(args.seed, args.m, args.k),
                                     args.m, args.k)
    tables = (hasher.bucket_tab.outer, hasher.bucket_tab.inner,
              hasher.sign_tab.outer, hasher.sign_tab.inner)
    exps = list(range(1, 11))

    backends = available_backends()
    print(f"cell m={args.m} k={args.k} trials={args.trials} "
          f"({args.trials * args.k} keys), backends: {', '.join(backends)}")

    results = {}
    for name in backends:
        elapsed, counts = time_backend(name, tables, args.m, args.k,
                                       args.trials, exps, args.repeats)
        results[name] = (elapsed, counts.tolist())
        rate = args.trials * args.k / elapsed / 1e6
        print(f"  {name:8s} {elapsed * 1e3:9.1f} ms  ({rate:6.1f} Mkeys/s)")

    counts = {tuple(c) for _, c in results.values()}
    if len(counts) != 1:
        raise SystemExit("backends disagree on failure counts: " + repr(results))
    print(f"  failure counts match across backends: {sorted(counts)[0]}")

    if "compiled" in results and "python" in results:
        speedup = results["python"][0] / results["compiled"][0]
        print(f"  compiled is {speedup:.1f}x faster")


if __name__ == "__main__":
    main()
