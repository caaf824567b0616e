"""Benchmark the latent-chain kernels: compiled extension vs pure Python.

Runs the same chain (identical seed, identical draws) through both backends
over a range of sample sizes and reports wall time per chain plus the
speedup. Because the backends are bit-identical, the comparison is purely
about speed.

Usage:
    python3 benchmarks/bench_chain.py [--sizes 10,20,50] [--repeats 3]
        [--iterations 5500]
"""

import argparse
import time

from taulatent import ChainConfig, CopulaSpec, available_backends, run_chain, sample_copula


def time_chain(sample, config, backend, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        run_chain(sample, config=config, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="10,20,50",
                        help="comma-separated sample sizes")
    parser.add_argument("--repeats", type=int, default=3,
                        help="repeats per measurement (best is kept)")
    parser.add_argument("--iterations", type=int, default=5500,
                        help="chain length including burn-in")
    args = parser.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; timing pure Python only")

    sizes = [int(tok) for tok in args.sizes.split(",")]
    config = ChainConfig(total_iterations=args.iterations, seed=0)

    print(f"{'n':>6} {'compiled':>12} {'python':>12} {'speedup':>9}")
    for n in sizes:
        sample = sample_copula(CopulaSpec("gaussian", 0.5, n, seed=n))
        t_py = time_chain(sample, config, "python", args.repeats)
        if "compiled" in backends:
            t_c = time_chain(sample, config, "compiled", args.repeats)
            print(f"{n:>6} {t_c * 1e3:>10.1f}ms {t_py * 1e3:>10.1f}ms "
                  f"{t_py / t_c:>8.1f}x")
        else:
            print(f"{n:>6} {'-':>12} {t_py * 1e3:>10.1f}ms {'-':>9}")


if __name__ == "__main__":
    main()
