#!/usr/bin/env python3
"""Compare the numba and numpy simulation backends on the bundled scenario.

Runs the same seeds on both backends, reports wall time per run, and checks
that the two backends produce bit-identical series (they evaluate the same
floating-point expressions).

Usage: python benchmarks/bench_backends.py [--seeds N] [--protocol eddeec]
"""

import argparse
import time

import numpy as np

from deecsim import Protocol, run
from deecsim.cli import load_spec


def time_runs(configs, backend):
    times = []
    results = []
    for config in configs:
        start = time.perf_counter()
        results.append(run(config, backend=backend))
        times.append(time.perf_counter() - start)
    return np.array(times), results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=5, help="number of runs per backend")
    parser.add_argument("--protocol", default="eddeec",
                        choices=[p.value for p in Protocol])
    args = parser.parse_args()

    spec = load_spec("paper-sec3")
    protocol = Protocol(args.protocol)
    configs = [spec.network_config(protocol, seed) for seed in spec.seeds[: args.seeds]]

    # first numba call compiles the kernels; time it separately
    start = time.perf_counter()
    warmup = run(configs[0], backend="numba")
    jit_time = time.perf_counter() - start

    numba_times, numba_results = time_runs(configs, "numba")
    numpy_times, numpy_results = time_runs(configs, "numpy")

    rounds = np.array([r.rounds for r in numba_results])
    identical = all(
        np.array_equal(a.residual_j, b.residual_j)
        and np.array_equal(a.alive, b.alive)
        and np.array_equal(a.packets_bs, b.packets_bs)
        for a, b in zip(numba_results, numpy_results)
    )
    assert np.array_equal(warmup.residual_j, numba_results[0].residual_j)

    print(f"protocol={protocol.value}  runs={args.seeds}  "
          f"rounds/run: min={rounds.min()} max={rounds.max()}")
    print(f"numba cold (includes JIT): {jit_time:.2f} s")
    print(f"{'backend':<8} {'mean s/run':>11} {'min':>8} {'max':>8}")
    for name, times in (("numba", numba_times), ("numpy", numpy_times)):
        print(f"{name:<8} {times.mean():>11.3f} {times.min():>8.3f} {times.max():>8.3f}")
    print(f"speedup (numpy/numba): {numpy_times.mean() / numba_times.mean():.1f}x")
    print(f"backends bit-identical: {identical}")
    if not identical:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
