"""Benchmark the compiled path kernels against the numpy fallback.

Runs the chain workload (two-state kernel, martingale accumulation) and the
torus workload (two-harmonic observable) on every importable backend,
checks that the backends agree, and prints a timing table.

    python benchmarks/bench_kernels.py [--paths N] [--n STEPS] [--threads K]
"""

import argparse
import time

import numpy as np

from qclt import kernels
from qclt.chain import center_observable, make_chain
from qclt.group_walk import GOLDEN_ALPHA
from qclt.martingale import poisson_solve
from qclt.simulate import cumulative_rows


def bench_chain(backend, paths, steps, threads):
    chain = make_chain(["0", "1"], [[0.75, 0.25], [0.25, 0.75]])
    f = center_observable(chain, [1.0, -1.0])
    scheme = poisson_solve(chain, f)
    args = (cumulative_rows(chain), f.values,
            np.ascontiguousarray(scheme.diff_kernel), 0, steps, paths, 7)
    t0 = time.perf_counter()
    out = kernels.run_chain_paths(*args, workers=threads, backend=backend)
    return time.perf_counter() - t0, out


def bench_torus(backend, paths, steps, threads):
    omegas = np.array([2 * np.pi, 4 * np.pi])
    ccos = np.array([1.0, 0.25])
    csin = np.array([0.0, -0.1])
    t0 = time.perf_counter()
    out = kernels.run_torus_paths(GOLDEN_ALPHA, 0.5, omegas, ccos, csin,
                                  0.0, steps, paths, 7,
                                  workers=threads, backend=backend)
    return time.perf_counter() - t0, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=100_000)
    parser.add_argument("--n", type=int, default=4096)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    backends = list(kernels.available_backends())
    print(f"backends: {backends}  paths={args.paths} steps={args.n} "
          f"threads={args.threads}")
    results = {}
    for workload, bench in (("chain", bench_chain), ("torus", bench_torus)):
        times = {}
        outputs = {}
        for backend in backends:
            elapsed, out = bench(backend, args.paths, args.n, args.threads)
            times[backend] = elapsed
            outputs[backend] = out
        if len(backends) == 2:
            a, b = outputs["python"], outputs["compiled"]
            if workload == "chain":
                assert np.array_equal(a[0], b[0]) and np.array_equal(a[2], b[2]), \
                    "chain backends disagree"
            else:
                assert np.allclose(a[0], b[0], atol=1e-9), "torus backends disagree"
        results[workload] = times
    print(f"{'workload':<8} " + " ".join(f"{b:>12}" for b in backends)
          + ("      speedup" if len(backends) == 2 else ""))
    for workload, times in results.items():
        row = f"{workload:<8} " + " ".join(f"{times[b]:>11.3f}s" for b in backends)
        if len(backends) == 2:
            row += f"  {times['python'] / times['compiled']:>10.1f}x"
        print(row)


if __name__ == "__main__":
    main()
