"""Compare the compiled and pure-numpy kernels on the same workloads.

Both kernel modules are imported directly, so one process times both.
Prints a CSV: workload, M, batch, backend, seconds (best of --repeat),
and the speedup of numba over numpy.

    python benchmarks/bench_backends.py --sizes 64 256 1024 --batch 1 16
"""

import argparse
import csv
import sys
import time

import numpy as np

from rpup import _kernels_numba as knb
from rpup import _kernels_numpy as knp
from rpup.prng import derive_child_seed


def _setup(M, batch):
    total = M * (M - 1) // 2
    seeds = np.array([derive_child_seed(0xBE7C, k) for k in range(M)], dtype=np.uint64)
    size = max(-(-total // M), 1)
    x = np.random.default_rng(M).standard_normal((M, batch))
    return total, seeds, size, x


def rotate(k, M, batch):
    total, seeds, size, x = _setup(M, batch)
    buf = np.empty(size)

    def run():
        k.rotate_range(x, seeds, size, 0, total, M, buf)
    return run


def round_trip(k, M, batch):
    total, seeds, size, x = _setup(M, batch)
    buf = np.empty(size)

    def run():
        k.rotate_range(x, seeds, size, 0, total, M, buf)
        k.unrotate_range(x, seeds, size, 0, total, M, buf)
    return run


def angles(k, M, batch):
    spans = np.tile(np.arange(1, M, dtype=np.int64), M // 2)
    out = np.empty(spans.size)

    def run():
        k.angles_for_spans(np.uint64(7), 0, spans, out)
    return run


WORKLOADS = {"angles": angles, "rotate": rotate, "round_trip": round_trip}


def best_of(fn, repeat):
    fn()  # compile / warm caches
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024])
    p.add_argument("--batch", type=int, nargs="+", default=[1, 16])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--workloads", nargs="+", choices=sorted(WORKLOADS), default=sorted(WORKLOADS))
    args = p.parse_args(argv)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["workload", "M", "batch", "numba_s", "numpy_s", "speedup"])
    for name in args.workloads:
        for M in args.sizes:
            for batch in args.batch if name != "angles" else [1]:
                t_nb = best_of(WORKLOADS[name](knb, M, batch), args.repeat)
                t_np = best_of(WORKLOADS[name](knp, M, batch), args.repeat)
                w.writerow([name, M, batch, f"{t_nb:.6f}", f"{t_np:.6f}", f"{t_np / t_nb:.1f}"])
                sys.stdout.flush()


if __name__ == "__main__":
    main()
