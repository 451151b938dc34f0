"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (shown in the pytest terminal summary)
before asserting.  Tolerances and runtimes are the pinned targets.
"""

import math
import time
import tracemalloc

import numpy as np
import pytest

from conftest import dense_unitary
from rpup import givens, stats
from rpup._backend import BACKEND
from rpup.decimation import (
    DecimatingEncoder, DecimationSchedule, adjoint_decimated, claimed_savings,
    forward_decimated, sampling_matrix,
)
from rpup.givens import ProjectionSpec, UnitarySpec, Workspace, track_allocations
from rpup.paraunitary import (
    ParaunitarySpec, coefficients, paraunitarity_error, polyphase_filter, stream,
)
from rpup.prng import derive_child_seed
from rpup.recovery import cs_demo

ROOT = 0xACCE55


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_c01_unitarity(acceptance):
    worst = 0.0
    with Timer() as t:
        for M in (2, 4, 16, 64, 256):
            for r in range(10):
                U = givens.materialize(UnitarySpec(M, derive_child_seed(ROOT, 100 * M + r)))
                worst = max(worst, np.abs(U.T @ U - np.eye(M)).max())
    ok = worst <= 1e-10 and t.seconds < 10
    acceptance(1, ok, f"max |U^T U - I| = {worst:.2e} (<= 1e-10), {t.seconds:.2f}s (< 10s)")
    assert ok


def test_c02_pruned_projection(acceptance):
    rng = np.random.default_rng(2)
    worst = 0.0
    with Timer() as t:
        for case in range(100):
            M = int(rng.integers(1, 33))
            N = int(rng.integers(1, M + 1))
            pspec = ProjectionSpec(M, N, derive_child_seed(ROOT, 2000 + case))
            A = dense_unitary(pspec.unitary)[:N]
            x = rng.standard_normal((M, 2))
            worst = max(worst, np.abs(givens.project(pspec, x) - A @ x).max())
    ok = worst <= 1e-12 and t.seconds < 10
    acceptance(2, ok, f"max |project - rows of dense U| = {worst:.2e} (<= 1e-12), {t.seconds:.2f}s (< 10s)")
    assert ok


def test_c03_memory(acceptance):
    worst_ratio, details = 0.0, []
    with Timer() as t:
        for M in (16, 256, 1024, 4096):
            spec = UnitarySpec(M, derive_child_seed(ROOT, M), num_subsets=M)
            x = np.random.default_rng(M).standard_normal(M)
            with track_allocations() as log:
                ws = Workspace(spec)
                y = givens.apply_unitary(spec, x, ws)
                givens.apply_inplace(spec, y.reshape(M, 1), ws, inverse=True)
            assert np.abs(y - x).max() < 1e-9
            for fn in (givens.apply_unitary, givens.apply_unitary_inverse):
                with track_allocations() as one:
                    fn(spec, x)
                worst_ratio = max(worst_ratio, one.elements / M)
            worst_ratio = max(worst_ratio, log.elements / M)
            details.append(f"M={M}: {log.elements / M:.3f}M")
    # traced heap during a round trip on the active backend, warm kernels
    M = 4096
    spec = UnitarySpec(M, 1, M)
    x = np.ones(M)
    givens.apply_unitary_inverse(spec, givens.apply_unitary(spec, x))
    tracemalloc.start()
    ws = Workspace(spec)
    y = givens.apply_unitary(spec, x, ws)
    givens.apply_inplace(spec, y.reshape(M, 1), ws, inverse=True)
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    heap_ratio = peak / 8 / M
    ok = worst_ratio <= 2.6 and heap_ratio <= 2.6 and t.seconds < 30
    acceptance(3, ok, f"buffers {', '.join(details)}; worst {worst_ratio:.3f}M; traced heap "
                      f"{heap_ratio:.3f}M at M=4096 ({BACKEND}) (<= 2.6M), {t.seconds:.2f}s (< 30s)")
    assert ok


@pytest.fixture(scope="module")
def battery():
    with Timer() as t:
        records = {r.name: r for r in stats.run_battery(stats.BatteryConfig())}
    return records, t.seconds


def test_c04_gaussianity(acceptance, battery):
    rec, secs = battery
    ks, var, kurt = rec["gaussian_ks"], rec["entry_variance_rel_err"], rec["excess_kurtosis_abs"]
    ok = ks.passed and var.passed and kurt.passed and secs < 60
    acceptance(4, ok, f"KS D = {ks.statistic:.5f} (<= {ks.threshold:.5f}, alpha 0.01); "
                      f"variance rel err {var.statistic:.4f} (<= 0.05); "
                      f"|excess kurtosis| {kurt.statistic:.4f} (<= 0.15); battery {secs:.2f}s (< 60s)")
    assert ok


def test_c05_decorrelation(acceptance, battery):
    rec, secs = battery
    c = rec["unitary_max_correlation"]
    ok = c.passed and c.threshold == pytest.approx(4 / math.sqrt(500)) and secs < 60
    acceptance(5, ok, f"max |corr| = {c.statistic:.4f} (<= {c.threshold:.4f}) over 500 seeds at M=16")
    assert ok


def test_c06_cross_method(acceptance, battery):
    rec, secs = battery
    k = rec["angle_vs_haar_ks2"]
    ok = k.passed and secs < 60
    acceptance(6, ok, f"two-sample KS D = {k.statistic:.5f} (<= {k.threshold:.5f}, alpha 0.01) at M=32")
    assert ok


def test_c07_perfect_reconstruction(acceptance):
    rng = np.random.default_rng(7)
    worst = 0.0
    with Timer() as t:
        for M in (4, 8, 16):
            for K in (1, 2, 5):
                spec = ParaunitarySpec(M, K, derive_child_seed(ROOT, 70 + 10 * M + K))
                x = rng.standard_normal((50, M))
                w = stream(spec, stream(spec, x), inverse=True, flush_tail=False)
                worst = max(worst, np.abs(w[K:K + 50] - x).max(), np.abs(w[:K]).max())
    ok = worst <= 1e-10 and t.seconds < 10
    acceptance(7, ok, f"max |inverse(forward(x)) - z^-K x| = {worst:.2e} (<= 1e-10), {t.seconds:.2f}s (< 10s)")
    assert ok


def test_c08_streaming_equals_dense(acceptance):
    rng = np.random.default_rng(8)
    stream_err = para_err = 0.0
    with Timer() as t:
        for M in (4, 8, 16):
            for K in (1, 2, 5):
                spec = ParaunitarySpec(M, K, derive_child_seed(ROOT, 80 + 10 * M + K))
                H = coefficients(spec)
                x = rng.standard_normal((30, M))
                stream_err = max(stream_err, np.abs(stream(spec, x) - polyphase_filter(H, x)).max())
                para_err = max(para_err, paraunitarity_error(H))
    ok = stream_err <= 1e-10 and para_err <= 1e-10 and t.seconds < 10
    acceptance(8, ok, f"stream vs convolution {stream_err:.2e}, paraunitarity {para_err:.2e} "
                      f"(<= 1e-10), {t.seconds:.2f}s (< 10s)")
    assert ok


def test_c09_decimation(acceptance):
    rng = np.random.default_rng(9)
    sound = adj = ortho = 0.0
    with Timer() as t:
        for case in range(50):
            M = int(rng.choice([2, 4, 8, 16]))
            K = int(rng.integers(0, 6))
            spec = ParaunitarySpec(M, K, derive_child_seed(ROOT, 900 + case))
            qs = rng.integers(1, K + 3, size=int(rng.integers(1, 12)))
            T = int(qs.sum())
            x = rng.standard_normal((T, M))
            # adaptive: the compression factor is changed while streaming
            enc = DecimatingEncoder(spec, q=int(qs[0]))
            outs, t_next, w = [], 0, 0
            for tt in range(T):
                if tt == t_next:
                    enc.set_compression(int(qs[w]))
                    t_next += int(qs[w])
                    w += 1
                y = enc.push(x[tt])
                if y is not None:
                    outs.append(y)
            schedule = enc.schedule
            full = stream(spec, x, flush_tail=False)
            ref = full[schedule.retained_times(T)]
            sound = max(sound, np.abs(np.array(outs).reshape(-1, M) - ref).max(initial=0.0))
            run = forward_decimated(spec, x, schedule)
            yv = rng.standard_normal(run.blocks.shape)
            lhs = np.vdot(run.blocks, yv)
            rhs = np.vdot(x, adjoint_decimated(yv, schedule, spec))
            adj = max(adj, abs(lhs - rhs))
            B = sampling_matrix(coefficients(spec))
            ortho = max(ortho, np.abs(B @ B.T - np.eye(M)).max())
    ok = sound <= 1e-12 and adj <= 1e-10 and ortho <= 1e-10 and t.seconds < 30
    acceptance(9, ok, f"retained vs discard {sound:.2e} (<= 1e-12), adjoint {adj:.2e} (<= 1e-10), "
                      f"down-L row orthonormality {ortho:.2e} (<= 1e-10), {t.seconds:.2f}s (< 30s)")
    assert ok


def test_c10_pruning_work(acceptance):
    K, M = 4, 16
    spec = ParaunitarySpec(M, K, derive_child_seed(ROOT, 10))
    n = 40
    with Timer() as t:
        x = np.random.default_rng(10).standard_normal((n * (K + 1), M))
        work = forward_decimated(spec, x, DecimationSchedule.constant(K + 1, n)).work
    ok = work.stages_executed < work.stages_baseline / 2 and t.seconds < 10
    acceptance(10, ok, f"K=4 down-L: baseline/executed = {work.stage_ratio:.4f} by stage "
                       f"({work.stages_baseline}/{work.stages_executed}), {work.rotation_ratio:.4f} "
                       f"by rotation; claimed {claimed_savings(K)}; needs executed < baseline/2; "
                       f"{t.seconds:.2f}s (< 10s)")
    assert ok


def test_c11_sparse_recovery(acceptance):
    with Timer() as t:
        rep = cs_demo(16, 3, 3, 100, seed=0xC5)
    ok = rep.rate >= 0.9 and t.seconds < 60
    acceptance(11, ok, f"M=16 K=3 k=3: exact support {rep.exact}/{rep.trials} = {rep.rate:.2f} "
                       f"(>= 0.90), {t.seconds:.2f}s (< 60s)")
    assert ok
