"""Under-decimated (compressive) paraunitary operators.

Keeping one output block out of every q turns the critically decimated
M x M system into a ``qM``-in / ``M``-out sampling operator.  The retained
block is the last block of each window, so at ``q = K + 1`` with aligned
windows every output is ``[H_0 ... H_K]`` applied to its own window of
input blocks, stacked newest first (see :func:`stack_window`).

:class:`DecimatingEncoder` evaluates the lattice on demand.  Node
``v[s, t]`` is the output of stage ``s`` at block time ``t``::

    v[K, t]   = U_K x[t]
    v[s-1, t] = U_{s-1} [upper half of v[s, t] ; lower half of v[s, t-1]]

A retained output only pulls the nodes it depends on.  Nodes needed for
their upper (undelayed) half only run the first M/2 Givens stages; the
remaining stages run later if the lower half is ever requested, so no
rotation is executed twice and every value is bit-identical to the full
run.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import givens
from .givens import DimensionError, Workspace
from .paraunitary import ParaunitarySpec, PolyphaseCoeffs, stream


class ScheduleError(ValueError):
    """Malformed schedule or one that does not cover the input."""


@dataclass(frozen=True)
class DecimationSchedule:
    """Compression factor of each successive window of input blocks."""

    windows: tuple

    def __post_init__(self):
        ws = tuple(int(q) for q in self.windows)
        if any(q < 1 for q in ws):
            raise ScheduleError("compression factors must be >= 1")
        object.__setattr__(self, "windows", ws)

    @classmethod
    def constant(cls, q: int, n_windows: int) -> "DecimationSchedule":
        return cls((q,) * n_windows)

    @classmethod
    def from_segments(cls, segments: Iterable[tuple[int, int]]) -> "DecimationSchedule":
        """Build from ``(q, blocks)`` runs; ``blocks`` must be a multiple of q."""
        windows: list = []
        for q, blocks in segments:
            if q < 1 or blocks < 1 or blocks % q:
                raise ScheduleError(f"segment q={q}, blocks={blocks}: blocks must be a positive multiple of q")
            windows.extend([q] * (blocks // q))
        return cls(tuple(windows))

    @classmethod
    def from_csv(cls, text: str) -> "DecimationSchedule":
        """Parse ``window_index,q,blocks`` rows (header optional).

        Each row is a run of equal windows starting at ``window_index``;
        indices must follow on from the previous row.
        """
        windows: list = []
        for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
            if not row or not "".join(row).strip() or row[0].strip().startswith("#"):
                continue
            if row[0].strip() == "window_index":
                continue
            try:
                index, q, blocks = (int(v) for v in row)
            except ValueError:
                raise ScheduleError(f"line {lineno}: expected 'window_index,q,blocks', got {row!r}")
            if index != len(windows):
                raise ScheduleError(f"line {lineno}: window_index {index}, expected {len(windows)}")
            try:
                windows.extend(cls.from_segments([(q, blocks)]).windows)
            except ScheduleError as exc:
                raise ScheduleError(f"line {lineno}: {exc}")
        return cls(tuple(windows))

    def to_csv(self) -> str:
        lines = ["window_index,q,blocks"]
        index = 0
        for q, count in self.segments():
            lines.append(f"{index},{q},{q * count}")
            index += count
        return "\n".join(lines) + "\n"

    def segments(self) -> list:
        """Runs of equal q as ``(q, number_of_windows)``."""
        runs: list = []
        for q in self.windows:
            if runs and runs[-1][0] == q:
                runs[-1][1] += 1
            else:
                runs.append([q, 1])
        return [tuple(r) for r in runs]

    @property
    def total_blocks(self) -> int:
        return sum(self.windows)

    def retained_times(self, n_blocks: int | None = None) -> np.ndarray:
        """Block times whose output is kept, optionally only those ``< n_blocks``."""
        times = np.cumsum(self.windows, dtype=np.int64) - 1
        if n_blocks is not None:
            times = times[times < n_blocks]
        return times


@dataclass
class WorkCount:
    """Stage applications and rotations executed vs. a critically decimated run.

    A stage application counts once a node does any work, even if only its
    upper half was ever needed.
    """

    blocks: int
    stages_executed: int
    stages_baseline: int
    rotations_executed: int
    rotations_baseline: int

    @property
    def stage_ratio(self) -> float:
        return self.stages_baseline / self.stages_executed if self.stages_executed else float("inf")

    @property
    def rotation_ratio(self) -> float:
        return self.rotations_baseline / self.rotations_executed if self.rotations_executed else float("inf")


def claimed_savings(K: int) -> float:
    """The quoted order of savings at maximum pruning, ``K - 1/(2K)``."""
    return K - 1.0 / (2.0 * K)


_UPPER, _FULL = 1, 2


class _PullEvaluator:
    def __init__(self, spec: ParaunitarySpec, trace: bool = False):
        self.spec = spec
        self.K, self.M, self.h = spec.K, spec.M, spec.half
        self.units = [spec.stage(i) for i in range(spec.K + 1)]
        self.ws = [Workspace(u) for u in self.units]
        plan = self.units[0].plan
        self.split_stage = min(self.h, self.M - 1)
        self.upper_rotations = plan.stage_offset(self.split_stage)
        self.all_rotations = len(plan)
        self.inputs: dict = {}
        self.nodes: dict = {}
        self.blocks = 0
        self.stage_runs = 0
        self.rotations = 0
        self.trace = [] if trace else None

    def push(self, t, block):
        self.inputs[t] = np.array(block, dtype=np.float64)
        self.blocks += 1
        horizon = t - self.K
        for key in [k for k in self.inputs if k < horizon]:
            del self.inputs[key]
        for key in [k for k in self.nodes if k[1] < horizon]:
            del self.nodes[key]

    def node(self, s, t, need):
        if t < 0:
            return None
        entry = self.nodes.get((s, t))
        if entry is None:
            w = np.empty((self.M, 1))
            if s == self.K:
                w[:, 0] = self.inputs[t]
            else:
                up = self.node(s + 1, t, _UPPER)
                lo = self.node(s + 1, t - 1, _FULL)
                w[: self.h] = up[: self.h]
                w[self.h:] = 0.0 if lo is None else lo[self.h:]
            entry = self.nodes[(s, t)] = [w, 0]
            self.stage_runs += 1
            if self.trace is not None:
                self.trace.append((s, t))
        w, level = entry
        unit, ws = self.units[s], self.ws[s]
        if level < _UPPER:
            givens.rotate_stages(unit, w, 0, self.split_stage, ws)
            givens.flip_signs(w, ws, 0, self.h)
            self.rotations += self.upper_rotations
            entry[1] = level = _UPPER
        if need == _FULL and level < _FULL:
            givens.rotate_stages(unit, w, self.split_stage, self.M - 1, ws)
            givens.flip_signs(w, ws, self.h, self.M)
            self.rotations += self.all_rotations - self.upper_rotations
            entry[1] = _FULL
        return w

    def output(self, t):
        return self.node(0, t, _FULL)[:, 0].copy()

    def work(self) -> WorkCount:
        stages = self.K + 1
        return WorkCount(
            blocks=self.blocks,
            stages_executed=self.stage_runs,
            stages_baseline=stages * self.blocks,
            rotations_executed=self.rotations,
            rotations_baseline=stages * self.blocks * self.all_rotations,
        )


class DecimatingEncoder:
    """Streaming ``H_{down qM}`` with a compression factor that can change.

    ``push`` returns the retained output block at the end of each window
    and ``None`` otherwise.
    """

    def __init__(self, spec: ParaunitarySpec, q: int = 1, trace: bool = False):
        if q < 1:
            raise ScheduleError("q must be >= 1")
        self.spec = spec
        self._eval = _PullEvaluator(spec, trace=trace)
        self._next_q = q
        self._windows: list = []
        self._window_end = -1
        self.time = 0

    def set_compression(self, q: int) -> DecimationSchedule:
        """Use ``q`` from the next window boundary on; returns the schedule so far."""
        if q < 1:
            raise ScheduleError("q must be >= 1")
        self._next_q = q
        return self.schedule

    @property
    def schedule(self) -> DecimationSchedule:
        return DecimationSchedule(tuple(self._windows))

    @property
    def work(self) -> WorkCount:
        return self._eval.work()

    @property
    def trace(self):
        return self._eval.trace

    def push(self, block):
        block = np.asarray(block, dtype=np.float64)
        if block.shape != (self.spec.M,):
            raise DimensionError(f"block must have length M={self.spec.M}, got shape {block.shape}")
        t = self.time
        if t > self._window_end:
            self._windows.append(self._next_q)
            self._window_end = t + self._next_q - 1
        self._eval.push(t, block)
        self.time += 1
        if t == self._window_end:
            return self._eval.output(t)
        return None


def set_compression(encoder: DecimatingEncoder, q: int) -> DecimationSchedule:
    return encoder.set_compression(q)


@dataclass
class DecimatedRun:
    spec: ParaunitarySpec
    schedule: DecimationSchedule
    times: np.ndarray
    blocks: np.ndarray
    work: WorkCount
    trace: list | None = field(default=None, repr=False)


def forward_decimated(spec: ParaunitarySpec, blocks, schedule: DecimationSchedule,
                      trace: bool = False) -> DecimatedRun:
    """Retained output blocks of the input (B, M) stream under ``schedule``."""
    x = np.asarray(blocks, dtype=np.float64).reshape(-1, spec.M)
    if schedule.total_blocks < x.shape[0]:
        raise ScheduleError(
            f"schedule covers {schedule.total_blocks} blocks but the input has {x.shape[0]}"
        )
    enc = DecimatingEncoder(spec, trace=trace)
    times, outs = [], []
    t = 0
    for q in schedule.windows:
        if t >= x.shape[0]:
            break
        enc.set_compression(q)
        for _ in range(q):
            if t >= x.shape[0]:
                break
            y = enc.push(x[t])
            if y is not None:
                times.append(t)
                outs.append(y)
            t += 1
    return DecimatedRun(
        spec=spec,
        schedule=schedule,
        times=np.array(times, dtype=np.int64),
        blocks=np.array(outs).reshape(-1, spec.M),
        work=enc.work,
        trace=enc.trace,
    )


def adjoint_decimated(retained, schedule: DecimationSchedule, spec: ParaunitarySpec,
                      n_blocks: int | None = None) -> np.ndarray:
    """Transpose of :func:`forward_decimated` over ``n_blocks`` input blocks.

    Dropped outputs are zero-filled and the inverse lattice is run over the
    result; its K-block latency is trimmed off.
    """
    T = schedule.total_blocks if n_blocks is None else n_blocks
    if T > schedule.total_blocks:
        raise ScheduleError(f"schedule covers {schedule.total_blocks} blocks, asked for {T}")
    times = schedule.retained_times(T)
    y = np.asarray(retained, dtype=np.float64)
    if y.ndim == 1 and y.size == 0:
        y = y.reshape(0, spec.M)
    if y.ndim != 2 or y.shape != (times.size, spec.M):
        raise DimensionError(
            f"expected {times.size} retained blocks of length {spec.M}, got shape {y.shape}"
        )
    z = np.zeros((T, spec.M))
    z[times] = y
    w = stream(spec, z, inverse=True, flush_tail=True)
    return w[spec.K: spec.K + T]


def work_report(run: DecimatedRun) -> WorkCount:
    return run.work


def pruning_pattern(run: DecimatedRun, t: int) -> np.ndarray:
    """Boolean (K + 1, K + 1) grid: ``[s, r]`` is True if node (s, t - r) ran."""
    if run.trace is None:
        raise ValueError("run was not traced; call forward_decimated(..., trace=True)")
    K = run.spec.K
    ran = set(run.trace)
    return np.array([[(s, t - r) in ran for r in range(K + 1)] for s in range(K + 1)])


# -- dense views -----------------------------------------------------------------


def downsampled_coefficients(coeffs: PolyphaseCoeffs, q: int) -> list:
    """``[H_{qi}, ..., H_{qi+q-1}]`` for i = 0..floor(K/q), zero past H_K."""
    if q < 1:
        raise ScheduleError("q must be >= 1")
    K, M = coeffs.K, coeffs.M
    zero = np.zeros((M, M))
    return [
        np.hstack([coeffs[n] if n <= K else zero for n in range(q * i, q * i + q)])
        for i in range(K // q + 1)
    ]


def sampling_matrix(coeffs: PolyphaseCoeffs) -> np.ndarray:
    """The M x L matrix ``[H_0, ..., H_K]``."""
    return np.hstack(list(coeffs.matrices))


def stack_window(blocks: Sequence) -> np.ndarray:
    """Flatten a time-ordered window of blocks newest first, matching :func:`sampling_matrix`."""
    return np.asarray(blocks, dtype=np.float64)[::-1].reshape(-1)


def unstack_window(vector, M: int) -> np.ndarray:
    """Inverse of :func:`stack_window`: a time-ordered (q, M) array."""
    return np.asarray(vector, dtype=np.float64).reshape(-1, M)[::-1]
