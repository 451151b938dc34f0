"""Random orthogonal transforms as streamed Givens rotations.

``U = S R`` where ``R`` is the product of the M(M-1)/2 plane rotations and
``S`` a diagonal of random signs.  Applied to data, stage 0 (planes
(0, 1), (0, 2), ..., (0, M-1)) acts first, stage M-2 last, then ``S``.
Stage ``i`` never touches coordinates below ``i``, so the first N outputs
are final once stages 0..N-1 have run; this is what makes the pruned
N x M projection cheap.

No M x M matrix is ever formed, except by :func:`materialize`.  A forward
or inverse transform holds three buffers: the M-sample working vector, the
N_s subset seeds and one subset of ceil(l / N_s) angles.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .prng import MASK64, SIGN_STREAM_INDEX, SeedHierarchy, derive_child_seed


class DimensionError(ValueError):
    """Input length does not match the transform."""


def rotation_count(M: int) -> int:
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    return M * (M - 1) // 2


@dataclass(frozen=True)
class RotationPlan:
    """Plane order: stage i ascending, and within a stage j ascending."""

    M: int

    def __len__(self):
        return rotation_count(self.M)

    def __iter__(self):
        for i in range(self.M - 1):
            for j in range(i + 1, self.M):
                yield i, j

    def stage_offset(self, i: int) -> int:
        """Index of plane (i, i + 1); ``stage_offset(M - 1)`` is the rotation count."""
        return i * (2 * self.M - 1 - i) // 2

    def plane(self, g: int) -> tuple[int, int]:
        if not 0 <= g < len(self):
            raise IndexError(g)
        return kernels.plane_of(g, self.M)

    def spans(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        parts = [np.arange(1, self.M - i, dtype=np.int64) for i in range(self.M - 1)]
        allspans = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        return allspans[start:stop]


@dataclass(frozen=True)
class UnitarySpec:
    """Dimensions and seed of one random M x M orthogonal transform.

    ``num_subsets`` defaults to M.  Changing it changes the transform.
    """

    M: int
    seed: int
    num_subsets: int | None = None

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.num_subsets is None:
            object.__setattr__(self, "num_subsets", self.M)
        if self.num_subsets < 1:
            raise ValueError("num_subsets must be positive")

    @property
    def rotations(self) -> int:
        return rotation_count(self.M)

    @property
    def plan(self) -> RotationPlan:
        return RotationPlan(self.M)

    @property
    def hierarchy(self) -> SeedHierarchy:
        return SeedHierarchy(self.seed, self.num_subsets, self.rotations)

    @property
    def sign_key(self) -> int:
        return derive_child_seed(self.seed, SIGN_STREAM_INDEX)

    def signs(self) -> np.ndarray:
        s = np.ones((self.M, 1))
        kernels.apply_signs(s, np.uint64(self.sign_key), 0, self.M)
        return s[:, 0]


@dataclass(frozen=True)
class ProjectionSpec:
    """The first N rows of the transform ``UnitarySpec(M, seed, num_subsets)``."""

    M: int
    N: int
    seed: int
    num_subsets: int | None = None

    def __post_init__(self):
        if not 1 <= self.N <= self.M:
            raise DimensionError(f"need 1 <= N <= M, got N={self.N}, M={self.M}")
        object.__setattr__(self, "num_subsets", self.unitary.num_subsets)

    @property
    def unitary(self) -> UnitarySpec:
        return UnitarySpec(self.M, self.seed, self.num_subsets)

    @property
    def retained_stages(self) -> int:
        return min(self.N, self.M - 1)

    @property
    def retained_rotations(self) -> int:
        d = max(self.M - self.N - 1, 0)
        return rotation_count(self.M) - d * (d + 1) // 2


# -- allocation instrumentation ------------------------------------------------


@dataclass
class AllocationLog:
    """Buffers handed out while tracking was active, as (name, elements)."""

    entries: list = field(default_factory=list)

    @property
    def elements(self) -> int:
        return sum(n for _, n in self.entries)

    def by_name(self) -> dict:
        out: dict = {}
        for name, n in self.entries:
            out[name] = out.get(name, 0) + n
        return out


_ALLOC_LOG: contextvars.ContextVar = contextvars.ContextVar("rpup_alloc_log", default=None)


@contextlib.contextmanager
def track_allocations():
    """Record every working buffer the transforms allocate inside the block."""
    log = AllocationLog()
    token = _ALLOC_LOG.set(log)
    try:
        yield log
    finally:
        _ALLOC_LOG.reset(token)


def _alloc(name, shape, dtype=np.float64):
    arr = np.empty(shape, dtype=dtype)
    log = _ALLOC_LOG.get()
    if log is not None:
        log.entries.append((name, arr.size))
    return arr


class Workspace:
    """Seed table and angle-subset buffer for one ``UnitarySpec``.

    Reusable across calls on the same spec; not shareable between threads.
    """

    def __init__(self, spec: UnitarySpec):
        h = spec.hierarchy
        self.spec = spec
        self.subset_size = max(h.subset_size, 1)
        self.seeds = _alloc("seeds", h.num_subsets, np.uint64)
        kernels.child_seeds(np.uint64(spec.seed), self.seeds)
        self.angles = _alloc("angles", self.subset_size)
        self.sign_key = np.uint64(spec.sign_key)

    @property
    def footprint(self) -> int:
        return self.seeds.size + self.angles.size


def _workspace(spec, ws):
    if ws is None:
        return Workspace(spec)
    if ws.spec != spec:
        raise ValueError("workspace was built for a different spec")
    return ws


def _columns(x, length, name):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[0] != length:
        raise DimensionError(f"{name} must have leading dimension {length}, got shape {x.shape}")
    buf = _alloc("vector", x.shape)
    buf[...] = x
    return buf.reshape(length, -1), x.ndim == 1


# -- in-place primitives -----------------------------------------------------------


def rotate_stages(spec: UnitarySpec, x: np.ndarray, first: int, stop: int, ws: Workspace) -> None:
    """Apply stages ``first..stop-1`` in place to the (M, B) array ``x``."""
    plan = spec.plan
    kernels.rotate_range(
        x, ws.seeds, ws.subset_size,
        plan.stage_offset(first), plan.stage_offset(stop), spec.M, ws.angles,
    )


def unrotate_stages(spec: UnitarySpec, x: np.ndarray, first: int, stop: int, ws: Workspace) -> None:
    """Undo stages ``first..stop-1`` in place (planes reversed, angles negated)."""
    plan = spec.plan
    kernels.unrotate_range(
        x, ws.seeds, ws.subset_size,
        plan.stage_offset(first), plan.stage_offset(stop), spec.M, ws.angles,
    )


def flip_signs(x: np.ndarray, ws: Workspace, lo: int, hi: int) -> None:
    kernels.apply_signs(x, ws.sign_key, lo, hi)


def apply_inplace(spec: UnitarySpec, x: np.ndarray, ws: Workspace, inverse: bool = False) -> None:
    """``x <- U x`` (or ``U^T x``) for a C-contiguous (M, B) float64 array."""
    last = spec.M - 1
    if inverse:
        flip_signs(x, ws, 0, spec.M)
        unrotate_stages(spec, x, 0, last, ws)
    else:
        rotate_stages(spec, x, 0, last, ws)
        flip_signs(x, ws, 0, spec.M)


# -- public transforms -----------------------------------------------------------


def apply_unitary(spec: UnitarySpec, x, workspace: Workspace | None = None) -> np.ndarray:
    """Return ``U x`` for an M-vector or an (M, B) batch of column vectors."""
    buf, flat = _columns(x, spec.M, "x")
    apply_inplace(spec, buf, _workspace(spec, workspace))
    return buf[:, 0] if flat else buf


def apply_unitary_inverse(spec: UnitarySpec, y, workspace: Workspace | None = None) -> np.ndarray:
    """Return ``U^T y``."""
    buf, flat = _columns(y, spec.M, "y")
    apply_inplace(spec, buf, _workspace(spec, workspace), inverse=True)
    return buf[:, 0] if flat else buf


def materialize(spec: UnitarySpec) -> np.ndarray:
    """Dense M x M matrix of ``spec``; meant for oracles and statistics."""
    return apply_unitary(spec, np.eye(spec.M))


def project(pspec: ProjectionSpec, x, workspace: Workspace | None = None) -> np.ndarray:
    """``A x`` with A the first N rows of U, running only stages 0..N-1."""
    spec = pspec.unitary
    buf, flat = _columns(x, spec.M, "x")
    ws = _workspace(spec, workspace)
    rotate_stages(spec, buf, 0, pspec.retained_stages, ws)
    flip_signs(buf, ws, 0, pspec.N)
    out = buf[: pspec.N]
    return out[:, 0] if flat else out


def project_transpose(pspec: ProjectionSpec, y, workspace: Workspace | None = None) -> np.ndarray:
    """``A^T y``: zero-pad y to M samples and undo the retained stages."""
    spec = pspec.unitary
    y = np.asarray(y, dtype=np.float64)
    if y.ndim not in (1, 2) or y.shape[0] != pspec.N:
        raise DimensionError(f"y must have leading dimension N={pspec.N}, got shape {y.shape}")
    buf = _alloc("vector", (spec.M,) + y.shape[1:])
    buf[: pspec.N] = y
    buf[pspec.N:] = 0.0
    cols = buf.reshape(spec.M, -1)
    ws = _workspace(spec, workspace)
    flip_signs(cols, ws, 0, pspec.N)
    unrotate_stages(spec, cols, 0, pspec.retained_stages, ws)
    return buf
