"""Random paraunitary filter banks built from cascaded random unitaries.

The system is ``H(z) = U_0 L(z) U_1 L(z) ... L(z) U_K`` with
``L(z) = diag(1, ..., 1, z^-1, ..., z^-1)`` delaying the last M/2 channels.
Acting on a column of input samples, ``U_K`` is applied first and ``U_0``
last, so streaming output block t is ``sum_i H_i x[t - i]``.

The inverse lattice runs ``U_0^T`` first and ``U_K^T`` last, with the
complementary delay (first M/2 channels) between stages.  Forward followed
by inverse returns the input delayed by exactly K blocks.

Stage i uses ``UnitarySpec(M, derive_child_seed(master_seed, i), N_s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import givens
from .givens import DimensionError, UnitarySpec, Workspace
from .prng import MASK64, derive_child_seed


@dataclass(frozen=True)
class ParaunitarySpec:
    M: int
    K: int
    master_seed: int
    num_subsets: int | None = None

    def __post_init__(self):
        if self.M < 2 or self.M % 2:
            raise ValueError(f"M must be even and >= 2, got {self.M}")
        if self.K < 0:
            raise ValueError(f"K must be >= 0, got {self.K}")
        if not 0 <= self.master_seed <= MASK64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def half(self) -> int:
        return self.M // 2

    def stage_seed(self, i: int) -> int:
        return derive_child_seed(self.master_seed, i)

    def stage(self, i: int) -> UnitarySpec:
        if not 0 <= i <= self.K:
            raise IndexError(f"stage {i} out of range [0, {self.K}]")
        return UnitarySpec(self.M, self.stage_seed(i), self.num_subsets)


def filter_length(spec: ParaunitarySpec) -> int:
    return (spec.K + 1) * spec.M


@dataclass(frozen=True)
class DelayMask:
    """Which channels a delay element holds back by one block."""

    M: int
    inverse: bool = False

    @property
    def delayed(self) -> np.ndarray:
        h = self.M // 2
        mask = np.zeros(self.M, dtype=bool)
        if self.inverse:
            mask[:h] = True
        else:
            mask[h:] = True
        return mask


class LatticeState:
    """Delay registers of a forward or inverse lattice.

    ``registers[i - 1]`` is the delay element between stages i-1 and i; it
    holds M/2 samples, K * M/2 in total.  One state serves one stream.
    """

    def __init__(self, spec: ParaunitarySpec, inverse: bool = False):
        self.spec = spec
        self.inverse = inverse
        self.registers = np.zeros((spec.K, spec.half))
        self.block = 0
        self._ws = [Workspace(spec.stage(i)) for i in range(spec.K + 1)]
        self._buf = np.empty((spec.M, 1))
        self._swap = np.empty(spec.half)

    @property
    def stored_samples(self) -> int:
        return self.registers.size

    def _unitary(self, i, inverse):
        givens.apply_inplace(self.spec.stage(i), self._buf, self._ws[i], inverse=inverse)

    def _exchange(self, i, part):
        np.copyto(self._swap, part)
        part[:] = self.registers[i - 1]
        self.registers[i - 1] = self._swap

    def _check(self, block, name):
        block = np.asarray(block, dtype=np.float64)
        if block.shape != (self.spec.M,):
            raise DimensionError(f"{name} must have length M={self.spec.M}, got shape {block.shape}")
        return block


def forward_block(state: LatticeState, x_block) -> np.ndarray:
    """Push one M-sample block through ``H(z)``; returns one output block."""
    if state.inverse:
        raise ValueError("state belongs to an inverse lattice")
    x_block = state._check(x_block, "x_block")
    spec, v, h = state.spec, state._buf, state.spec.half
    v[:, 0] = x_block
    state._unitary(spec.K, False)
    for i in range(spec.K, 0, -1):
        state._exchange(i, v[h:, 0])
        state._unitary(i - 1, False)
    state.block += 1
    return v[:, 0].copy()


def inverse_block(state: LatticeState, y_block) -> np.ndarray:
    """Push one block through ``z^-K H^T(1/z)``."""
    if not state.inverse:
        raise ValueError("state belongs to a forward lattice")
    y_block = state._check(y_block, "y_block")
    spec, v, h = state.spec, state._buf, state.spec.half
    v[:, 0] = y_block
    state._unitary(0, True)
    for i in range(1, spec.K + 1):
        state._exchange(i, v[:h, 0])
        state._unitary(i, True)
    state.block += 1
    return v[:, 0].copy()


def flush(state: LatticeState) -> np.ndarray:
    """Feed K zero blocks and return the K resulting output blocks."""
    push = inverse_block if state.inverse else forward_block
    zero = np.zeros(state.spec.M)
    out = np.empty((state.spec.K, state.spec.M))
    for t in range(state.spec.K):
        out[t] = push(state, zero)
    return out


def reset(state: LatticeState) -> None:
    state.registers[:] = 0.0
    state.block = 0


def set_order(state: LatticeState, new_K: int) -> LatticeState:
    """Grow or shrink the cascade between two blocks.

    New stages take seeds ``derive_child_seed(master_seed, i)`` and start
    with empty registers; removed stages lose theirs.  Keeping a matching
    inverse lattice in step is up to the caller.
    """
    if new_K < 0:
        raise ValueError(f"order must be >= 0, got {new_K}")
    old = state.spec
    if new_K == old.K:
        return state
    spec = replace(old, K=new_K)
    regs = np.zeros((new_K, spec.half))
    keep = min(old.K, new_K)
    regs[:keep] = state.registers[:keep]
    state._ws = state._ws[: keep + 1] + [Workspace(spec.stage(i)) for i in range(keep + 1, new_K + 1)]
    state.spec = spec
    state.registers = regs
    return state


def stream(spec: ParaunitarySpec, blocks, inverse: bool = False, flush_tail: bool = True) -> np.ndarray:
    """Run a whole (B, M) block sequence through a fresh lattice."""
    state = LatticeState(spec, inverse=inverse)
    push = inverse_block if inverse else forward_block
    out = [push(state, b) for b in np.asarray(blocks, dtype=np.float64)]
    if flush_tail and spec.K:
        out.extend(flush(state))
    return np.array(out).reshape(-1, spec.M)


# -- polyphase coefficients -----------------------------------------------------------


@dataclass(frozen=True)
class PolyphaseCoeffs:
    """``H(z) = sum_i matrices[i] z^-i``, stored as a (K + 1, M, M) array."""

    matrices: np.ndarray

    @property
    def K(self) -> int:
        return self.matrices.shape[0] - 1

    @property
    def M(self) -> int:
        return self.matrices.shape[1]

    def __len__(self):
        return self.matrices.shape[0]

    def __getitem__(self, i):
        return self.matrices[i]


def coefficients(spec: ParaunitarySpec) -> PolyphaseCoeffs:
    """Polyphase matrices by appending one ``L(z) U_n`` stage at a time.

    With ``L(z) U_n = U'_n + z^-1 U''_n`` (U' keeps the rows of undelayed
    channels, U'' the rows of delayed ones), appending to ``E(z)`` gives
    ``F_0 = E_0 U'``, ``F_k = E_k U' + E_{k-1} U''`` and ``F_n = E_{n-1} U''``.
    """
    h = spec.half
    E = [givens.materialize(spec.stage(0))]
    for n in range(1, spec.K + 1):
        U = givens.materialize(spec.stage(n))
        U1 = U.copy()
        U1[h:] = 0.0
        U2 = U.copy()
        U2[:h] = 0.0
        F = [E[0] @ U1]
        F += [E[k] @ U1 + E[k - 1] @ U2 for k in range(1, n)]
        F.append(E[n - 1] @ U2)
        E = F
    return PolyphaseCoeffs(np.array(E))


def paraconjugate(coeffs: PolyphaseCoeffs) -> PolyphaseCoeffs:
    """Causal inverse ``z^-K H^T(1/z)``: ``G_i = H_{K-i}^T``."""
    return PolyphaseCoeffs(np.ascontiguousarray(coeffs.matrices[::-1].transpose(0, 2, 1)))


def block_convolve(first: PolyphaseCoeffs, second: PolyphaseCoeffs) -> np.ndarray:
    """Coefficients of the product ``first(z) second(z)``."""
    A, B = first.matrices, second.matrices
    out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1], B.shape[2]))
    for i in range(A.shape[0]):
        for j in range(B.shape[0]):
            out[i + j] += A[i] @ B[j]
    return out


def polyphase_filter(coeffs: PolyphaseCoeffs, blocks, full: bool = True) -> np.ndarray:
    """Dense reference: ``y[t] = sum_i H_i x[t - i]`` over a (B, M) block sequence."""
    x = np.asarray(blocks, dtype=np.float64)
    T = x.shape[0] + (coeffs.K if full else 0)
    y = np.zeros((T, coeffs.M))
    for i, H in enumerate(coeffs.matrices):
        n = min(x.shape[0], T - i)
        if n > 0:
            y[i:i + n] += x[:n] @ H.T
    return y


def paraunitarity_error(coeffs: PolyphaseCoeffs) -> float:
    """Largest deviation of ``sum_i H_i^T H_{i+m}`` from ``delta_m I`` over all lags."""
    H = coeffs.matrices
    K, eye = coeffs.K, np.eye(coeffs.M)
    worst = 0.0
    for m in range(-K, K + 1):
        acc = np.zeros_like(eye)
        for i in range(K + 1):
            if 0 <= i + m <= K:
                acc += H[i].T @ H[i + m]
        worst = max(worst, np.abs(acc - (eye if m == 0 else 0.0)).max())
    return worst
