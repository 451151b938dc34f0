"""Sparse recovery through the decimated operator and its adjoint.

Orthogonal matching pursuit that touches the measurement operator only
through two callables, ``forward(x) -> y`` and ``adjoint(y) -> x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .decimation import DecimationSchedule, adjoint_decimated, forward_decimated
from .paraunitary import ParaunitarySpec
from .prng import derive_child_seed


class InfeasibleError(ValueError):
    """Sparsity too large for the number of measurements."""


def omp(forward: Callable, adjoint: Callable, n: int, y, sparsity: int, tol: float = 1e-12):
    """Greedy k-sparse solution of ``forward(x) = y``.

    Atom correlations are normalized by the column norms ``|forward(e_j)|``.
    Stops early once the residual falls below ``tol * |y|``.

    Returns
    -------
    x_hat : ndarray of shape (n,)
    support : list of int, in selection order
    """
    y = np.asarray(y, dtype=np.float64)
    x_hat = np.zeros(n)
    if sparsity == 0 or not np.any(y):
        return x_hat, []
    eye = np.eye(n)
    norms = np.array([np.linalg.norm(forward(eye[j])) for j in range(n)])
    norms[norms == 0] = np.inf
    support: list = []
    atoms: list = []
    residual = y.copy()
    stop = tol * np.linalg.norm(y)
    for _ in range(sparsity):
        score = np.abs(adjoint(residual)) / norms
        score[support] = -1.0
        j = int(np.argmax(score))
        support.append(j)
        atoms.append(forward(eye[j]))
        A = np.column_stack(atoms)
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        residual = y - A @ coef
        if np.linalg.norm(residual) <= stop:
            break
    x_hat[support] = coef
    return x_hat, support


def sampling_operator(spec: ParaunitarySpec):
    """``(forward, adjoint, L)`` for the down-L operator on one aligned window."""
    q = spec.K + 1
    L = q * spec.M
    schedule = DecimationSchedule.constant(q, 1)

    def forward(x):
        return forward_decimated(spec, np.reshape(x, (q, spec.M)), schedule).blocks[0]

    def adjoint(y):
        return adjoint_decimated(np.reshape(y, (1, spec.M)), schedule, spec).reshape(L)

    return forward, adjoint, L


@dataclass(frozen=True)
class RecoveryReport:
    M: int
    K: int
    sparsity: int
    trials: int
    exact: int

    @property
    def rate(self) -> float:
        return self.exact / self.trials if self.trials else float("nan")


def cs_demo(M: int, K: int, sparsity: int, trials: int, seed: int) -> RecoveryReport:
    """Exact-support recovery rate of k-sparse signals with Gaussian amplitudes.

    Each trial draws a fresh system seed and signal from ``seed``.
    """
    if sparsity < 0 or trials < 0:
        raise ValueError("sparsity and trials must be non-negative")
    if sparsity >= M:
        raise InfeasibleError(f"sparsity {sparsity} needs fewer nonzeros than the {M} measurements")
    exact = 0
    for trial in range(trials):
        trial_seed = derive_child_seed(seed, trial)
        spec = ParaunitarySpec(M, K, trial_seed)
        forward, adjoint, L = sampling_operator(spec)
        rng = np.random.default_rng(derive_child_seed(trial_seed, 1))
        truth = np.sort(rng.choice(L, size=sparsity, replace=False))
        x = np.zeros(L)
        x[truth] = rng.standard_normal(sparsity)
        _, found = omp(forward, adjoint, L, forward(x), sparsity)
        exact += sorted(found) == list(truth)
    return RecoveryReport(M, K, sparsity, trials, exact)
