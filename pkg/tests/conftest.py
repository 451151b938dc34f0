"""Shared oracles.

The dense oracle rebuilds U from scratch: angles from the scalar reference
sampler, one explicit M x M plane rotation per angle, then the sign flips.
It shares no code with the in-place kernels beyond the random source.
"""

import numpy as np
import pytest

from rpup._backend import BACKEND
from rpup.prng import Stream, reference_angles, sample_sign


def assert_same_angles(got, ref):
    """Bit-exact on the compiled backend; numpy's vector math may round differently."""
    got, ref = np.asarray(got, dtype=float), np.asarray(ref, dtype=float)
    if BACKEND == "numba":
        assert got.tolist() == ref.tolist()
    else:
        np.testing.assert_allclose(got, ref, rtol=0, atol=1e-15)


def plane_rotation(M, i, j, theta):
    R = np.eye(M)
    c, s = np.cos(theta), np.sin(theta)
    R[i, i] = c
    R[i, j] = -s
    R[j, i] = s
    R[j, j] = c
    return R


def oracle_planes(M):
    return [(i, j) for i in range(M - 1) for j in range(i + 1, M)]


def oracle_signs(spec):
    stream = Stream(spec.sign_key)
    return np.array([sample_sign(stream) for _ in range(spec.M)], dtype=np.float64)


def dense_unitary(spec):
    planes = oracle_planes(spec.M)
    angles = reference_angles(spec.hierarchy, [j - i for i, j in planes])
    U = np.eye(spec.M)
    for (i, j), theta in zip(planes, angles):
        U = plane_rotation(spec.M, i, j, theta) @ U
    return oracle_signs(spec)[:, None] * U


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one 'criterion N: PASS|FAIL' line; printed in the terminal summary."""

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
