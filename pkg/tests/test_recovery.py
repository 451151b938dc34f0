import numpy as np
import pytest

from rpup.decimation import sampling_matrix, stack_window
from rpup.paraunitary import ParaunitarySpec, coefficients
from rpup.recovery import InfeasibleError, cs_demo, omp, sampling_operator


def test_operator_matches_dense_sampling_matrix(rng):
    spec = ParaunitarySpec(8, 2, 0x31)
    forward, adjoint, L = sampling_operator(spec)
    B = sampling_matrix(coefficients(spec))
    x = rng.standard_normal(L)
    # the operator takes time-ordered samples; B acts on newest-first stacking
    np.testing.assert_allclose(forward(x), B @ stack_window(x.reshape(3, 8)), atol=1e-12)
    y = rng.standard_normal(8)
    assert np.vdot(forward(x), y) == pytest.approx(np.vdot(x, adjoint(y)), abs=1e-10)


def test_omp_recovers_with_orthonormal_matrix(rng):
    A = np.linalg.qr(rng.standard_normal((20, 20)))[0]
    x = np.zeros(20)
    x[[3, 11]] = [1.5, -2.0]
    x_hat, support = omp(lambda v: A @ v, lambda v: A.T @ v, 20, A @ x, 2)
    assert sorted(support) == [3, 11]
    np.testing.assert_allclose(x_hat, x, atol=1e-12)


def test_zero_signal_recovered_exactly():
    rep = cs_demo(8, 1, 0, 3, seed=1)
    assert rep.exact == 3 and rep.rate == 1.0
    x_hat, support = omp(lambda v: v, lambda v: v, 4, np.zeros(4), 2)
    assert support == [] and not x_hat.any()


def test_one_sparse_always_recovered():
    assert cs_demo(8, 1, 1, 10, seed=2).rate == 1.0


def test_infeasible():
    with pytest.raises(InfeasibleError):
        cs_demo(8, 1, 8, 1, seed=0)
    with pytest.raises(ValueError):
        cs_demo(8, 1, -1, 1, seed=0)


def test_rate_non_increasing_in_sparsity():
    rates = [cs_demo(16, 3, k, 40, seed=0xC5).rate for k in range(1, 7)]
    assert all(a >= b for a, b in zip(rates, rates[1:])), rates
