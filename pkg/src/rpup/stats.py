"""Distribution checks for the generated matrices and filter banks.

Kolmogorov-Smirnov statistics are computed here directly (normal CDF via
``erf``, asymptotic critical values ``c(alpha) = sqrt(-ln(alpha / 2) / 2)``)
so that scipy's implementations remain available as independent oracles
in the test-suite.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _st
from scipy.special import erf

from . import givens, paraunitary
from .prng import derive_child_seed

DEFAULT_ALPHA = 0.01


class InsufficientSamplesError(ValueError):
    """Too few samples (or matrices) for the requested statistic."""


@dataclass(frozen=True)
class SampleSummary:
    count: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float


def entry_moments(samples) -> SampleSummary:
    """Sample moments with bias-corrected estimators (NaN shape moments if constant)."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 2:
        raise InsufficientSamplesError(f"need at least 2 samples, got {x.size}")
    var = float(np.var(x, ddof=1))
    if var == 0.0:
        skew = kurt = float("nan")
    else:
        skew = float(_st.skew(x, bias=False)) if x.size > 2 else float("nan")
        kurt = float(_st.kurtosis(x, bias=False)) if x.size > 3 else float("nan")
    return SampleSummary(int(x.size), float(x.mean()), var, skew, kurt)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    threshold: float
    alpha: float

    @property
    def passed(self) -> bool:
        return self.statistic <= self.threshold


def ks_critical(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return math.sqrt(-0.5 * math.log(alpha / 2.0))


def ks_normal(samples, sigma: float, alpha: float = DEFAULT_ALPHA) -> KSResult:
    """One-sample KS test against N(0, sigma^2)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = x.size
    if n == 0:
        raise InsufficientSamplesError("empty sample")
    cdf = 0.5 * (1.0 + erf(x / (sigma * math.sqrt(2.0))))
    above = np.arange(1, n + 1) / n - cdf
    below = cdf - np.arange(n) / n
    d = float(max(above.max(), below.max()))
    return KSResult(d, ks_critical(alpha) / math.sqrt(n), alpha)


def two_sample_ks(a, b, alpha: float = DEFAULT_ALPHA) -> KSResult:
    """Two-sample KS test: sup-distance between the empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    n, m = a.size, b.size
    if n == 0 or m == 0:
        raise InsufficientSamplesError("empty sample")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / n
    fb = np.searchsorted(b, grid, side="right") / m
    d = float(np.abs(fa - fb).max())
    return KSResult(d, ks_critical(alpha) * math.sqrt((n + m) / (n * m)), alpha)


def haar_qr(M: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix: QR of a Gaussian matrix, R's diagonal signs moved into Q."""
    if M < 1:
        raise ValueError("M must be >= 1")
    q, r = np.linalg.qr(rng.standard_normal((M, M)))
    return q * np.sign(np.diag(r))


@dataclass(frozen=True)
class CorrelationReport:
    max_abs_correlation: float
    pairs_tested: int
    degenerate_positions: int

    @property
    def degenerate(self) -> bool:
        return self.degenerate_positions > 0


def correlation_impulse(ensemble, n_pairs: int = 1000, rng: np.random.Generator | None = None
                        ) -> CorrelationReport:
    """Largest |sample correlation| between distinct entry positions across an ensemble.

    ``ensemble`` is (n_members, ...); each member is flattened.  Pairs are
    drawn at random (or all pairs, when there are fewer than ``n_pairs``).
    Positions with zero variance are skipped and counted as degenerate.
    """
    X = np.asarray(ensemble, dtype=np.float64)
    if X.ndim < 2 or X.shape[0] < 2:
        raise InsufficientSamplesError("need an ensemble of at least 2 members")
    X = X.reshape(X.shape[0], -1)
    X = X - X.mean(axis=0)
    norms = np.sqrt((X * X).sum(axis=0))
    live = np.flatnonzero(norms > 0)
    degenerate = X.shape[1] - live.size
    P = live.size
    total_pairs = P * (P - 1) // 2
    if total_pairs == 0:
        return CorrelationReport(float("nan"), 0, degenerate)
    if total_pairs <= n_pairs:
        ii, jj = np.triu_indices(P, 1)
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        ii = rng.integers(0, P, size=4 * n_pairs)
        jj = rng.integers(0, P, size=4 * n_pairs)
        keep = ii != jj
        ii, jj = ii[keep][:n_pairs], jj[keep][:n_pairs]
    a, b = live[ii], live[jj]
    rho = (X[:, a] * X[:, b]).sum(axis=0) / (norms[a] * norms[b])
    return CorrelationReport(float(np.abs(rho).max()), int(rho.size), degenerate)


# -- ensembles --------------------------------------------------------------------


def unitary_ensemble(M: int, count: int, master_seed: int, num_subsets: int | None = None) -> np.ndarray:
    """(count, M, M) dense random unitaries with seeds derived from ``master_seed``."""
    return np.array([
        givens.materialize(givens.UnitarySpec(M, derive_child_seed(master_seed, r), num_subsets))
        for r in range(count)
    ])


def paraunitary_ensemble(M: int, K: int, count: int, master_seed: int) -> np.ndarray:
    """(count, K + 1, M, M) polyphase coefficients of independent random systems."""
    return np.array([
        paraunitary.coefficients(
            paraunitary.ParaunitarySpec(M, K, derive_child_seed(master_seed, r))
        ).matrices
        for r in range(count)
    ])


def haar_ensemble(M: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.array([haar_qr(M, rng) for _ in range(count)])


def rotating_column(ensemble: np.ndarray) -> np.ndarray:
    """Column ``r mod M`` of member r, pooled: one column per matrix.

    With all M^2 entries of every matrix pooled, a KS test against a normal
    has enough samples to reject the exact finite-M marginal of a Haar
    matrix (a scaled Beta law), whatever the generator.
    """
    n, M = ensemble.shape[0], ensemble.shape[-1]
    return np.concatenate([ensemble[r, :, r % M] for r in range(n)])


# -- battery -----------------------------------------------------------------------


@dataclass(frozen=True)
class CheckRecord:
    name: str
    statistic: float
    threshold: float
    passed: bool


CSV_COLUMNS = ("test", "statistic", "threshold", "pass")


@dataclass(frozen=True)
class BatteryConfig:
    seed: int = 0x5EED
    alpha: float = DEFAULT_ALPHA
    gauss_m: int = 64
    gauss_trials: int = 200
    corr_m: int = 16
    corr_trials: int = 500
    cross_m: int = 32
    cross_trials: int = 200
    para_m: int = 16
    para_k: int = 3
    para_trials: int = 500


def run_battery(cfg: BatteryConfig = BatteryConfig()) -> list:
    """Gaussianity, decorrelation and cross-method checks; one record per check."""
    out = []
    s = cfg.seed
    U = unitary_ensemble(cfg.gauss_m, cfg.gauss_trials, derive_child_seed(s, 0))
    ks = ks_normal(rotating_column(U), 1.0 / math.sqrt(cfg.gauss_m), cfg.alpha)
    out.append(CheckRecord("gaussian_ks", ks.statistic, ks.threshold, ks.passed))
    mom = entry_moments(U)
    target = 1.0 / cfg.gauss_m
    out.append(CheckRecord("entry_variance_rel_err", abs(mom.variance - target) / target, 0.05,
                          abs(mom.variance - target) / target <= 0.05))
    out.append(CheckRecord("excess_kurtosis_abs", abs(mom.excess_kurtosis), 0.15,
                          abs(mom.excess_kurtosis) <= 0.15))

    bound = 4.0 / math.sqrt(cfg.corr_trials)
    rep = correlation_impulse(unitary_ensemble(cfg.corr_m, cfg.corr_trials, derive_child_seed(s, 1)),
                              rng=np.random.default_rng(derive_child_seed(s, 2)))
    out.append(CheckRecord("unitary_max_correlation", rep.max_abs_correlation, bound,
                          rep.max_abs_correlation <= bound))

    a = unitary_ensemble(cfg.cross_m, cfg.cross_trials, derive_child_seed(s, 3))
    b = haar_ensemble(cfg.cross_m, cfg.cross_trials, derive_child_seed(s, 4))
    ks2 = two_sample_ks(a, b, cfg.alpha)
    out.append(CheckRecord("angle_vs_haar_ks2", ks2.statistic, ks2.threshold, ks2.passed))

    bound = 4.0 / math.sqrt(cfg.para_trials)
    rep = correlation_impulse(
        paraunitary_ensemble(cfg.para_m, cfg.para_k, cfg.para_trials, derive_child_seed(s, 5)),
        rng=np.random.default_rng(derive_child_seed(s, 6)),
    )
    out.append(CheckRecord("paraunitary_max_correlation", rep.max_abs_correlation, bound,
                          rep.max_abs_correlation <= bound))
    return out


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.name, repr(float(r.statistic)), repr(float(r.threshold)), int(r.passed)])
    return buf.getvalue()
