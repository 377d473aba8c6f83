"""Cointegration test for high-dimensional VAR(k) data.

The pipeline detrends the levels, builds cyclically indexed regressors,
partials out short-run dynamics and the constant, and extracts the squared
canonical correlations between the residualized differences and lagged
levels.  The likelihood-ratio sum over the r largest of them is centered and
scaled with (N, T)-dependent Wachter-edge constants so that, without
cointegration, it is approximately distributed as the sum of the first r
points of the Airy_1 process.

Data are (T + 1) x N arrays: row t holds the observation X_t, t = 0..T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import tables
from .errors import DimensionError, NumericalError, UnsupportedCorrection, ValidationError
from .numerics import cholesky_lower, solve_spd

# eigenvalues may leave [0, 1] by this much through roundoff before it counts as a failure
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class WachterParams:
    """Wachter-law parameters and the centering/scaling constants for given (N, T, k)."""

    p: float
    q: float
    lambda_minus: float
    lambda_plus: float
    c1: float
    c2: float


@dataclass(frozen=True)
class TestResult:
    """Outcome of one cointegration test.

    ``p_value`` and ``decision`` are None when r > 10, where no quantile table
    exists.  ``significance_table`` has one row per r' = 1..min(10, N) with
    columns q0.90, q0.95, q0.97, q0.99 and the rescaled statistic for r'.
    """

    __test__ = False  # not a pytest class

    eigenvalues: np.ndarray
    lr_raw: float
    statistic: float
    params: WachterParams
    n: int
    t: int
    k: int
    r: int
    alpha: float
    p_value: float | None
    decision: int | None
    significance_table: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "k": self.k,
            "r": self.r,
            "alpha": self.alpha,
            "eigenvalues": self.eigenvalues.tolist(),
            "lr_raw": self.lr_raw,
            "statistic": self.statistic,
            "c1": self.params.c1,
            "c2": self.params.c2,
            "lambda_minus": self.params.lambda_minus,
            "lambda_plus": self.params.lambda_plus,
            "p_value": self.p_value,
            "decision": self.decision,
            "critical_levels": list(tables.SIGNIFICANCE_LEVELS),
            "critical_values": self.significance_table[self.r - 1, :4].tolist() if self.r <= len(self.significance_table) else None,
            "significance_table": [
                {
                    "r": i + 1,
                    "q0.90": row[0],
                    "q0.95": row[1],
                    "q0.97": row[2],
                    "q0.99": row[3],
                    "statistic": row[4],
                }
                for i, row in enumerate(self.significance_table.tolist())
            ],
        }


def as_timeseries(data) -> np.ndarray:
    """Validate and return a (T + 1) x N float array with T >= 1, N >= 1."""
    X = np.asarray(data, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
        raise ValidationError(f"data must be a (T+1) x N matrix with T >= 1, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("data contain non-finite values")
    return X


def check_regime(N: int, T: int, k: int) -> None:
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if not T > (k + 1) * N:
        raise DimensionError(
            f"requires T/N > k+1, got T={T}, N={N}, k={k} (T/N = {T / N:.4g} <= {k + 1})"
        )


def detrend(X) -> np.ndarray:
    """Rows t = 1..T of X_{t-1} - (t-1)/T * (X_T - X_0), as a T x N array."""
    X = as_timeseries(X)
    T = X.shape[0] - 1
    slope = (np.arange(T, dtype=np.float64) / T)[:, None]
    return X[:-1] - slope * (X[-1] - X[0])


def cyclic_index(a: int, T: int) -> int:
    """Representative of a modulo T in {1, ..., T}."""
    if T < 1:
        raise ValidationError(f"T must be >= 1, got {T}")
    return (a - 1) % T + 1


def build_regressors(X, xt: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Z0, Zk, Z1) with one column per t = 1..T.

    Z0[:, t] = dX_t, Zk[:, t] = Xtilde_{t-k+1 | T} and
    Z1[:, t] = (dX_{t-1 | T}, ..., dX_{t-k+1 | T}, 1); indices wrap modulo T.
    """
    X = as_timeseries(X)
    T, N = X.shape[0] - 1, X.shape[1]
    check_regime(N, T, k)
    if xt.shape != (T, N):
        raise ValidationError(f"detrended data must be {T} x {N}, got {xt.shape}")
    dX = np.diff(X, axis=0)  # row t-1 holds dX_t
    t = np.arange(1, T + 1)

    def wrap(shift):
        return (t - shift - 1) % T  # zero-based row of index (t - shift) | T

    Z0 = dX.T.copy()
    Zk = xt[wrap(k - 1)].T.copy()
    blocks = [dX[wrap(j)].T for j in range(1, k)]
    blocks.append(np.ones((1, T)))
    Z1 = np.vstack(blocks)
    return Z0, Zk, Z1


def residualize(Zi: np.ndarray, Z1: np.ndarray) -> np.ndarray:
    """Residuals of the column-wise regression of Zi on Z1 (both with T columns)."""
    Zi = np.atleast_2d(np.asarray(Zi, dtype=np.float64))
    Z1 = np.atleast_2d(np.asarray(Z1, dtype=np.float64))
    coef = solve_spd(Z1 @ Z1.T, Z1 @ Zi.T)  # m x d
    return Zi - coef.T @ Z1


def squared_canonical_correlations(R0: np.ndarray, Rk: np.ndarray) -> np.ndarray:
    """Squared canonical correlations between the rows of R0 and Rk, descending.

    Equal to the eigenvalues of S_k0 S_00^{-1} S_0k S_kk^{-1}, computed as the
    squared singular values of L_00^{-1} S_0k L_kk^{-T} with Cholesky factors
    L, which keeps them inside [0, 1].
    """
    R0 = np.atleast_2d(np.asarray(R0, dtype=np.float64))
    Rk = np.atleast_2d(np.asarray(Rk, dtype=np.float64))
    if R0.shape[1] != Rk.shape[1]:
        raise ValidationError(f"residual blocks need equal column counts, got {R0.shape} and {Rk.shape}")
    L0 = cholesky_lower(R0 @ R0.T)
    Lk = cholesky_lower(Rk @ Rk.T)
    S0k = R0 @ Rk.T
    W = scipy.linalg.solve_triangular(L0, S0k, lower=True, check_finite=False)
    W = scipy.linalg.solve_triangular(Lk, W.T, lower=True, check_finite=False).T
    sv = scipy.linalg.svdvals(W, check_finite=False)
    lam = np.zeros(Rk.shape[0])
    lam[: sv.size] = sv * sv
    if lam.max() > 1 + CLAMP_TOL:
        raise NumericalError(f"canonical correlation {lam.max():.16g} exceeds 1 beyond roundoff")
    return np.sort(np.clip(lam, 0.0, 1.0))[::-1]


def cointegration_eigenvalues(X, k: int = 1) -> np.ndarray:
    """Squared canonical correlations of the detrended, residualized data."""
    X = as_timeseries(X)
    xt = detrend(X)
    Z0, Zk, Z1 = build_regressors(X, xt, k)
    return squared_canonical_correlations(residualize(Z0, Z1), residualize(Zk, Z1))


def lr_statistic(eigs, r: int) -> float:
    """sum_{i<=r} ln(1 - eigs_i); -inf when one of them equals 1."""
    eigs = np.asarray(eigs, dtype=np.float64)
    if not 1 <= r <= eigs.size:
        raise ValidationError(f"r must lie in 1..{eigs.size}, got {r}")
    top = eigs[:r]
    if np.any((top < 0) | (top > 1)):
        raise ValidationError("eigenvalues must lie in [0, 1]")
    if np.any(top == 1.0):
        return -math.inf
    return float(np.sum(np.log1p(-top)))


def scaling_constants(N: int, T: int, k: int) -> WachterParams:
    check_regime(N, T, k)
    p = 2.0
    q = T / N - k
    a = math.sqrt(p * (p + q - 1))
    b = math.sqrt(q)
    lm = (a - b) ** 2 / (p + q) ** 2
    lp = (a + b) ** 2 / (p + q) ** 2
    c1 = math.log(1 - lp)
    c2 = -(2 ** (2 / 3)) * lp ** (2 / 3) / ((1 - lp) ** (1 / 3) * (lp - lm) ** (1 / 3)) * (p + q) ** (-2 / 3)
    return WachterParams(p=p, q=q, lambda_minus=lm, lambda_plus=lp, c1=c1, c2=c2)


def rescaled_statistic(lr: float, r: int, N: int, params: WachterParams) -> float:
    """(lr - r c1) / (N^{-2/3} c2); an lr of -inf maps to +inf."""
    if lr == -math.inf:
        return math.inf
    if not math.isfinite(lr):
        raise ValidationError(f"LR statistic must be finite or -inf, got {lr}")
    return (lr - r * params.c1) / (N ** (-2 / 3) * params.c2)


def run_test(data, k: int = 1, r: int = 1, alpha: float = 0.05, fin_sample_corr: bool = False) -> TestResult:
    """Test H0: no cointegration against at most r cointegrating relations.

    Parameters
    ----------
    data : array-like, (T + 1) x N
        Levels, one column per series, rows ordered in time.
    k : int
        VAR order.
    r : int
        Number of largest eigenvalues entering the statistic.  p-values and
        decisions are available for r <= 10 only.
    alpha : float
        Significance level, a multiple of 0.01.
    fin_sample_corr : bool
        Finite-sample correction; no formula is configured, so True raises
        UnsupportedCorrection.
    """
    if fin_sample_corr:
        raise UnsupportedCorrection("no finite-sample correction formula is configured in this build")
    X = as_timeseries(data)
    T, N = X.shape[0] - 1, X.shape[1]
    check_regime(N, T, k)
    if isinstance(r, bool) or int(r) != r or not 1 <= r <= N:
        raise ValidationError(f"r must lie in 1..N = 1..{N}, got {r}")
    tables._check_alpha(alpha)

    eigs = cointegration_eigenvalues(X, k)
    params = scaling_constants(N, T, k)
    lr = lr_statistic(eigs, r)
    stat = rescaled_statistic(lr, r, N, params)
    if r <= tables.R_MAX:
        pval = tables.p_value(r, stat)
        decision = tables.decide(r, stat, alpha)
    else:
        pval = decision = None
    return TestResult(
        eigenvalues=eigs,
        lr_raw=lr,
        statistic=stat,
        params=params,
        n=N,
        t=T,
        k=k,
        r=int(r),
        alpha=float(alpha),
        p_value=pval,
        decision=decision,
        significance_table=tables.significance_table(eigs, N, T, k),
    )


def compute_statistic(data, k: int = 1, r: int = 1) -> float:
    """Rescaled statistic only; skips table lookups (used by the Monte Carlo engine)."""
    X = as_timeseries(data)
    T, N = X.shape[0] - 1, X.shape[1]
    eigs = cointegration_eigenvalues(X, k)
    return rescaled_statistic(lr_statistic(eigs, r), r, N, scaling_constants(N, T, k))

