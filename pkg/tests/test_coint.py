import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from largevars.coint import (
    build_regressors,
    check_regime,
    cointegration_eigenvalues,
    compute_statistic,
    cyclic_index,
    detrend,
    lr_statistic,
    rescaled_statistic,
    residualize,
    run_test,
    scaling_constants,
    squared_canonical_correlations,
)
from largevars.errors import DimensionError, UnsupportedCorrection, ValidationError
from largevars.tables import significance_table

from .oracles import determinant_roots_cca

# Published statistics of the weekly S&P100 sample (N=92, T=521, k=1), r = 1..10.
SP100_STATS = np.array(
    [
        -0.2777314, -1.4995879, -5.4154889, -10.5527603, -16.7460847,
        -23.2178976, -31.1080001, -39.3197363, -49.8419822, -60.4894485,
    ]
)
SP100_QUANTILES = np.array(
    [
        [0.45, 0.98, 1.33, 2.02],
        [-1.87, -1.09, -0.57, 0.42],
        [-5.90, -4.90, -4.24, -2.99],
        [-11.35, -10.15, -9.37, -7.87],
        [-18.07, -16.69, -15.79, -14.07],
        [-25.95, -24.40, -23.38, -21.45],
        [-34.90, -33.19, -32.07, -29.95],
        [-44.88, -43.01, -41.79, -39.47],
        [-55.82, -53.80, -52.48, -49.99],
        [-67.70, -65.53, -64.12, -61.45],
    ]
)


def backsolve_eigenvalues(stats, N, T, k):
    """Invert the rescaling: recover lambda_1..lambda_r from the statistics for r = 1..len(stats)."""
    with mpmath.workdps(40):
        p = mpmath.mpf(2)
        q = mpmath.mpf(T) / N - k
        lp = (mpmath.sqrt(p * (p + q - 1)) + mpmath.sqrt(q)) ** 2 / (p + q) ** 2
        lm = (mpmath.sqrt(p * (p + q - 1)) - mpmath.sqrt(q)) ** 2 / (p + q) ** 2
        c1 = mpmath.log(1 - lp)
        c2 = -mpmath.cbrt(4) * lp ** (mpmath.mpf(2) / 3) / mpmath.cbrt((1 - lp) * (lp - lm)) / (p + q) ** (mpmath.mpf(2) / 3)
        lr = [r * c1 + mpmath.mpf(s) * mpmath.power(N, -mpmath.mpf(2) / 3) * c2 for r, s in enumerate(stats, 1)]
        inc = [lr[0]] + [b - a for a, b in zip(lr[:-1], lr[1:])]
        return np.array([float(1 - mpmath.exp(v)) for v in inc])


def random_walk_data(rng, T, N):
    return np.vstack([np.zeros(N), np.cumsum(rng.normal(size=(T, N)), axis=0)])


class TestDetrend:
    def test_linear_series_vanishes_up_to_constant(self):
        X = np.outer(np.arange(6.0), [2.0, -1.0]) + [3.0, 5.0]
        np.testing.assert_allclose(detrend(X), np.tile([3.0, 5.0], (5, 1)), atol=1e-14)

    def test_small_example(self):
        X = np.array([[0.0], [1.0], [5.0]])  # T=2, slope (X_T - X_0)/T = 2.5
        np.testing.assert_allclose(detrend(X), [[0.0], [1.0 - 2.5]])

    def test_direct_formula(self, rng):
        X = rng.normal(size=(11, 3))
        T = 10
        expected = np.array([X[t - 1] - (t - 1) / T * (X[T] - X[0]) for t in range(1, T + 1)])
        np.testing.assert_allclose(detrend(X), expected, rtol=1e-14, atol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), T=st.integers(2, 60), N=st.integers(1, 5))
    def test_removes_linear_trend(self, seed, T, N):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(T + 1, N))
        trend = np.outer(np.arange(T + 1), rng.normal(size=N) * 10) + rng.normal(size=N)
        a, b = detrend(X + trend), detrend(X)
        np.testing.assert_allclose(a - b, np.broadcast_to(trend[0], a.shape), atol=1e-9)


class TestIndexing:
    @pytest.mark.parametrize("a,T,expected", [(1, 5, 1), (5, 5, 5), (0, 5, 5), (-1, 5, 4), (6, 5, 1), (-5, 5, 5)])
    def test_cyclic_index(self, a, T, expected):
        assert cyclic_index(a, T) == expected

    def test_cyclic_index_bad_period(self):
        with pytest.raises(ValidationError):
            cyclic_index(3, 0)

    def test_regime_boundary(self):
        check_regime(2, 5, 1)
        with pytest.raises(DimensionError, match="T/N > k\\+1"):
            check_regime(2, 4, 1)
        with pytest.raises(DimensionError):
            check_regime(3, 9, 2)


class TestRegressors:
    def test_k1(self, rng):
        X = rng.normal(size=(9, 2))
        xt = detrend(X)
        Z0, Zk, Z1 = build_regressors(X, xt, 1)
        np.testing.assert_array_equal(Z0, np.diff(X, axis=0).T)
        np.testing.assert_array_equal(Zk, xt.T)
        np.testing.assert_array_equal(Z1, np.ones((1, 8)))

    def test_k2_wraps(self):
        X = np.array([[0.0], [1.0], [3.0], [6.0], [10.0], [15.0], [21.0]])  # dX = 1..6
        Z0, Zk, Z1 = build_regressors(X, detrend(X), 2)
        np.testing.assert_array_equal(Z0[0], [1, 2, 3, 4, 5, 6])
        # lagged difference at t=1 wraps to dX_T
        np.testing.assert_array_equal(Z1[0], [6, 1, 2, 3, 4, 5])
        np.testing.assert_array_equal(Z1[1], np.ones(6))
        xt = detrend(X)[:, 0]
        np.testing.assert_array_equal(Zk[0], np.roll(xt, 1))

    def test_k3_index_oracle(self, rng):
        N, T, k = 2, 13, 3
        X = rng.normal(size=(T + 1, N))
        xt = detrend(X)
        dX = {t: X[t] - X[t - 1] for t in range(1, T + 1)}
        Z0, Zk, Z1 = build_regressors(X, xt, k)
        for t in range(1, T + 1):
            np.testing.assert_array_equal(Z0[:, t - 1], dX[t])
            np.testing.assert_array_equal(Zk[:, t - 1], xt[cyclic_index(t - k + 1, T) - 1])
            lags = np.concatenate([dX[cyclic_index(t - j, T)] for j in range(1, k)] + [[1.0]])
            np.testing.assert_array_equal(Z1[:, t - 1], lags)

    def test_dimension_error(self, rng):
        X = rng.normal(size=(7, 3))
        with pytest.raises(DimensionError):
            build_regressors(X, detrend(X), 1)


class TestResidualize:
    def test_constant_regressor_demeans(self, rng):
        Z = rng.normal(size=(2, 30)) + 5
        R = residualize(Z, np.ones((1, 30)))
        np.testing.assert_allclose(R, Z - Z.mean(axis=1, keepdims=True), atol=1e-12)

    def test_orthogonal_to_regressors(self, rng):
        Z1 = rng.normal(size=(3, 40))
        R = residualize(rng.normal(size=(2, 40)), Z1)
        np.testing.assert_allclose(R @ Z1.T, 0, atol=1e-10)

    def test_regressand_in_span(self, rng):
        Z1 = rng.normal(size=(3, 40))
        R = residualize(np.array([[1.0, -2.0, 0.5]]) @ Z1, Z1)
        np.testing.assert_allclose(R, 0, atol=1e-12)


class TestCanonicalCorrelations:
    def test_identical_blocks(self, rng):
        R = rng.normal(size=(3, 50))
        np.testing.assert_allclose(squared_canonical_correlations(R, R), 1, atol=1e-12)

    def test_orthogonal_blocks(self):
        t = np.arange(64) * 2 * np.pi / 64
        R0 = np.vstack([np.sin(t), np.cos(t)])
        Rk = np.vstack([np.sin(2 * t), np.cos(3 * t)])
        np.testing.assert_allclose(squared_canonical_correlations(R0, Rk), 0, atol=1e-14)

    def test_determinant_oracle(self, rng):
        R0 = rng.normal(size=(3, 40))
        Rk = R0 + rng.normal(size=(3, 40))
        np.testing.assert_allclose(squared_canonical_correlations(R0, Rk), determinant_roots_cca(R0, Rk), atol=1e-8)

    def test_mismatched_columns(self, rng):
        with pytest.raises(ValidationError):
            squared_canonical_correlations(rng.normal(size=(2, 10)), rng.normal(size=(2, 11)))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 6))
    def test_range_and_trace(self, seed, N):
        rng = np.random.default_rng(seed)
        T = 8 * N + 5
        R0 = rng.normal(size=(N, T))
        Rk = 0.5 * R0 + rng.normal(size=(N, T))
        lam = squared_canonical_correlations(R0, Rk)
        assert np.all((lam >= 0) & (lam <= 1))
        assert np.all(np.diff(lam) <= 0)
        S00, Skk, S0k = R0 @ R0.T, Rk @ Rk.T, R0 @ Rk.T
        M = np.linalg.solve(S00, S0k) @ np.linalg.solve(Skk, S0k.T)
        assert lam.sum() == pytest.approx(np.trace(M), rel=1e-9, abs=1e-12)


class TestPipelineInvariants:
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 4), k=st.integers(1, 2))
    def test_affine_invariance(self, seed, N, k):
        rng = np.random.default_rng(seed)
        T = (k + 1) * N + 20
        X = random_walk_data(rng, T, N)
        A = rng.normal(size=(N, N)) + 2 * np.eye(N)
        b = rng.normal(size=N)
        lam = cointegration_eigenvalues(X, k)
        np.testing.assert_allclose(cointegration_eigenvalues(X @ A.T + b, k), lam, atol=1e-8)

    def test_trend_invariance(self, rng):
        X = random_walk_data(rng, 60, 3)
        trended = X + np.outer(np.arange(61), [0.3, -2.0, 7.0])
        np.testing.assert_allclose(cointegration_eigenvalues(trended, 2), cointegration_eigenvalues(X, 2), atol=1e-8)

    def test_k1_plain_index_pipeline(self, rng):
        """Straight-line reimplementation for k=1: demeaned dX and detrended levels, then eigenvalues."""
        N, T = 3, 30
        X = random_walk_data(rng, T, N)
        dX = np.diff(X, axis=0)
        xt = np.array([X[t - 1] - (t - 1) / T * (X[T] - X[0]) for t in range(1, T + 1)])
        R0 = (dX - dX.mean(axis=0)).T
        Rk = (xt - xt.mean(axis=0)).T
        S00, Skk, S0k = R0 @ R0.T, Rk @ Rk.T, R0 @ Rk.T
        M = np.linalg.solve(Skk, S0k.T) @ np.linalg.solve(S00, S0k)
        expected = np.sort(np.linalg.eigvals(M).real)[::-1]
        np.testing.assert_allclose(cointegration_eigenvalues(X, 1), expected, atol=1e-10)


class TestStatistic:
    def test_lr_examples(self):
        assert lr_statistic([0.5, 0.2], 1) == pytest.approx(math.log(0.5))
        assert lr_statistic([0.5, 0.2], 2) == pytest.approx(math.log(0.5) + math.log(0.8))
        assert lr_statistic([1.0, 0.2], 1) == -math.inf
        assert lr_statistic([0.0], 1) == 0.0

    def test_lr_errors(self):
        with pytest.raises(ValidationError):
            lr_statistic([0.5], 2)
        with pytest.raises(ValidationError):
            lr_statistic([1.5], 1)

    def test_constants_symbolic_oracle(self):
        import sympy as sp

        p, q = sp.Integer(2), sp.Rational(4, 1) - 1  # N=1, T=4, k=1
        lp = (sp.sqrt(p * (p + q - 1)) + sp.sqrt(q)) ** 2 / (p + q) ** 2
        lm = (sp.sqrt(p * (p + q - 1)) - sp.sqrt(q)) ** 2 / (p + q) ** 2
        c1 = sp.log(1 - lp)
        c2 = -sp.Integer(2) ** sp.Rational(2, 3) * lp ** sp.Rational(2, 3) * (1 - lp) ** sp.Rational(-1, 3)
        c2 *= (lp - lm) ** sp.Rational(-1, 3) * (p + q) ** sp.Rational(-2, 3)
        got = scaling_constants(1, 4, 1)
        assert got.q == 3.0
        for name, ref in [("lambda_plus", lp), ("lambda_minus", lm), ("c1", c1), ("c2", c2)]:
            assert getattr(got, name) == pytest.approx(float(sp.N(ref, 30)), rel=1e-13), name

    @settings(max_examples=50, deadline=None)
    @given(N=st.integers(1, 500), ratio=st.floats(2.05, 50), k=st.integers(1, 3))
    def test_constant_signs(self, N, ratio, k):
        T = math.ceil(N * (k + ratio))
        prm = scaling_constants(N, T, k)
        assert 0 <= prm.lambda_minus < prm.lambda_plus < 1
        assert prm.c1 < 0 and prm.c2 < 0

    def test_rescaled_examples(self):
        prm = scaling_constants(92, 521, 1)
        assert rescaled_statistic(prm.c1, 1, 92, prm) == 0.0
        assert rescaled_statistic(-math.inf, 1, 92, prm) == math.inf
        # smaller LR (larger eigenvalues) gives a larger statistic
        assert rescaled_statistic(prm.c1 - 0.1, 1, 92, prm) > 0
        with pytest.raises(ValidationError):
            rescaled_statistic(math.nan, 1, 92, prm)

    def test_sp100_backsolve_is_consistent(self):
        """The published statistics imply a valid decreasing set of eigenvalues under the edge."""
        lam = backsolve_eigenvalues(SP100_STATS, 92, 521, 1)
        prm = scaling_constants(92, 521, 1)
        assert np.all(np.diff(lam) < 0)
        assert lam[0] < prm.lambda_plus and lam[-1] > 0.5
        for r in range(1, 11):
            got = rescaled_statistic(lr_statistic(lam, r), r, 92, prm)
            assert got == pytest.approx(SP100_STATS[r - 1], abs=1e-9)

    def test_sp100_significance_table(self):
        lam = backsolve_eigenvalues(SP100_STATS, 92, 521, 1)
        eigs = np.concatenate([lam, np.linspace(lam[-1] - 0.01, 0.05, 82)])
        table = significance_table(eigs, 92, 521, 1)
        assert table.shape == (10, 5)
        np.testing.assert_allclose(table[:, 4], SP100_STATS, atol=1e-6)
        np.testing.assert_array_equal(table[:2, :4], SP100_QUANTILES[:2])
        np.testing.assert_allclose(table[:, :4], SP100_QUANTILES, atol=0.05 + 1e-12)


class TestRunTest:
    def test_result_fields(self, rng):
        X = random_walk_data(rng, 120, 5)
        res = run_test(X, k=1, r=2, alpha=0.05)
        assert res.n == 5 and res.t == 120 and res.k == 1
        assert res.statistic == pytest.approx(compute_statistic(X, 1, 2))
        assert res.p_value in {i / 100 for i in range(1, 101)}
        assert res.decision in (0, 1)
        assert res.significance_table.shape == (5, 5)
        assert res.eigenvalues.shape == (5,)

    def test_r_larger_than_ten_has_no_p_value(self, rng):
        X = random_walk_data(rng, 300, 12)
        res = run_test(X, r=11)
        assert res.p_value is None and res.decision is None
        assert math.isfinite(res.statistic)
        assert res.to_dict()["p_value"] is None

    @pytest.mark.parametrize(
        "kwargs,exc",
        [
            (dict(r=6), ValidationError),
            (dict(r=0), ValidationError),
            (dict(alpha=0.055), ValidationError),
            (dict(alpha=0.0), ValidationError),
            (dict(fin_sample_corr=True), UnsupportedCorrection),
            (dict(k=30), DimensionError),
        ],
    )
    def test_errors(self, rng, kwargs, exc):
        X = random_walk_data(rng, 100, 5)
        with pytest.raises(exc):
            run_test(X, **kwargs)

    def test_nonfinite_data(self):
        X = np.ones((20, 2))
        X[3, 1] = np.nan
        with pytest.raises(ValidationError):
            run_test(X)
