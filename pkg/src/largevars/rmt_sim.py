"""Monte Carlo engines.

Two simulators live here:

* Airy_1 partial sums from the top-left corner of the Gaussian tridiagonal
  model of the GOE (normal diagonal, chi off-diagonal), used to regenerate the
  quantile tables at desk scale.
* Null (random-walk) VAR datasets pushed through the cointegration test to
  get empirical p-values.

Every run draws from its own stream derived from (seed, run index), so the
output does not depend on chunking, worker count or execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coint import check_regime, compute_statistic
from .errors import InsufficientSamples, UnsupportedCorrection, ValidationError
from .numerics import SymTridiag, tridiag_top_eigenvalues_batch
from .tables import N_LEVELS, QuantileTable

# bisection tolerance, relative to max(1, ||t||_inf)
EIG_RTOL = 1e-10
DEFAULT_CHUNK = 1024


def run_rng(seed: int, run: int) -> np.random.Generator:
    """Independent generator for one Monte Carlo run."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(run,)))


@dataclass(frozen=True)
class AirySimConfig:
    n_full: int = 10**6
    m: int | None = None
    r_max: int = 10
    num_sims: int = 20_000
    seed: int = 0

    def __post_init__(self):
        if self.m is None:
            object.__setattr__(self, "m", math.isqrt(self.n_full))
        if self.n_full < 2:
            raise ValidationError("n_full must be >= 2")
        if not 1 <= self.m <= self.n_full:
            raise ValidationError(f"corner size m must lie in 1..n_full, got {self.m}")
        if not 1 <= self.r_max <= min(10, self.m):
            raise ValidationError(f"r_max must lie in 1..min(10, m), got {self.r_max}")
        if self.num_sims < 1:
            raise ValidationError("num_sims must be >= 1")
        if self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")


@dataclass(frozen=True)
class AirySimBatch:
    """``samples[s, r-1]`` is the sum of the r largest rescaled eigenvalues in run s."""

    config: AirySimConfig
    samples: np.ndarray

    def to_csv(self, path) -> None:
        header = ",".join(f"r{r}" for r in range(1, self.samples.shape[1] + 1))
        np.savetxt(path, self.samples, delimiter=",", header=header, comments="", fmt="%.17g")


def _chi_shapes(cfg: AirySimConfig) -> np.ndarray:
    # off-diagonal j (1-based) is chi with n_full - j degrees of freedom
    return (cfg.n_full - np.arange(1, cfg.m, dtype=np.float64)) / 2.0


def _draw_corner(rng: np.random.Generator, m: int, shapes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    diag = rng.normal(0.0, math.sqrt(2.0), size=m)
    offdiag = np.sqrt(2.0 * rng.standard_gamma(shapes))
    return diag, offdiag


def sample_corner_tridiag(cfg: AirySimConfig, run: int) -> SymTridiag:
    """Top-left m x m corner of the n_full x n_full tridiagonal GOE model for one run.

    Diagonal entries are N(0, 2); off-diagonal entry j is chi with n_full - j
    degrees of freedom, drawn as the square root of a Gamma((n_full - j)/2,
    scale 2) variate (numpy's gamma sampler is exact for large shapes).
    """
    d, e = _draw_corner(run_rng(cfg.seed, run), cfg.m, _chi_shapes(cfg))
    return SymTridiag(d, e)


def airy_partial_sums(cfg: AirySimConfig, chunk: int = DEFAULT_CHUNK, progress=None) -> AirySimBatch:
    """Simulate ``cfg.num_sims`` runs of the first r_max Airy_1 partial sums.

    Each corner's top r_max eigenvalues mu_i are mapped to
    n_full^(1/6) (mu_i - 2 sqrt(n_full)) and cumulatively summed.
    ``progress``, if given, is called with the number of finished runs.
    """
    if chunk < 1:
        raise ValidationError("chunk must be >= 1")
    shapes = _chi_shapes(cfg)
    scale = cfg.n_full ** (1 / 6)
    center = 2.0 * math.sqrt(cfg.n_full)
    out = np.empty((cfg.num_sims, cfg.r_max))
    for start in range(0, cfg.num_sims, chunk):
        stop = min(start + chunk, cfg.num_sims)
        D = np.empty((stop - start, cfg.m))
        E = np.empty((stop - start, cfg.m - 1))
        for i, run in enumerate(range(start, stop)):
            D[i], E[i] = _draw_corner(run_rng(cfg.seed, run), cfg.m, shapes)
        mu = tridiag_top_eigenvalues_batch(D, E, cfg.r_max, EIG_RTOL)
        out[start:stop] = np.cumsum(scale * (mu - center), axis=1)
        if progress is not None:
            progress(stop)
    return AirySimBatch(cfg, out)


def empirical_quantiles(x: np.ndarray) -> np.ndarray:
    """Order-statistic quantiles at levels 0.00..0.99; level l takes the ceil(l n)-th smallest."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    n = x.size
    values = np.empty(N_LEVELS)
    values[0] = -np.inf
    for i in range(1, N_LEVELS):
        rank = -(-i * n // 100)  # ceil(i n / 100) in exact integer arithmetic
        values[i] = x[rank - 1]
    return values


def estimate_quantile_table(batch: AirySimBatch, r: int, groups: int = 1) -> QuantileTable:
    """Empirical quantile table for column r of a batch.

    With ``groups > 1`` the runs are split into that many contiguous groups,
    each group's quantiles are estimated separately and the results averaged.
    """
    samples = batch.samples
    if not 1 <= r <= samples.shape[1]:
        raise ValidationError(f"r must lie in 1..{samples.shape[1]}, got {r}")
    if groups < 1:
        raise ValidationError("groups must be >= 1")
    col = samples[:, r - 1]
    if col.size // groups < 100:
        raise InsufficientSamples(f"need at least 100 runs per group, have {col.size} runs in {groups} group(s)")
    parts = np.array_split(col, groups)
    values = np.mean([empirical_quantiles(p) for p in parts], axis=0)
    return QuantileTable(r, values)


# -- null VAR simulation ---------------------------------------------------------


@dataclass(frozen=True)
class H0SimConfig:
    N: int
    tau: int
    k: int = 1
    r: int = 1
    fin_sample_corr: bool = False
    sim_num: int = 1000
    seed: int | None = None

    def __post_init__(self):
        if self.sim_num < 1:
            raise ValidationError(f"sim_num must be >= 1, got {self.sim_num}")
        if self.tau < 2 or self.N < 1:
            raise ValidationError("need tau >= 2 and N >= 1")
        check_regime(self.N, self.tau - 1, self.k)
        if not 1 <= self.r <= self.N:
            raise ValidationError(f"r must lie in 1..N, got {self.r}")
        if self.seed is not None and self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")


def random_walk(increments: np.ndarray) -> np.ndarray:
    """Levels X_0 = 0, X_t = X_{t-1} + increments[t-1]; returns (len + 1) x N."""
    inc = np.asarray(increments, dtype=np.float64)
    if inc.ndim == 1:
        inc = inc[:, None]
    X = np.zeros((inc.shape[0] + 1, inc.shape[1]))
    np.cumsum(inc, axis=0, out=X[1:])
    return X


def simulate_h0_dataset(N: int, tau: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Driftless Gaussian random walk of length tau in N dimensions, started at 0.

    This is the VAR(k) error-correction model with Pi = 0, Gamma_i = 0, mu = 0
    and standard normal errors.
    """
    check_regime(N, tau - 1, k)
    return random_walk(rng.standard_normal((tau - 1, N)))


def null_statistics(cfg: H0SimConfig) -> np.ndarray:
    """Rescaled statistics of ``cfg.sim_num`` simulated null datasets."""
    if cfg.fin_sample_corr:
        raise UnsupportedCorrection("no finite-sample correction formula is configured in this build")
    seed = cfg.seed if cfg.seed is not None else int(np.random.SeedSequence().entropy)
    out = np.empty(cfg.sim_num)
    for s in range(cfg.sim_num):
        X = simulate_h0_dataset(cfg.N, cfg.tau, cfg.k, run_rng(seed, s))
        out[s] = compute_statistic(X, cfg.k, cfg.r)
    return out


def empirical_p_value(cfg: H0SimConfig, stat_value: float) -> tuple[float, np.ndarray]:
    """Fraction of simulated null statistics strictly larger than stat_value."""
    samples = null_statistics(cfg)
    return float(np.mean(samples > stat_value)), samples


def simulate_var2_example(N: int = 100, T: int = 1500, rng: np.random.Generator | None = None) -> np.ndarray:
    """VAR(2) with two cointegrating relations among series 1-2 and 4-5.

    dX_t = Pi X_{t-2} + Gamma dX_{t-1} + eps_t, with Pi and Gamma non-zero only
    in the 5 x 5 upper-left block; all other series are pure random walks.
    X_{-1} and X_0 have independent standard normal coordinates.  Returns the
    (T + 1) x N levels X_0..X_T.
    """
    if N < 5:
        raise ValidationError("the example needs N >= 5")
    rng = rng if rng is not None else np.random.default_rng()
    Pi = np.zeros((N, N))
    Pi[0, 0], Pi[0, 1] = -0.9, 0.8
    Pi[3, 3], Pi[3, 4] = -0.9, 0.8
    Gamma = np.zeros((N, N))
    Gamma[0, 0], Gamma[0, 1], Gamma[1, 1] = -0.7, 0.8, 0.3
    Gamma[3, 3], Gamma[3, 4], Gamma[4, 4] = -1.2, 0.8, 0.25

    x_prev2 = rng.standard_normal(N)  # X_{-1}
    x_prev = rng.standard_normal(N)  # X_0
    eps = rng.standard_normal((T, N))
    X = np.empty((T + 1, N))
    X[0] = x_prev
    for t in range(1, T + 1):
        dx = Pi @ x_prev2 + Gamma @ (x_prev - x_prev2) + eps[t - 1]
        x_prev2, x_prev = x_prev, x_prev + dx
        X[t] = x_prev
    return X
