"""Dense and tridiagonal symmetric linear-algebra primitives.

Dense work (Cholesky solves, full symmetric spectra) is delegated to LAPACK
through scipy/numpy.  The tridiagonal top-r eigenvalue routine is a
Sturm-sequence bisection written here, because the Monte Carlo engine only
ever needs a handful of the largest eigenvalues of very long matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numba import njit, prange

from .errors import NotPositiveDefinite, NotSymmetric, ValidationError

SYMMETRY_RTOL = 1e-10

_EPS = float(np.finfo(np.float64).eps)
_TINY = float(np.finfo(np.float64).tiny)


def symmetrize(A: np.ndarray) -> np.ndarray:
    """Return (A + A.T) / 2, refusing matrices that are not symmetric to roundoff."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.size == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("matrix has non-finite entries")
    scale = np.max(np.abs(A))
    asym = np.max(np.abs(A - A.T))
    if asym > SYMMETRY_RTOL * scale:
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:g} * |A| = {SYMMETRY_RTOL * scale:.3e}")
    return 0.5 * (A + A.T)


def cholesky_lower(A: np.ndarray) -> np.ndarray:
    """Lower-triangular L with A = L L^T.

    Raises NotPositiveDefinite when LAPACK meets a non-positive pivot.
    """
    A = symmetrize(A)
    try:
        return scipy.linalg.cholesky(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            "matrix is not positive definite (rank-deficient cross-product; degenerate data?)"
        ) from exc


def solve_spd(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A X = B for symmetric positive definite A via Cholesky.

    Parameters
    ----------
    A : (N, N) array
        Symmetric positive definite; symmetrized if asymmetric only to roundoff.
    B : (N,) or (N, M) array

    Returns
    -------
    X : array with the shape of B
    """
    L = cholesky_lower(A)
    B = np.asarray(B, dtype=np.float64)
    if B.shape[0] != L.shape[0]:
        raise ValidationError(f"shape mismatch: A is {L.shape}, B is {B.shape}")
    return scipy.linalg.cho_solve((L, True), B, check_finite=False)


def sym_eigenvalues(A: np.ndarray) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, in descending order."""
    A = symmetrize(A)
    return np.linalg.eigvalsh(A)[::-1].copy()


@dataclass(frozen=True)
class SymTridiag:
    """Real symmetric tridiagonal matrix stored as its diagonal and first off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=np.float64)
        e = np.ascontiguousarray(self.offdiag, dtype=np.float64)
        if d.ndim != 1 or e.ndim != 1 or d.size < 1:
            raise ValidationError("diag must be a non-empty vector and offdiag a vector")
        if e.size != d.size - 1:
            raise ValidationError(f"offdiag length {e.size} != len(diag) - 1 = {d.size - 1}")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValidationError("tridiagonal entries must be finite")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def size(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def inf_norm(self) -> float:
        row = np.abs(self.diag).copy()
        row[:-1] += np.abs(self.offdiag)
        row[1:] += np.abs(self.offdiag)
        return float(row.max())

    def gershgorin_bounds(self) -> tuple[float, float]:
        """Interval strictly containing the spectrum (Gershgorin discs, slightly widened)."""
        return _gershgorin(self.diag, self.offdiag)

    def sturm_count(self, x: float) -> int:
        """Number of eigenvalues strictly less than x."""
        e2 = self.offdiag * self.offdiag
        return int(_sturm_count(self.diag, e2, float(x), _pivmin(e2)))


def tridiag_top_eigenvalues(t: SymTridiag, r: int, atol: float | None = None) -> np.ndarray:
    """The r largest eigenvalues of a symmetric tridiagonal matrix, descending.

    Uses Sturm-sequence counts and bisection inside the Gershgorin interval;
    no dense matrix is formed, cost is O(M * r * iterations).

    Parameters
    ----------
    t : SymTridiag
    r : int
        1 <= r <= t.size.
    atol : float, optional
        Absolute bracket width at which bisection stops.  The default bisects
        to full double precision.  Pass ``1e-10 * max(1, t.inf_norm())`` for
        the cheaper tolerance used by the Monte Carlo engine.
    """
    if not 1 <= r <= t.size:
        raise ValidationError(f"r must lie in 1..{t.size}, got {r}")
    return _top_eigs(t.diag, t.offdiag, int(r), 0.0 if atol is None else float(atol))


def tridiag_top_eigenvalues_batch(
    diags: np.ndarray, offdiags: np.ndarray, r: int, rtol: float = 0.0
) -> np.ndarray:
    """Row-wise top-r eigenvalues for a stack of tridiagonal matrices.

    ``diags`` is (runs, M) and ``offdiags`` is (runs, M - 1).  Each row is
    bisected to ``rtol * max(1, ||t||_inf)`` (0 means full precision).  Rows
    are processed in parallel; results do not depend on the thread count.
    """
    diags = np.ascontiguousarray(diags, dtype=np.float64)
    offdiags = np.ascontiguousarray(offdiags, dtype=np.float64)
    if diags.ndim != 2 or offdiags.shape != (diags.shape[0], diags.shape[1] - 1):
        raise ValidationError(f"incompatible batch shapes {diags.shape} and {offdiags.shape}")
    if not 1 <= r <= diags.shape[1]:
        raise ValidationError(f"r must lie in 1..{diags.shape[1]}, got {r}")
    return _top_eigs_batch(diags, offdiags, int(r), float(rtol))


# -- compiled kernels ---------------------------------------------------------


@njit(cache=True)
def _pivmin(e2):
    m = 1.0
    for v in e2:
        if v > m:
            m = v
    return _TINY * m


@njit(cache=True)
def _gershgorin(d, e):
    n = d.size
    lo = np.inf
    hi = -np.inf
    for i in range(n):
        rad = 0.0
        if i > 0:
            rad += abs(e[i - 1])
        if i < n - 1:
            rad += abs(e[i])
        lo = min(lo, d[i] - rad)
        hi = max(hi, d[i] + rad)
    bnorm = max(abs(lo), abs(hi), 1.0)
    fudge = 2.0 * _EPS * bnorm * n + 4.0 * _TINY
    return lo - fudge, hi + fudge


@njit(cache=True)
def _sturm_count(d, e2, x, pivmin):
    # LDL^T pivots of (T - x I); negative pivots count eigenvalues below x
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, d.size):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _top_eigs(d, e, r, atol):
    n = d.size
    e2 = e * e
    pivmin = _pivmin(e2)
    gl, gu = _gershgorin(d, e)
    lo = np.full(r, gl)
    hi = np.full(r, gu)
    out = np.empty(r)
    for j in range(r):
        # j-th largest has ascending index n-1-j: lambda >= x  iff  count(x) <= n-1-j
        if j > 0 and hi[j] > out[j - 1]:
            hi[j] = out[j - 1]
        for _ in range(256):
            width = hi[j] - lo[j]
            tol = max(atol, 2.0 * _EPS * max(abs(lo[j]), abs(hi[j])), pivmin)
            if width <= tol:
                break
            mid = 0.5 * (lo[j] + hi[j])
            if mid <= lo[j] or mid >= hi[j]:
                break
            c = _sturm_count(d, e2, mid, pivmin)
            # one count refines the brackets of every pending eigenvalue
            for jj in range(j, r):
                if c <= n - 1 - jj:
                    if mid > lo[jj]:
                        lo[jj] = mid
                elif mid < hi[jj]:
                    hi[jj] = mid
        out[j] = 0.5 * (lo[j] + hi[j])
    return out


@njit(cache=True, parallel=True)
def _top_eigs_batch(D, E, r, rtol):
    runs = D.shape[0]
    out = np.empty((runs, r))
    for s in prange(runs):
        d = D[s]
        e = E[s]
        norm = 0.0
        for i in range(d.size):
            row = abs(d[i])
            if i > 0:
                row += abs(e[i - 1])
            if i < d.size - 1:
                row += abs(e[i])
            norm = max(norm, row)
        out[s] = _top_eigs(d, e, r, rtol * max(1.0, norm))
    return out

