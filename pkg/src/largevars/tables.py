"""Embedded quantile tables for partial sums of the Airy_1 point process.

One plain-text file per r = 1..10 ships in ``largevars/data``.  Each holds
100 lines ``q=<level> <value>`` for levels 0.00..0.99; level 0.00 is -inf.
Lookups never interpolate: p-values and decisions live on the 0.01 grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import OutOfRange, ParseError, ValidationError

R_MAX = 10
N_LEVELS = 100
LEVELS = np.arange(N_LEVELS) / 100.0
SIGNIFICANCE_LEVELS = (0.90, 0.95, 0.97, 0.99)


@dataclass(frozen=True)
class QuantileTable:
    """Quantiles of the sum of the first r Airy_1 points at levels 0.00..0.99."""

    r: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (N_LEVELS,):
            raise ValidationError(f"a quantile table needs {N_LEVELS} values, got shape {v.shape}")
        if v[0] != -np.inf or not np.all(np.isfinite(v[1:])):
            raise ValidationError("level 0.00 must be -inf and all other levels finite")
        if np.any(np.diff(v[1:]) < 0):
            bad = int(np.argmax(np.diff(v[1:]) < 0)) + 2
            raise ValidationError(f"table for r={self.r} decreases at level {bad / 100:.2f}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def at(self, level: float) -> float:
        return float(self.values[level_index(level)])

    def grid(self) -> np.ndarray:
        """10 x 10 view: row a, column b holds the 0.ab quantile."""
        return self.values.reshape(10, 10)


def level_index(level: float) -> int:
    """Map a level on the 0.01 grid (0.00..0.99) to its table index."""
    idx = round(float(level) * 100)
    if not 0 <= idx < N_LEVELS or abs(idx - float(level) * 100) > 1e-6:
        raise OutOfRange(f"level {level!r} is not on the 0.00..0.99 grid")
    return idx


def _check_r(r: int) -> int:
    if isinstance(r, bool) or int(r) != r or not 1 <= r <= R_MAX:
        raise OutOfRange(f"quantile tables exist for r = 1..{R_MAX} only, got r={r}")
    return int(r)


def _check_alpha(alpha: float) -> int:
    """Return the table index of level 1 - alpha."""
    a = float(alpha)
    k = round(a * 100)
    if not 0 < a < 1 or abs(k - a * 100) > 1e-6:
        raise OutOfRange(f"alpha must be a multiple of 0.01 in (0, 1), got {alpha!r}")
    return N_LEVELS - k


def parse_table_text(text: str, r: int) -> QuantileTable:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            key, val = line.split()
            if not key.startswith("q="):
                raise ValueError
            idx = level_index(float(key[2:]))
            values[idx] = float(val)
        except (ValueError, OutOfRange) as exc:
            raise ParseError(f"line {lineno}: cannot parse {raw!r}") from exc
    if sorted(values) != list(range(N_LEVELS)):
        raise ParseError(f"table for r={r} does not cover every level 0.00..0.99")
    return QuantileTable(r, np.array([values[i] for i in range(N_LEVELS)]))


def read_table_file(path: str | Path, r: int) -> QuantileTable:
    return parse_table_text(Path(path).read_text(encoding="utf-8"), r)


def format_table_text(table: QuantileTable, header: list[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    for i, v in enumerate(table.values):
        lines.append(f"q={i / 100:.2f} {'-inf' if v == -np.inf else repr(float(v))}")
    return "\n".join(lines) + "\n"


def write_table_file(path: str | Path, table: QuantileTable, header: list[str] = ()) -> None:
    Path(path).write_text(format_table_text(table, header), encoding="utf-8")


def table_resource_name(r: int) -> str:
    return f"airy_r{r:02d}.txt"


@lru_cache(maxsize=None)
def quantile_table(r: int) -> QuantileTable:
    """The embedded table for the sum of the first r Airy_1 points, 1 <= r <= 10."""
    r = _check_r(r)
    text = resources.files("largevars").joinpath("data", table_resource_name(r)).read_text(encoding="utf-8")
    return parse_table_text(text, r)


def p_value(r: int, stat: float) -> float:
    """Grid p-value: one minus the largest level whose quantile is <= stat.

    No interpolation; the result lies in {0.01, ..., 1.00}.
    """
    values = quantile_table(r).values
    if math.isnan(stat):
        raise ValidationError("statistic is NaN")
    # index of the largest level with value <= stat (level 0.00 is -inf, so >= 0)
    q_star = int(np.searchsorted(values, stat, side="right")) - 1
    return max(N_LEVELS - q_star, 1) / 100


def critical_value(r: int, alpha: float) -> float:
    return float(quantile_table(r).values[_check_alpha(alpha)])


def decide(r: int, stat: float, alpha: float) -> int:
    """1 (reject no-cointegration) iff stat exceeds the (1 - alpha) quantile."""
    return int(stat > critical_value(r, alpha))


def significance_rows(r_count: int) -> np.ndarray:
    """(r_count, 4) quantiles at levels 0.90/0.95/0.97/0.99 for r = 1..r_count."""
    out = np.empty((r_count, len(SIGNIFICANCE_LEVELS)))
    for i in range(r_count):
        tab = quantile_table(i + 1)
        out[i] = [tab.at(q) for q in SIGNIFICANCE_LEVELS]
    return out


def significance_table(eigs: np.ndarray, N: int, T: int, k: int) -> np.ndarray:
    """Rows r = 1..min(10, N): the four critical values and the statistic for that r.

    Columns are the 0.90, 0.95, 0.97 and 0.99 quantiles followed by the
    rescaled statistic recomputed from the same eigenvalues.
    """
    from .coint import lr_statistic, rescaled_statistic, scaling_constants

    params = scaling_constants(N, T, k)
    rows = min(R_MAX, N, len(eigs))
    table = np.empty((rows, len(SIGNIFICANCE_LEVELS) + 1))
    table[:, :-1] = significance_rows(rows)
    for i in range(rows):
        table[i, -1] = rescaled_statistic(lr_statistic(eigs, i + 1), i + 1, N, params)
    return table
