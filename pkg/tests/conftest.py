import os
from pathlib import Path

import numpy as np
import pytest

DATA_DIR = Path(__file__).parent / "data"
SP100_ENV = "LARGEVARS_SP100_CSV"

# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


def sp100_path():
    env = os.environ.get(SP100_ENV)
    path = Path(env) if env else DATA_DIR / "s_p100_price.csv"
    return path if path.exists() else None


@pytest.fixture
def sp100_or_skip():
    path = sp100_path()
    if path is None:
        pytest.skip(f"S&P100 fixture not vendored (see tests/data/README.md or set ${SP100_ENV})")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
