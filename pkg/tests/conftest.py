import os
from pathlib import Path

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def record_acceptance(number, title, passed, detail=""):
    ACCEPTANCE_LINES.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}: {detail}")


def bundled_digits_path():
    """sklearn ships the optdigits test split (1797 rows) in the same CSV layout."""
    sklearn = pytest.importorskip("sklearn")
    return Path(sklearn.__file__).parent / "datasets" / "data" / "digits.csv.gz"


@pytest.fixture(scope="session")
def digits_path():
    env = os.environ.get("PHOTONIC_QGAN_DIGITS")
    return Path(env) if env else bundled_digits_path()


@pytest.fixture(scope="session")
def digits(digits_path):
    from photonic_qgan.data import load_dataset

    return load_dataset(digits_path)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
