import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from shiftlab import Sft  # noqa: E402
from shiftlab.errors import InvalidSft  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def golden():
    return Sft.golden_mean()


@pytest.fixture(scope="session")
def full2():
    return Sft.full_shift(2)


@pytest.fixture(scope="session")
def full3():
    return Sft.full_shift(3)


def random_sft(rng, m):
    """Random valid primitive SFT on m symbols (rejection sampling)."""
    while True:
        a = (rng.random((m, m)) < 0.6).astype(int)
        a[0, 0] = 1
        try:
            return Sft(m, a)
        except InvalidSft:
            continue


@st.composite
def sfts(draw, max_m=4):
    m = draw(st.integers(2, max_m))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_sft(np.random.default_rng(seed), m)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
