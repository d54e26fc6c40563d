import numpy as np
import pytest
from hypothesis import strategies as st

from mcqwalk.walk import TOSS, CoinState


def random_coin(rng: np.random.Generator, m: int) -> CoinState:
    v = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
    return CoinState(v / np.linalg.norm(v))


@st.composite
def coin_states(draw, min_coins=1, max_coins=4):
    m = draw(st.integers(min_coins, max_coins))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_coin(np.random.default_rng(seed), m)


def dense_step_operator(m: int, n: int, active: int, toss=TOSS) -> np.ndarray:
    """Full (2^M n) x (2^M n) matrix of shift-after-toss, assembled from Kronecker products.

    Coin factors come first (qubit 1 outermost), position last.
    """
    eye2 = np.eye(2)

    def on_active(op):
        out = np.array([[1.0]])
        for q in range(1, m + 1):
            out = np.kron(out, op if q == active else eye2)
        return out

    s_plus = np.roll(np.eye(n), 1, axis=0)   # |x+1><x|
    s_minus = np.roll(np.eye(n), -1, axis=0)  # |x-1><x|
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    shift = np.kron(on_active(p0), s_plus) + np.kron(on_active(p1), s_minus)
    return shift @ np.kron(on_active(toss), np.eye(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
