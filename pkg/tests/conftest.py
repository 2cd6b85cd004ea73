import math

import numpy as np
import pytest
from hypothesis import strategies as st

from weakmeas.hilbert import FockPointerState, QubitState

SQ = 1 / math.sqrt(2)
MAX_SIGNAL = QubitState(SQ, 1j * SQ)  # Im(alpha* beta) = 1/2


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


def random_qubit(rng) -> QubitState:
    v = rng.normal(size=4)
    return QubitState.from_unnormalized(complex(v[0], v[1]), complex(v[2], v[3]))


def random_pointer(rng, n_max: int, support: int | None = None) -> FockPointerState:
    k = n_max + 1 if support is None else support
    amps = np.zeros(n_max + 1, dtype=complex)
    amps[:k] = rng.normal(size=k) + 1j * rng.normal(size=k)
    return FockPointerState(amps / np.linalg.norm(amps))


_component = st.floats(-1, 1, allow_nan=False, allow_infinity=False)


@st.composite
def qubits(draw):
    v = [draw(_component) for _ in range(4)]
    if math.hypot(*v) < 1e-3:
        v[0] = 1.0
    return QubitState.from_unnormalized(complex(v[0], v[1]), complex(v[2], v[3]))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
