import numpy as np
import pytest
from hypothesis import strategies as st

from pcslab.pauli import PauliString


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pauli_strings(n_min=1, n_max=4, signed=True):
    """Hypothesis strategy for random Pauli strings of a random size."""

    @st.composite
    def build(draw):
        n = draw(st.integers(n_min, n_max))
        chars = draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
        phase = draw(st.integers(0, 3)) if signed else 0
        p = PauliString.from_str(chars)
        return PauliString(p.xs, p.zs, phase)

    return build()


def pauli_pairs(n_max=4):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, n_max))
        a = draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
        b = draw(st.text(alphabet="IXYZ", min_size=n, max_size=n))
        pa, pb = draw(st.integers(0, 3)), draw(st.integers(0, 3))
        A, B = PauliString.from_str(a), PauliString.from_str(b)
        return PauliString(A.xs, A.zs, pa), PauliString(B.xs, B.zs, pb)

    return build()
