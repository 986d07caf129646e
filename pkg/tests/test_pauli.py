import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import pauli_pairs, pauli_strings
from pcslab.errors import DimensionError, ResourceError
from pcslab.pauli import PauliString, commutes, multiply, symplectic_product, to_matrix, weight


@pytest.mark.parametrize(
    "text, expected",
    [("XYZ", "+XYZ"), ("-ZZ", "-ZZ"), ("iX", "+iX"), ("-iIY", "-iIY"), ("+I", "+I")],
)
def test_text_round_trip(text, expected):
    assert str(PauliString.from_str(text)) == expected
    assert PauliString.from_str(expected) == PauliString.from_str(text)


@pytest.mark.parametrize("bad", ["XQ", "--X", "x"])
def test_from_str_rejects_garbage(bad):
    with pytest.raises(ValueError):
        PauliString.from_str(bad)


def test_single_qubit_products():
    X, Y, Z = (PauliString.from_str(c) for c in "XYZ")
    assert X * Y == PauliString.from_str("iZ")
    assert Y * X == PauliString.from_str("-iZ")
    assert Z * X == PauliString.from_str("iY")
    assert X * X == PauliString.from_str("I")


def test_from_sparse_and_accessors():
    p = PauliString.from_sparse(5, {1: "X", 3: "Y"})
    assert str(p) == "+IXIYI"
    assert p.support() == [1, 3]
    assert p[3] == "Y"
    assert weight(p) == 2
    assert PauliString.from_str("XXI").is_x_type() and not PauliString.from_str("XZ").is_x_type()
    assert PauliString.from_str("ZIZ").is_z_type()


def test_size_mismatch():
    with pytest.raises(DimensionError):
        multiply(PauliString.from_str("X"), PauliString.from_str("XX"))


def test_matrix_cap():
    with pytest.raises(ResourceError):
        to_matrix(PauliString.identity(15))


@given(pauli_pairs())
def test_product_matches_matrices(pair):
    a, b = pair
    assert np.allclose(to_matrix(a * b), to_matrix(a) @ to_matrix(b))


@given(pauli_pairs())
def test_commutation_matches_matrices(pair):
    a, b = pair
    ma, mb = to_matrix(a), to_matrix(b)
    assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)
    assert symplectic_product(a, b) == symplectic_product(b, a)


@given(pauli_strings(), st.integers(0, 3))
def test_hash_and_equality_respect_phase(p, k):
    q = PauliString(p.xs, p.zs, p.phase + k)
    assert (p == q) == (k == 0)
    if k == 0:
        assert hash(p) == hash(q)


@given(pauli_strings(signed=False))
def test_unsigned_strings_square_to_identity(p):
    sq = p * p
    assert sq == PauliString.identity(p.n)


@given(pauli_strings())
def test_immutable(p):
    with pytest.raises((AttributeError, ValueError)):
        p.xs[0] = 1
