import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcslab import codes
from pcslab.circuit import Circuit, Measurement
from pcslab.errors import ResourceError, UnsupportedCircuitError, ValidationError
from pcslab.pauli import PauliString, commutes, weight
from pcslab.protocols import build_encoder

P = PauliString.from_str


def test_gf2_rank_and_nullspace():
    m = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=np.uint8)
    assert codes.gf2_rank(m) == 2
    ns = codes.gf2_nullspace(m)
    assert ns.shape == (1, 3)
    assert not ((m @ ns.T) % 2).any()
    assert codes.gf2_in_span(m[:2], np.array([1, 0, 1], dtype=np.uint8))
    assert not codes.gf2_in_span(m[:1], np.array([0, 0, 1], dtype=np.uint8))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_rank_nullity(rows, cols, seed):
    m = np.random.default_rng(seed).integers(0, 2, size=(rows, cols)).astype(np.uint8)
    ns = codes.gf2_nullspace(m)
    assert codes.gf2_rank(m) + len(ns) == cols
    assert not ((m @ ns.T) % 2).any() if len(ns) else True


def test_codespec_validation():
    with pytest.raises(ValidationError):
        codes.CodeSpec(2, 0, (P("XI"), P("ZI")), P("IX"), P("IZ"))
    with pytest.raises(ValidationError):
        codes.CodeSpec(2, 1, (P("XX"),), P("XI"), P("IX"))


def repetition_code():
    return codes.CodeSpec(3, 1, (P("ZZI"), P("IZZ")), P("XXX"), P("ZII"))


def test_repetition_code_distance_one():
    d = codes.distance(repetition_code())
    assert d.exact and d.value == 1
    assert weight(d.witness) == 1 and set(str(d.witness)[1:]) <= {"I", "Z"}


def test_bell_plus_free_qubit_generators():
    code = codes.CodeSpec(3, 1, (P("XXI"), P("ZZI")), P("IIX"), P("IIZ"))
    gens, wmax = codes.min_weight_generating_set(code)
    assert wmax == 2 and len(gens) == 2


@pytest.mark.parametrize("r, n", [(1, 5), (2, 7), (3, 9)])
def test_family_parameters(r, n):
    code = codes.pcs_code(r)
    assert (code.n, code.k) == (n, 1) == (2 * (r - 1) + 5, 1)
    d = codes.distance(code, cap=3)
    assert d.exact and d.value == 2
    assert codes.undetected_logicals(code, 1) == []


def test_base_code_has_distance_one():
    code = codes.pcs_code(0)
    assert (code.n, code.k) == (3, 1)
    assert codes.distance(code).value == 1


@pytest.mark.parametrize("r", [1, 2, 3])
def test_weight_one_errors_detected_or_trivial(r):
    code = codes.pcs_code(r)
    for e in codes.iter_paulis(code.n, 1):
        assert any(code.syndrome(e)) or code.in_group(e)


def test_distance_budget():
    with pytest.raises(ResourceError):
        codes.distance(codes.pcs_code(3), cap=3, budget=100)
    with pytest.raises(ValidationError):
        codes.distance(codes.pcs_code(1), cap=0)


def test_extract_rejects_measurements():
    enc, _ = build_encoder(1)
    bad = Circuit(enc.n_qubits, list(enc.ops) + [Measurement("Z", 0, "m")], None, enc.names)
    with pytest.raises(UnsupportedCircuitError):
        codes.extract_code(bad)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_max_generator_weight_four(r):
    code = codes.pcs_code(r)
    gens, wmax = codes.min_weight_generating_set(code)
    assert wmax == 4
    assert sum(weight(g) == 4 for g in gens) == 1
    assert codes.gf2_rank(codes.symplectic_matrix(gens)) == len(code.generators)
    assert all(code.in_group(g) for g in gens)


def test_r1_weight_four_generator_is_documented_one():
    code = codes.pcs_code(1)
    target = P("ZZXIZ")  # Z_rho Z_a1 X_a2 Z_a4 in builder order
    assert code.in_group(target)
    gens, _ = codes.min_weight_generating_set(code)
    assert target in [g.unsigned() for g in gens]
    forced, wmax = codes.min_weight_generating_set(code, required=target)
    assert forced[0] == target and wmax == 4
    with pytest.raises(ValidationError):
        codes.min_weight_generating_set(code, required=P("XIIII"))


@pytest.mark.parametrize("r", [1, 2, 3])
def test_no_generating_set_below_weight_four(r):
    # an independent route: all group elements of weight <= 3 span a proper subgroup
    code = codes.pcs_code(r)
    light = [p for p in codes.stabilizer_group(code) if 0 < weight(p) <= 3]
    assert codes.gf2_rank(codes.symplectic_matrix(light)) < len(code.generators)


def _css_by_enumeration(code, pattern):
    group = [codes.apply_hadamards(p, pattern) for p in codes.stabilizer_group(code)]
    pure = [p for p in group if weight(p) and (not p.xs.any() or not p.zs.any())]
    return bool(pure) and codes.gf2_rank(codes.symplectic_matrix(pure)) == len(code.generators)


@pytest.mark.parametrize("r, pattern", [(1, [2, 3]), (2, [2, 3, 6]), (3, [2, 3, 6, 7])])
def test_css_with_documented_pattern(r, pattern):
    code = codes.pcs_code(r)
    assert codes.default_h_pattern(r) == pattern
    res = codes.css_equivalence_check(code, pattern)
    assert res.is_css
    assert _css_by_enumeration(code, pattern)
    for g in res.x_generators:
        assert not g.zs.any()
    for g in res.z_generators:
        assert not g.xs.any()


@pytest.mark.parametrize("r", [1, 2, 3])
def test_not_css_without_hadamards(r):
    code = codes.pcs_code(r)
    assert not codes.css_equivalence_check(code, []).is_css
    assert not _css_by_enumeration(code, [])


def test_syndrome_0010():
    table = codes.syndrome_table(1, 2)
    hits = table[(0, 0, 1, 0)]
    assert [e for e in hits if weight(e) == 1] == [P("IIIZI")]
    assert P("XXIII") in hits
    assert table[(0, 0, 0, 0)][0] == P("IIIII")


@pytest.mark.parametrize("r", [1, 2])
def test_circuit_syndrome_equals_anticommutation(r):
    code = codes.pcs_code(r)
    circ, split = codes.build_check_circuit(r)
    for w in (1, 2):
        for e in codes.iter_paulis(circ.n_qubits, w):
            assert codes.circuit_syndrome(circ, split, e) == code.syndrome(e)


def test_syndrome_table_weight_guard():
    with pytest.raises(ValidationError):
        codes.syndrome_table(1, 3)


def test_group_members_commute():
    code = codes.pcs_code(2)
    group = codes.stabilizer_group(code)
    assert len(group) == 2 ** len(code.generators)
    for a, b in itertools.islice(itertools.combinations(group, 2), 2000):
        assert commutes(a, b)


def test_certificate():
    c = codes.certify(1)
    assert (c.n, c.k, c.distance, c.max_generator_weight, c.css) == (5, 1, 2, 4, True)
    assert c.as_dict()["h_pattern"] == (2, 3)
