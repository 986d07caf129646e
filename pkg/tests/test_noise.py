import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcslab.dense import DensityMatrix, apply_channel, bell_fidelity, choi_distance
from pcslab.errors import DomainError, ValidationError
from pcslab.noise import (
    Convention,
    DepolarizingSpec,
    depolarizing_kraus,
    depolarizing_probs,
    effective_pcs_x_channel,
    fidelity_from_p,
    p_from_fidelity,
)

probs01 = st.floats(0, 1, allow_nan=False)


@pytest.mark.parametrize(
    "p, conv, expected",
    [
        (1.0, "main", (0.25, 0.25, 0.25, 0.25)),
        (0.4, "main", (0.7, 0.1, 0.1, 0.1)),
        (0.75, "appendix", (0.25, 0.25, 0.25, 0.25)),
        (0.3, "appendix", (0.7, 0.1, 0.1, 0.1)),
    ],
)
def test_convention_weights(p, conv, expected):
    assert depolarizing_probs(p, conv) == pytest.approx(expected)


@given(probs01)
def test_main_equals_appendix_three_quarters(p):
    main = DepolarizingSpec(p, Convention.MAIN)
    app = main.to_appendix()
    assert app.p == pytest.approx(0.75 * p)
    assert np.allclose(depolarizing_kraus(main).choi(), depolarizing_kraus(app).choi())
    assert app.to_main().p == pytest.approx(p)


def test_appendix_beyond_three_quarters_has_no_main_form():
    with pytest.raises(DomainError):
        DepolarizingSpec(0.9, "appendix").to_main()
    with pytest.raises(ValidationError):
        DepolarizingSpec(1.2)


@given(probs01)
def test_fidelity_p_inverse(p):
    assert p_from_fidelity(fidelity_from_p(p)) == pytest.approx(p, abs=1e-7)


def test_fidelity_domain():
    with pytest.raises(DomainError):
        p_from_fidelity(0.2)
    with pytest.raises(DomainError):
        fidelity_from_p(1.5)


@given(probs01)
def test_depolarized_pair_fidelity(p):
    phi = np.zeros(4, dtype=complex)
    phi[[0, 3]] = 1 / math.sqrt(2)
    rho = DensityMatrix.from_ket(phi)
    ch = depolarizing_kraus(DepolarizingSpec(p))
    out = apply_channel(apply_channel(rho, ch, [0]), ch, [1])
    assert bell_fidelity(out) == pytest.approx(fidelity_from_p(p), abs=1e-12)


@given(probs01)
def test_effective_channel_normalisation(p):
    e = effective_pcs_x_channel(p)
    total = sum(k.conj().T @ k for k in e.kraus)
    assert np.allclose(total, e.norm * np.eye(2))
    assert e.norm == pytest.approx(0.5 * (2 + p * (p - 2)))
    assert np.allclose(sum(k.conj().T @ k for k in e.normalized().operators), np.eye(2))


def test_effective_channel_conventions_agree():
    a = effective_pcs_x_channel(0.6)
    b = effective_pcs_x_channel(0.45, Convention.APPENDIX)
    assert choi_distance(a.choi(), b.choi()) < 1e-14
