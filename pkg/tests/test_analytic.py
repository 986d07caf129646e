from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcslab import analytic
from pcslab.errors import DomainError, ValidationError
from pcslab.noise import fidelity_from_p
from pcslab.protocols import build_pcs_x_pair, build_pcs_xz_pair
from pcslab.stabilizer import enumerate_paths

unit = st.floats(0.0, 1.0, allow_nan=False)
F_dom = st.floats(0.25, 1.0, allow_nan=False)


def _bbpssw_exact(F: Fraction):
    e = (1 - F) / 3
    c = F**2 + 2 * F * (1 - F) / 3 + 5 * e**2
    return (F**2 + e**2) / c, c


@pytest.mark.parametrize("F", [Fraction(k, 100) for k in range(55, 100, 5)] + [Fraction(3, 4)])
def test_bbpssw_matches_rational_evaluation(F):
    f_out, c = _bbpssw_exact(F)
    pt = analytic.bbpssw_step(float(F))
    assert pt.F_out == pytest.approx(float(f_out), abs=1e-12)
    assert pt.rate == pytest.approx(float(c), abs=1e-12)
    assert pt.qubit_cost == 4


def test_bbpssw_frozen_values():
    pt = analytic.bbpssw_step(0.75)
    assert pt.F_out == pytest.approx(0.788462, abs=1e-6)
    assert pt.rate == pytest.approx(0.722222, abs=1e-6)
    assert analytic.bbpssw_step(1.0).F_out == 1.0 and analytic.bbpssw_step(1.0).rate == 1.0


@pytest.mark.parametrize("F", [0.5, 1.0])
def test_bbpssw_fixed_points(F):
    assert analytic.bbpssw_step(F).F_out == pytest.approx(F, abs=1e-9)


def test_bbpssw_recursive():
    assert analytic.bbpssw_recursive(0.7, 1) == analytic.bbpssw_step(0.7)
    seq = analytic.bbpssw_sequence(0.9, 3)
    assert seq[1] < seq[2] < seq[3]
    pt = analytic.bbpssw_recursive(0.9, 3)
    assert pt.F_out == seq[3]
    assert [analytic.bbpssw_recursive(0.9, r).qubit_cost for r in (1, 2, 3)] == [4, 8, 16]
    r1, r2 = analytic.bbpssw_step(0.9), analytic.bbpssw_step(seq[1])
    assert pt.rate < r1.rate * r2.rate
    with pytest.raises(ValidationError):
        analytic.bbpssw_recursive(0.9, 0)


def test_pcs_x_examples():
    pt = analytic.pcs_x_point_p(0.0, 0.0)
    assert (pt.rate, pt.F_out, pt.qubit_cost) == (1.0, 1.0, 4)
    assert analytic.pcs_x_point_p(0.4, 0.4).rate == pytest.approx(0.4624, abs=1e-12)
    half = analytic.pcs_x_point_F(0.5)
    assert half.rate == pytest.approx(4 / 9) and half.F_out == pytest.approx(0.5625)
    assert analytic.pcs_x_point_F(0.25).F_out == pytest.approx(0.25)
    assert analytic.pcs_x_point_F(1.0).F_out == 1.0


def test_pcs_xz_examples():
    pt = analytic.pcs_xz_point_p(0.0, 0.0)
    assert (pt.rate, pt.F_out, pt.qubit_cost) == (1.0, 1.0, 6)
    assert analytic.pcs_xz_point_p(1.0, 1.0).rate == pytest.approx(1 / 16, abs=1e-15)
    one = analytic.pcs_xz_point_F(1.0)
    assert one.rate == pytest.approx(1.0) and one.F_out == pytest.approx(1.0)
    mid = analytic.pcs_xz_point_F(0.8)
    assert 0 < mid.rate < 1 and 0.8 < mid.F_out < 1


def test_pcs_xz_first_order_slope():
    E = 1e-4
    slope = (1 - analytic.pcs_xz_point_F(1 - E).F_out) / E
    assert slope == pytest.approx(1 / 3, abs=1e-3)


@pytest.mark.parametrize("fn", [analytic.pcs_x_point_F, analytic.pcs_xz_point_F])
def test_F_domain_guard(fn):
    with pytest.raises(DomainError):
        fn(0.2)
    with pytest.raises(DomainError):
        fn(1.1)


def test_p_domain_guard():
    with pytest.raises(DomainError):
        analytic.pcs_x_point_p(-0.1, 0.0)
    with pytest.raises(DomainError):
        analytic.appendix_half_channel(1.5)


def test_point_validation():
    with pytest.raises(ValidationError):
        analytic.PurificationPoint(0.5, 1.2, 0.5, 4)


def test_half_channel_examples():
    assert analytic.appendix_half_channel(0.0) == (1.0, 1.0)
    assert analytic.appendix_half_channel(1.0)[0] == 0.5


GRID21 = np.linspace(0, 1, 21)


def test_rate_factorizes_on_grid():
    worst = max(
        abs(analytic.pcs_x_rate(a, b) - analytic.appendix_half_channel(a)[0] * analytic.appendix_half_channel(b)[0])
        for a in GRID21
        for b in GRID21
    )
    assert worst < 1e-12


@pytest.mark.parametrize("p", np.linspace(0, 1, 11))
def test_half_channel_matches_enumeration(p):
    res = enumerate_paths(build_pcs_x_pair(p, 0.0))
    c1, f1 = analytic.appendix_half_channel(p)
    assert res.pass_prob == pytest.approx(c1, abs=1e-12)
    assert res.bell_fidelity == pytest.approx(f1, abs=1e-12)


def test_F_forms_match_p_forms():
    worst = 0.0
    for p in np.linspace(0, 1, 201):
        F = fidelity_from_p(p)
        for f_p, f_F in (
            (analytic.pcs_x_point_p(p, p), analytic.pcs_x_point_F(F)),
            (analytic.pcs_xz_point_p(p, p), analytic.pcs_xz_point_F(F)),
        ):
            assert f_p.F_in == pytest.approx(F, abs=1e-12)
            worst = max(worst, abs(f_p.F_out - f_F.F_out), abs(f_p.rate - f_F.rate))
    assert worst < 1e-10


@pytest.mark.parametrize("p1, p2", [(0.1, 0.3), (0.5, 0.5), (0.9, 0.2), (0.33, 0.77)])
def test_formulas_match_enumeration(p1, p2):
    x = enumerate_paths(build_pcs_x_pair(p1, p2))
    xz = enumerate_paths(build_pcs_xz_pair(p1, p2))
    assert analytic.pcs_x_point_p(p1, p2).F_out == pytest.approx(x.bell_fidelity, abs=1e-12)
    assert analytic.pcs_xz_point_p(p1, p2).F_out == pytest.approx(xz.bell_fidelity, abs=1e-12)
    assert analytic.pcs_xz_point_p(p1, p2).rate == pytest.approx(xz.pass_prob, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(unit, unit)
def test_p_forms_stay_in_range(p1, p2):
    for pt in (analytic.pcs_x_point_p(p1, p2), analytic.pcs_xz_point_p(p1, p2)):
        assert 0 <= pt.rate <= 1 + 1e-12
        assert 0 <= pt.F_out <= 1 + 1e-12
    c1, f1 = analytic.appendix_half_channel(p1)
    assert 0.5 - 1e-12 <= c1 <= 1 and 0 <= f1 <= 1 + 1e-12


@settings(max_examples=200, deadline=None)
@given(F_dom)
def test_F_forms_stay_in_range(F):
    for pt in (analytic.pcs_x_point_F(F), analytic.pcs_xz_point_F(F), analytic.bbpssw_step(F)):
        assert 0 <= pt.rate <= 1 + 1e-12
        assert 0 <= pt.F_out <= 1 + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0.5, 1.0))
def test_xz_dominates_x_at_high_fidelity(F):
    assert analytic.pcs_xz_point_F(F).F_out >= analytic.pcs_x_point_F(F).F_out - 1e-12


def test_crossover_pcs_x():
    c = analytic.crossover_region("PCS_X")
    assert c.roots == pytest.approx((0.25, 1.0), abs=1e-9)
    assert len(c.intervals) == 1
    assert c.intervals[0] == pytest.approx((0.25, 1.0), abs=1e-9)


def test_crossover_bbpssw():
    c = analytic.crossover_region("BBPSSW")
    assert c.roots == pytest.approx((0.25, 0.5, 1.0), abs=1e-9)
    assert c.intervals[0] == pytest.approx((0.5, 1.0), abs=1e-9)


def test_crossover_pcs_xz():
    c = analytic.crossover_region("PCS_XZ")
    lo, hi = c.intervals[0]
    assert 0.25 < lo < 0.5 and hi == pytest.approx(1.0)
    assert lo == pytest.approx(0.31150416, abs=1e-8)
    gap = analytic.pcs_xz_point_F(lo).F_out - lo
    assert abs(gap) < 1e-12


def test_crossover_unknown_scheme():
    with pytest.raises(ValidationError):
        analytic.crossover_region("DEJMPS")
