from __future__ import annotations

import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hahnexton.errors import DomainError, PoleError, WindowTooSmallError
from hahnexton.qcore import (
    LatticeFunction,
    NormSpec,
    QContext,
    bilateral_sum,
    jackson_integral,
    jackson_sum,
    log_qpoch_exp,
    lqpv_norm,
    phi_1_1,
    qpoch_exp,
    qpochhammer,
    signed_log_sum,
)

qs = st.floats(0.05, 0.95)


@pytest.mark.parametrize("q", [0.0, 1.0, -0.3, 1.2])
def test_context_rejects_bad_q(q):
    with pytest.raises(DomainError):
        QContext(q)


def test_context_rejects_bad_tolerances():
    with pytest.raises(DomainError):
        QContext(0.5, series_tol=0.0)
    with pytest.raises(DomainError):
        QContext(0.5, max_terms=0)


def test_with_q_keeps_policy():
    ctx = QContext(0.5, series_tol=1e-10, lattice_neg=7)
    other = ctx.with_q(0.3)
    assert other.q == 0.3 and other.series_tol == 1e-10 and other.lattice_neg == 7


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-0.95, 0.95), q=qs, n=st.integers(0, 40))
def test_qpochhammer_finite_matches_mpmath(a, q, n):
    got = qpochhammer(a, n, QContext(q))
    want = float(oracles.qpoch(a, q, n))
    assert got == pytest.approx(want, rel=1e-12, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-0.95, 0.95), q=qs)
def test_qpochhammer_infinite_matches_mpmath(a, q):
    got = qpochhammer(a, math.inf, QContext(q))
    assert got == pytest.approx(float(oracles.qpoch(a, q)), rel=1e-12)


def test_qpochhammer_zero_length_is_one():
    assert qpochhammer(0.7, 0, QContext(0.5)) == 1.0


@settings(max_examples=60, deadline=None)
@given(e=st.floats(-6.5, 6.0), q=qs)
def test_log_qpoch_exp_matches_mpmath(e, q):
    if abs(e - round(e)) < 1e-6 and round(e) <= 0:
        return
    lv, sg = log_qpoch_exp(e, q)
    want = oracles.qpoch(mp.mpf(q) ** e, q)
    assert sg * math.exp(lv) == pytest.approx(float(want), rel=1e-11)


@pytest.mark.parametrize("e", [0, -1, -4])
def test_log_qpoch_exp_vanishes_at_nonpositive_integers(e):
    lv, sg = log_qpoch_exp(float(e), 0.5)
    assert sg == 0 and lv == -math.inf
    assert qpoch_exp(float(e), 0.5) == 0.0


def test_signed_log_sum_recovers_plain_sum():
    vals = [3.0, -2.5, 1e-3, -7.25]
    s, ref, a = signed_log_sum([(math.log(abs(v)), 1 if v > 0 else -1) for v in vals])
    assert s * math.exp(ref) == pytest.approx(sum(vals))
    assert a * math.exp(ref) == pytest.approx(sum(abs(v) for v in vals))


@settings(max_examples=40, deadline=None)
@given(b=st.floats(-0.9, 0.9), z=st.floats(-3.0, 3.0), q=st.floats(0.1, 0.9))
def test_phi11_matches_mpmath(b, z, q):
    got = phi_1_1(b, z, QContext(q))
    want, size = oracles.phi11(b, z, q, magnitude=True)
    # a float series cannot beat eps times the sum of its absolute terms
    assert got == pytest.approx(float(want), rel=1e-10, abs=max(1e-12, 1e-13 * float(size)))


def test_phi11_pole():
    with pytest.raises(PoleError):
        phi_1_1(4.0, 0.5, QContext(0.5))  # (b; q)_n hits zero at b q^2 = 1


def test_lattice_function_arithmetic():
    f = LatticeFunction({0: 1.0, 2: -3.0})
    g = LatticeFunction.indicator(2, 3.0)
    h = f + g
    assert h[2] == 0.0 and h[0] == 1.0 and h[5] == 0.0
    assert f.scale(2.0)(2) == -6.0
    assert f.abs()[2] == 3.0
    assert f.support == [0, 2]
    assert f.max_abs_difference(h, range(-1, 4)) == 3.0
    assert LatticeFunction.zero().support == []


def test_bilateral_sum_two_sided_geometric():
    q = 0.6
    res = bilateral_sum(lambda n: q ** abs(n), QContext(q))
    assert res.value == pytest.approx((1 + q) / (1 - q), rel=1e-13)
    assert res.window[0] < 0 < res.window[1]


def test_bilateral_sum_flags_small_window():
    ctx = QContext(0.9, lattice_neg=5, lattice_pos=5)
    with pytest.raises(WindowTooSmallError) as info:
        bilateral_sum(lambda n: 0.9 ** abs(n), ctx)
    assert info.value.side == "right"


def test_jackson_integral_of_unit_interval_indicator():
    # int_0^1 1 d_q x = 1 exactly
    q = 0.5
    f = LatticeFunction({n: 1.0 for n in range(0, 200)})
    want = 1.0
    assert jackson_integral(f, QContext(q)) == pytest.approx(want, rel=1e-14)


def test_jackson_integral_of_callable():
    q = 0.7
    ctx = QContext(q, lattice_neg=400)
    res = jackson_sum(lambda x: x / (1 + x**3), ctx)
    direct = (1 - q) * math.fsum(q**n * q**n / (1 + q ** (3 * n)) for n in range(-400, 400))
    assert res.value == pytest.approx(direct, rel=1e-12)


def test_lqpv_norm_of_indicator():
    q = 0.4
    f = LatticeFunction.indicator(3, -2.0)
    for p, v in [(1, 0.0), (2, 0.5), (3, -0.5)]:
        want = (abs(-2.0) ** p * q ** (3 * (2 * v + 2)) * (1 - q)) ** (1 / p)
        assert lqpv_norm(f, NormSpec(p, v), QContext(q)) == pytest.approx(want, rel=1e-14)


def test_norm_spec_validation():
    with pytest.raises(DomainError):
        NormSpec(0.5, 0.0)
    with pytest.raises(DomainError):
        NormSpec(2, -1.0)
