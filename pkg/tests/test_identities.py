from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hahnexton.identities import (
    GrafLatticeParams,
    GrafParams,
    graf_chain_lhs,
    graf_original,
    graf_rewritten,
    lemma1_check,
    order_shift_series,
    product_formula,
)
from hahnexton.qbessel import Base
from hahnexton.qcore import QContext
from hahnexton.reports import ERROR, INVALID, OK

orders = st.sampled_from([-0.4, 0.0, 0.3, 0.8, 1.5])


@pytest.mark.parametrize(
    "p,q",
    [(GrafParams(1.0, 0.0, 0.0, 0.0, 0), 0.4), (GrafParams(0.25, 0.5, 0.3, 0.25, 1), 0.5), (GrafParams(1.3, 0.5, -0.3, 0.7, -1), 0.5)],
)
def test_graf_original_examples(p, q):
    r = graf_original(p, QContext(q), tolerance=1e-10)
    assert r.status == OK and r.passed, r


def test_graf_original_lhs_matches_oracle():
    p, q = GrafParams(0.25, 0.5, 0.3, 0.25, 1), 0.5
    r = graf_original(p, QContext(q))
    b = q
    want = oracles.J(p.v, p.R * b ** ((p.y + p.z + p.v) / 2), b) * oracles.J(p.x - p.v, b ** (p.z / 2), b)
    assert r.lhs == pytest.approx(float(want), rel=1e-12)


def test_graf_original_gate():
    r = graf_original(GrafParams(3.0, 0.0, 0.0, 0.0, 0), QContext(0.5))
    assert r.status == INVALID and not r.passed and not r.counts_as_failure
    assert graf_original(GrafParams(0.5, -1.0, 0.0, 0.0, 0), QContext(0.5)).status == INVALID


@pytest.mark.parametrize("p,q", [(GrafLatticeParams(0, 0, 0.0, 0.0), 0.5), (GrafLatticeParams(2, -1, 0.3, 0.9), 0.6)])
def test_graf_rewritten_examples(p, q):
    r = graf_rewritten(p, QContext(q), tolerance=1e-10)
    assert r.passed, r


@settings(max_examples=30, deadline=None)
@given(m=st.integers(-2, 3), z=st.integers(-2, 3), v=orders, x=orders, q=st.sampled_from([0.3, 0.5, 0.7]))
def test_graf_rewritten_grid(m, z, v, x, q):
    r = graf_rewritten(GrafLatticeParams(m, z, v, x), QContext(q), tolerance=1e-9)
    assert r.passed, r


def test_graf_rewritten_invalid_order():
    assert graf_rewritten(GrafLatticeParams(0, 0, 0.0, -1.2), QContext(0.5)).status == INVALID


def test_graf_probe_window_too_small_is_an_error_report():
    r = graf_rewritten(GrafLatticeParams(0, 0, 0.3, 0.8), QContext(0.9), k_probe=(-2, 2))
    assert r.status == ERROR and r.counts_as_failure


def test_graf_rewriting_chain():
    # R = q^r with r = 1 and m = y + z + v + r an integer
    q = 0.5
    p = GrafParams(q, 0.5, 0.7, 0.3, 1)
    orig, lattice = graf_chain_lhs(p, QContext(q))
    assert orig == pytest.approx(lattice, rel=1e-12)


def test_reports_are_reproducible():
    ctx = QContext(0.5)
    a = graf_rewritten(GrafLatticeParams(1, 2, 0.3, 0.8), ctx)
    b = graf_rewritten(GrafLatticeParams(1, 2, 0.3, 0.8), ctx)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize(
    "v,x,m,z,lam,q", [(0.2, 0.7, 1, 0, 2, 0.5), (-0.3, 0.4, 0, 2, -1, 0.35), (0.0, 0.0, 0, 0, 0, 0.5)]
)
def test_product_formula_examples(v, x, m, z, lam, q):
    r = product_formula(v, x, m, z, lam, QContext(q), tolerance=1e-9)
    assert r.passed, r


def test_product_formula_lhs_at_origin_is_j0_squared():
    q = 0.5
    r = product_formula(0.0, 0.0, 0, 0, 0, QContext(q))
    assert r.lhs == pytest.approx(float(oracles.jq(0.0, 0, q) ** 2), rel=1e-13)


def test_product_formula_domain():
    assert product_formula(0.8, -0.4, 0, 0, 0, QContext(0.5)).status == INVALID


@pytest.mark.parametrize("normalized", [False, True])
def test_order_shift(normalized):
    ctx = QContext(0.5)
    assert order_shift_series(0.8, 0.5, 1, ctx, normalized, 1e-10).passed
    r0 = order_shift_series(0.8, 0.0, 1, ctx, normalized)
    assert r0.passed and r0.abs_residual <= 1e-15
    assert order_shift_series(0.0, 1.5, 0, ctx, normalized).status == INVALID


@pytest.mark.parametrize("v,t,x_idx,q", [(0.0, 0.0, 0, 0.5), (0.5, -0.2, 3, 0.6), (1.5, 1.0, -2, 0.3)])
def test_lemma1_examples(v, t, x_idx, q):
    assert lemma1_check(v, t, x_idx, QContext(q), 1e-10).passed


def test_lemma1_scaling_in_x():
    ctx = QContext(0.6)
    v, t = 0.5, -0.2
    base = lemma1_check(v, t, 0, ctx)
    for k in (-2, 1, 4):
        r = lemma1_check(v, t, k, ctx)
        assert r.rhs == pytest.approx(base.rhs * 0.6 ** (-k * (1 + v + t)), rel=1e-13)
        assert r.lhs == pytest.approx(r.rhs, rel=1e-10)


def test_lemma1_domain():
    assert lemma1_check(-0.4, -0.7, 0, QContext(0.5)).status == INVALID
    assert lemma1_check(-1.0, 0.0, 0, QContext(0.5)).status == INVALID


def test_base_q2_original_form_passes():
    r = graf_original(GrafParams(0.7, 0.3, 0.0, 0.8, 1), QContext(0.5), Base.Q_SQUARED, 1e-10)
    assert r.passed, r
