from __future__ import annotations

import pytest

import oracles
from hahnexton.errors import DomainError
from hahnexton.positivity import (
    DEFAULT_BOX,
    AtlasRow,
    IndexBox,
    ScanSpec,
    atlas_row,
    find_q0,
    find_q1,
    is_positive_on_window,
    kernel_window_stats,
    locate_q0,
    min_kernel_over_window,
    phi_table,
    q_grid_points,
    scan_Q,
    sign_changes,
    theorem2_sample_check,
    transition_bracket,
    upper_inclusion_check,
    window_growth_stable,
)
from hahnexton.qbessel import phi_v
from hahnexton.qcore import QContext
from hahnexton.reports import INVALID

CTX = QContext(0.5)
SMALL = IndexBox.cube(-2, 4)


def test_index_box_parsing():
    assert IndexBox.parse("-2:4") == SMALL
    b = IndexBox.parse("0:1,-1:2,3:3")
    assert b.m == (0, 1) and b.n == (-1, 2) and b.k == (3, 3)
    assert len(list(b.triples())) == 2 * 4 * 1
    assert str(SMALL) == "[-2..4]^3"
    with pytest.raises(DomainError):
        IndexBox.parse("1:2,3:4")
    with pytest.raises(DomainError):
        IndexBox((2, 1), (0, 0), (0, 0))


def test_scan_spec_validation():
    with pytest.raises(DomainError):
        ScanSpec(0.0, (0.9, 0.1, 0.1))
    with pytest.raises(DomainError):
        ScanSpec(0.0, (0.1, 0.9, 0.0))
    assert ScanSpec(0.0, (0.1, 0.9, 0.1)).grid() == q_grid_points(0.1, 0.9, 0.1)
    assert len(q_grid_points(0.1, 0.9, 0.05)) == 17


def test_v0_min_is_nonnegative():
    for q in (0.2, 0.5, 0.9):
        assert is_positive_on_window(0.0, q, SMALL, CTX)


def test_vhalf_below_and_above_q0():
    m, arg = min_kernel_over_window(-0.5, 0.2, SMALL, CTX)
    assert m >= -1e-12
    m, arg = min_kernel_over_window(-0.5, 0.9, SMALL, CTX)
    assert m < 0
    assert all(SMALL.m[0] <= a <= SMALL.m[1] for a in arg)


def test_argmin_is_lexicographically_first_among_ties():
    stats = kernel_window_stats(-0.5, 0.9, SMALL, CTX)
    ties = [t for t in SMALL.triples() if tuple(sorted(t)) == tuple(sorted(stats.argmin))]
    assert stats.argmin == min(ties)


def test_atlas_row_invariants():
    row = atlas_row(-0.5, 0.9, SMALL, CTX)
    assert row.is_positive is False and row.pos_tol >= 0 and row.min_value < -row.pos_tol
    assert row.window == str(SMALL)


def test_atlas_row_records_errors():
    row = atlas_row(-1.5, 0.5, SMALL, CTX)
    assert row.min_value is None and row.is_positive is None and "exceed" in row.error


def test_scan_rows_ascending_and_independent():
    spec = ScanSpec(0.0, (0.1, 0.9, 0.1), SMALL)
    rows = scan_Q(spec, CTX)
    assert [r.q for r in rows] == sorted(r.q for r in rows) and len(rows) == 9
    assert all(r.is_positive for r in rows)
    again = [atlas_row(0.0, q, SMALL, CTX) for q in reversed(spec.grid())][::-1]
    assert rows == again


def test_scan_v_minus_03_has_negative_row():
    rows = scan_Q(ScanSpec(-0.3, (0.5, 0.95, 0.05)), CTX)
    assert any(r.is_positive is False for r in rows)


def test_q0_is_a_root_and_agrees_with_scan():
    z = locate_q0(CTX, 1e-12)
    assert abs(float(oracles.phi11(z.value, z.value, z.value))) < 1e-8
    rows = scan_Q(ScanSpec(-0.5, (round(z.value - 0.005, 3), round(z.value + 0.005, 3), 0.001)), CTX)
    lo, hi = transition_bracket(rows)
    assert lo <= z.value + 1e-3 and hi >= z.value - 1e-3 and hi - lo <= 1e-3 + 1e-12


def test_q0_refinement_is_monotone():
    prev = None
    for tol in (1e-4, 5e-5, 1e-8):
        r = find_q0(CTX, tol)
        if prev:
            assert abs(r - prev[0]) <= prev[1]
        prev = (r, tol)


def test_q1_and_phi_signs():
    q1 = find_q1(CTX, 1e-12)
    assert abs(q1 - 0.658) < 1e-3
    assert abs(phi_v(0.0, q1, CTX)) < 1e-8
    for v in (-0.2, -0.5, -0.8):
        assert phi_v(v, q1, CTX) < 0
    table = phi_table(q1, CTX)
    assert len(table) == 41 and table[0][0] == -1.0 and table[-1][0] == 1.0


@pytest.mark.parametrize("x,v,q", [(-0.5, 0.0, 0.3), (-0.5, -0.25, 0.43), (0.0, 1.5, 0.8)])
def test_theorem2_examples(x, v, q):
    r = theorem2_sample_check(x, v, q, SMALL, CTX)
    assert r.passed and r.params["premise"]


def test_theorem2_domain():
    assert theorem2_sample_check(0.5, 0.0, 0.5, SMALL, CTX).status == INVALID


def test_upper_inclusion():
    q0 = find_q0(CTX)
    rows = scan_Q(ScanSpec(-0.5, (0.3, 0.6, 0.05), SMALL), CTX)
    assert upper_inclusion_check(rows, q0, 0.05).passed
    fake = [AtlasRow(0.9, -0.5, "w", 1.0, (0, 0, 0), True, 0.0)]
    assert not upper_inclusion_check(fake, q0, 0.01).passed
    assert upper_inclusion_check([AtlasRow(0.9, 0.0, "w", 1.0, (0, 0, 0), True, 0.0)], q0, 0.01).status == INVALID


def test_window_growth_recorded():
    before, after = window_growth_stable(-0.5, 0.9, SMALL, CTX)
    assert after <= before


def test_default_box_and_sign_changes():
    assert DEFAULT_BOX == IndexBox.cube(-4, 8)
    assert sign_changes([1.0, 0.0, -2.0, -1.0, 3.0]) == 2
