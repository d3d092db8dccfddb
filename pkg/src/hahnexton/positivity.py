"""Sampling the positivity domain of the generalized translation.

The translation is positive exactly when its kernel D_v is nonnegative, so
each atlas row records the minimum of D_v over a finite box of lattice
indices.  A row can only say "nonnegative on this box"; it cannot certify
positivity on the whole lattice.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DomainError, QBesselError
from .kernels import kernel_D
from .qbessel import find_first_zero, first_sign_change, phi_v
from .qcore import QContext, phi_1_1
from .reports import OK, VerificationReport

POS_TOL_FACTOR = 1e-12
Q1_BRACKET = (0.5, 0.7)
Q0_DEFINITION = "first zero in q of 1phi1(0; q; q, q)"
Q1_DEFINITION = "first zero in q of (q^2;q^2)_inf^2 J_0(1; q^2)"


@dataclass(frozen=True)
class IndexBox:
    """Box [m_lo..m_hi] x [n_lo..n_hi] x [k_lo..k_hi] of lattice exponents."""

    m: tuple[int, int] = (-4, 8)
    n: tuple[int, int] = (-4, 8)
    k: tuple[int, int] = (-4, 8)

    def __post_init__(self) -> None:
        for lo, hi in (self.m, self.n, self.k):
            if lo > hi:
                raise DomainError(f"empty index range [{lo}..{hi}]")

    @classmethod
    def cube(cls, lo: int, hi: int) -> IndexBox:
        return cls((lo, hi), (lo, hi), (lo, hi))

    @classmethod
    def parse(cls, text: str) -> IndexBox:
        """Accept ``lo:hi`` for a cube or ``a:b,c:d,e:f`` for a general box."""
        parts = [tuple(int(s) for s in p.split(":")) for p in text.split(",")]
        if len(parts) == 1:
            return cls(parts[0], parts[0], parts[0])
        if len(parts) != 3 or any(len(p) != 2 for p in parts):
            raise DomainError(f"cannot parse index box {text!r}")
        return cls(*parts)

    def triples(self) -> Iterable[tuple[int, int, int]]:
        return itertools.product(
            range(self.m[0], self.m[1] + 1), range(self.n[0], self.n[1] + 1), range(self.k[0], self.k[1] + 1)
        )

    def __str__(self) -> str:
        if self.m == self.n == self.k:
            return f"[{self.m[0]}..{self.m[1]}]^3"
        return "x".join(f"[{a}..{b}]" for a, b in (self.m, self.n, self.k))


DEFAULT_BOX = IndexBox()


class WindowStats(NamedTuple):
    min_value: float
    argmin: tuple[int, int, int]
    max_abs: float


@dataclass(frozen=True)
class AtlasRow:
    q: float
    v: float
    window: str
    min_value: float | None
    argmin: tuple[int, int, int] | None
    is_positive: bool | None
    pos_tol: float | None
    error: str = ""


@dataclass(frozen=True)
class ScanSpec:
    v: float
    q_grid: tuple[float, float, float]
    window: IndexBox = field(default_factory=IndexBox)
    pos_tol_factor: float = POS_TOL_FACTOR

    def __post_init__(self) -> None:
        start, stop, step = self.q_grid
        if not (0.0 < start <= stop < 1.0) or step <= 0:
            raise DomainError(f"invalid q grid {self.q_grid}")
        if self.pos_tol_factor < 0:
            raise DomainError("pos_tol factor must be nonnegative")

    def grid(self) -> list[float]:
        return q_grid_points(*self.q_grid)


def q_grid_points(start: float, stop: float, step: float) -> list[float]:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


@lru_cache(maxsize=4096)
def kernel_window_stats(v: float, q: float, window: IndexBox, ctx: QContext) -> WindowStats:
    """Minimum and largest magnitude of D_v over the box.

    D_v is symmetric in its three slots, so each unordered triple is
    evaluated once.  Ties go to the lexicographically smallest triple.
    """
    local = ctx.with_q(q)
    seen: dict[tuple[int, int, int], float] = {}
    best = math.inf
    arg = (0, 0, 0)
    biggest = 0.0
    for t in window.triples():
        key = tuple(sorted(t))
        if key not in seen:
            try:
                seen[key] = kernel_D(v, *key, local)
            except QBesselError as exc:
                raise type(exc)(f"{exc} at (m, n, k) = {t}") from exc
        val = seen[key]
        biggest = max(biggest, abs(val))
        if val < best:
            best, arg = val, t
    return WindowStats(best, arg, biggest)


def min_kernel_over_window(v: float, q: float, window: IndexBox, ctx: QContext) -> tuple[float, tuple[int, int, int]]:
    stats = kernel_window_stats(v, q, window, ctx)
    return stats.min_value, stats.argmin


def is_positive_on_window(v: float, q: float, window: IndexBox, ctx: QContext, factor: float = POS_TOL_FACTOR) -> bool:
    stats = kernel_window_stats(v, q, window, ctx)
    return stats.min_value >= -factor * stats.max_abs


def atlas_row(v: float, q: float, window: IndexBox, ctx: QContext, factor: float = POS_TOL_FACTOR) -> AtlasRow:
    try:
        stats = kernel_window_stats(v, q, window, ctx)
    except QBesselError as exc:
        return AtlasRow(q, v, str(window), None, None, None, None, str(exc))
    tol = factor * stats.max_abs
    return AtlasRow(q, v, str(window), stats.min_value, stats.argmin, stats.min_value >= -tol, tol)


def _row_job(args: tuple[float, float, IndexBox, QContext, float]) -> AtlasRow:
    return atlas_row(*args)


def scan_Q(spec: ScanSpec, ctx: QContext, workers: int = 1) -> list[AtlasRow]:
    """One row per grid value of q, ascending; rows do not depend on each other."""
    jobs = [(spec.v, q, spec.window, ctx, spec.pos_tol_factor) for q in spec.grid()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_row_job, jobs))
    return [_row_job(j) for j in jobs]


def transition_bracket(rows: Sequence[AtlasRow]) -> tuple[float, float] | None:
    """Last positive and first non-positive q of the first sign transition."""
    for a, b in zip(rows, rows[1:]):
        if a.is_positive and b.is_positive is False:
            return a.q, b.q
    return None


def q0_function(q: float, ctx: QContext) -> float:
    """1phi1(0; q; q, q), summed in base q."""
    return phi_1_1(q, q, ctx.with_q(q))


class ZeroResult(NamedTuple):
    name: str
    value: float
    bracket: tuple[float, float]
    tol: float
    definition: str


def locate_q0(ctx: QContext, tol: float = 1e-12, scan_step: float = 0.01) -> ZeroResult:
    """q0 together with the coarse bracket the bisection started from."""
    f = lambda q: q0_function(q, ctx)  # noqa: E731
    bracket = first_sign_change(f, scan_step, 1.0 - scan_step, scan_step)
    return ZeroResult("q0", find_first_zero(f, bracket, tol), bracket, tol, Q0_DEFINITION)


def locate_q1(ctx: QContext, tol: float = 1e-12) -> ZeroResult:
    value = find_first_zero(lambda q: phi_v(0.0, q, ctx), Q1_BRACKET, tol)
    return ZeroResult("q1", value, Q1_BRACKET, tol, Q1_DEFINITION)


def find_q0(ctx: QContext, tol: float = 1e-12, scan_step: float = 0.01) -> float:
    """First zero of q -> 1phi1(0; q; q, q) on (0, 1)."""
    return locate_q0(ctx, tol, scan_step).value


def find_q1(ctx: QContext, tol: float = 1e-12) -> float:
    """First zero of phi_0 on the bracket [0.5, 0.7]."""
    return locate_q1(ctx, tol).value


def phi_table(q: float, ctx: QContext, v_lo: float = -1.0, v_hi: float = 1.0, step: float = 0.05) -> list[tuple[float, float]]:
    """(v, phi_v(q)) on a uniform grid of orders."""
    count = int(round((v_hi - v_lo) / step)) + 1
    return [(round(v_lo + i * step, 12), phi_v(round(v_lo + i * step, 12), q, ctx)) for i in range(count)]


def theorem2_sample_check(
    x_order: float, v_order: float, q: float, window: IndexBox, ctx: QContext, factor: float = POS_TOL_FACTOR
) -> VerificationReport:
    """Sampled inclusion: D_x nonnegative on the box implies D_v nonnegative there, for v >= x.

    ``lhs`` and ``rhs`` are the two window minima; ``abs_residual`` is the
    amount by which D_v dips below its tolerance when the premise holds.
    """
    params = {"x": x_order, "v": v_order, "q": q, "window": str(window)}
    if not v_order >= x_order > -1:
        return VerificationReport.invalid("theorem2_inclusion", params, "need v >= x > -1")
    sx = kernel_window_stats(x_order, q, window, ctx)
    sv = kernel_window_stats(v_order, q, window, ctx)
    tol_x = factor * sx.max_abs
    tol_v = factor * sv.max_abs
    premise = sx.min_value >= -tol_x
    conclusion = sv.min_value >= -tol_v
    deficit = max(0.0, -tol_v - sv.min_value) if premise else 0.0
    params["premise"] = premise
    params["conclusion"] = conclusion
    return VerificationReport(
        "theorem2_inclusion", params, sx.min_value, sv.min_value, deficit, 0.0, tol_v,
        (not premise) or conclusion, status=OK,
    )


def upper_inclusion_check(rows: Sequence[AtlasRow], q0: float, grid_tol: float) -> VerificationReport:
    """For orders in (-1, -1/2]: every q found positive must satisfy q <= q0 + grid_tol."""
    if not rows:
        return VerificationReport.invalid("upper_inclusion", {}, "no rows")
    v = rows[0].v
    params = {"v": v, "q0": q0, "grid_tol": grid_tol}
    if not -1 < v <= -0.5:
        return VerificationReport.invalid("upper_inclusion", params, "need -1 < v <= -1/2")
    offenders = [r.q for r in rows if r.is_positive and r.q > q0 + grid_tol]
    worst = max(offenders, default=q0)
    params["offending_q"] = offenders
    return VerificationReport(
        "upper_inclusion", params, worst, q0, max(0.0, worst - q0), 0.0, grid_tol, not offenders, status=OK
    )


def window_growth_stable(v: float, q: float, window: IndexBox, ctx: QContext, extra: int = 2) -> tuple[float, float]:
    """Window minima before and after extending every index range upward by ``extra``."""
    grown = IndexBox(*((lo, hi + extra) for lo, hi in (window.m, window.n, window.k)))
    return min_kernel_over_window(v, q, window, ctx)[0], min_kernel_over_window(v, q, grown, ctx)[0]


def sign_changes(values: Sequence[float]) -> int:
    arr = np.sign(np.asarray(values))
    arr = arr[arr != 0]
    return int(np.sum(arr[1:] != arr[:-1]))

