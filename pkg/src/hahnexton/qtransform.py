"""q-Bessel Fourier transform, generalized translation and convolution.

Functions live on the lattice {q^n}; transforms are materialized on the
finite exponent window of a :class:`TransformPlan`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .kernels import kernel_D
from .qbessel import c_qv, lattice_log_j
from .qcore import LatticeFunction, NormSpec, QContext, bilateral_sum, lqpv_norm
from .reports import VerificationReport

DEFAULT_WINDOW = (-20, 60)


@dataclass(frozen=True)
class CqvConstant:
    value: float
    v: float
    q: float

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class TransformPlan:
    v: float
    ctx: QContext
    eval_window: tuple[int, int] = DEFAULT_WINDOW

    def __post_init__(self) -> None:
        if self.v <= -1:
            raise DomainError(f"transform order must exceed -1, got {self.v}")
        lo, hi = self.eval_window
        if lo > hi:
            raise DomainError(f"empty evaluation window {self.eval_window}")

    @property
    def exponents(self) -> range:
        return range(self.eval_window[0], self.eval_window[1] + 1)

    def widened(self, factor: int = 2) -> TransformPlan:
        lo, hi = self.eval_window
        return replace(self, eval_window=(factor * min(lo, 0), factor * max(hi, 0)))


def c_constant(v: float, ctx: QContext) -> CqvConstant:
    """c_{q,v} = (q^{2v+2}; q^2)_inf / ((1 - q) (q^2; q^2)_inf)."""
    return CqvConstant(c_qv(v, ctx), v, ctx.q)


def _j_row(v: float, shift: int, lo: int, hi: int, ctx: QContext) -> np.ndarray:
    """j_v(q^{n + shift}; q^2) for n in [lo, hi], as (log|.|, sign)."""
    return lattice_log_j(v, lo + shift, hi + shift, ctx)


def _transform_values(f: LatticeFunction, v: float, lo: int, hi: int, ctx: QContext) -> np.ndarray:
    q = ctx.q
    lq = math.log(q)
    pref = c_qv(v, ctx) * (1.0 - q)
    out = np.zeros(hi - lo + 1)
    for s, val in f.items():
        if val == 0.0:
            continue
        lj, sj = _j_row(v, s, lo, hi, ctx)
        logs = lj + (2 * v + 2) * s * lq + math.log(abs(val))
        out += np.sign(val) * sj * np.exp(logs)
    return pref * out


def fourier(f: LatticeFunction, plan: TransformPlan) -> LatticeFunction:
    """F_{q,v} f(q^n) = c_{q,v} (1-q) sum_s f(q^s) j_v(q^{n+s}; q^2) q^{(2v+2)s} on the plan window."""
    lo, hi = plan.eval_window
    vals = _transform_values(f, plan.v, lo, hi, plan.ctx)
    return LatticeFunction(dict(zip(range(lo, hi + 1), vals.tolist())))


def fourier_at(f: LatticeFunction, n: int, plan: TransformPlan) -> float:
    return float(_transform_values(f, plan.v, n, n, plan.ctx)[0])


def translate_spectral(f: LatticeFunction, x_idx: int, plan: TransformPlan) -> LatticeFunction:
    """T_{q,x}^v f through the spectral integral of F f against j_v(x t) j_v(y t).

    F f has unbounded support, so each output point is a windowed bilateral
    sum with stagnation detection.
    """
    v, ctx = plan.v, plan.ctx
    q = ctx.q
    c = c_qv(v, ctx)
    cache: dict[int, float] = {}

    def ff(t: int) -> float:
        if t not in cache:
            cache[t] = fourier_at(f, t, plan)
        return cache[t]

    out = {}
    if not f.values:
        return LatticeFunction({n: 0.0 for n in plan.exponents})
    for n in plan.exponents:

        def term(t: int, n: int = n) -> float:
            val = ff(t)
            if val == 0.0:
                return 0.0
            (lx,), (sx,) = lattice_log_j(v, x_idx + t, x_idx + t, ctx)
            (ly,), (sy,) = lattice_log_j(v, n + t, n + t, ctx)
            return val * sx * sy * math.exp(lx + ly + (2 * v + 2) * t * math.log(q))

        out[n] = c * (1.0 - q) * bilateral_sum(term, ctx).value
    return LatticeFunction(out)


def translate_kernel(f: LatticeFunction, x_idx: int, plan: TransformPlan) -> LatticeFunction:
    """T_{q,x}^v f(q^n) = (1-q) sum_z f(q^z) D_v(q^x, q^n, q^z) q^{(2v+2)z}, a finite sum."""
    v, ctx = plan.v, plan.ctx
    q = ctx.q
    out = {}
    for n in plan.exponents:
        acc = math.fsum(
            val * q ** ((2 * v + 2) * z) * kernel_D(v, x_idx, n, z, ctx) for z, val in f.items() if val != 0.0
        )
        out[n] = (1.0 - q) * acc
    return LatticeFunction(out)


def convolve(f: LatticeFunction, g: LatticeFunction, plan: TransformPlan) -> LatticeFunction:
    """(f *_q g)(q^x) = c_{q,v} int T_{q,x}^v f(y) g(y) y^{2v+1} d_q y on the plan window.

    Computed for any q; positivity is only expected when q lies in the
    positivity domain of the order.
    """
    v, ctx = plan.v, plan.ctx
    q = ctx.q
    c = c_qv(v, ctx)
    s = 2 * v + 2
    out = {}
    for x in plan.exponents:
        acc = math.fsum(
            gv * fv * q ** (s * (y + z)) * kernel_D(v, x, y, z, ctx)
            for y, gv in g.items()
            for z, fv in f.items()
            if gv != 0.0 and fv != 0.0
        )
        out[x] = c * (1.0 - q) ** 2 * acc
    return LatticeFunction(out)


def check_inversion(f: LatticeFunction, plan: TransformPlan, tolerance: float = 1e-10) -> VerificationReport:
    """max over the window of |F^2 f - f|, with the intermediate F f on a doubled window."""
    wide = plan.widened()
    once = fourier(f, wide)
    twice = fourier(once, plan)
    worst_n = plan.eval_window[0]
    worst = 0.0
    for n in plan.exponents:
        d = abs(twice[n] - f[n])
        if d > worst:
            worst, worst_n = d, n
    scale = max((abs(val) for _, val in f.items()), default=0.0)
    report = VerificationReport.compare(
        "fourier_inversion",
        {"v": plan.v, "q": plan.ctx.q, "support": f.support, "intermediate_window": list(wide.eval_window)},
        twice[worst_n],
        f[worst_n],
        tolerance,
        plan.eval_window,
        len(once.values),
    )
    rel = worst / scale if scale > 0 else 0.0
    return replace(report, abs_residual=worst, rel_residual=rel, passed=worst <= tolerance or rel <= tolerance)


def check_plancherel(f: LatticeFunction, plan: TransformPlan, tolerance: float = 1e-10) -> VerificationReport:
    """||F f||_{q,2,v} against ||f||_{q,2,v}; the transform side is a windowed sum."""
    v, ctx = plan.v, plan.ctx
    q = ctx.q
    rhs = lqpv_norm(f, NormSpec(2, v), ctx)
    if not f.values:
        lhs, window, used = 0.0, (0, 0), 0
    else:
        res = bilateral_sum(lambda n: fourier_at(f, n, plan) ** 2 * q ** ((2 * v + 2) * n), ctx)
        lhs = math.sqrt((1.0 - q) * max(res.value, 0.0))
        window, used = res.window, res.terms
    params = {"v": v, "q": q, "support": f.support}
    return VerificationReport.compare("plancherel", params, lhs, rhs, tolerance, window, used)


def check_l1_contraction(f: LatticeFunction, x_idx: int, plan: TransformPlan, slack: float = 1e-10) -> VerificationReport:
    """int |T_{q,x}^v f| y^{2v+1} d_q y <= ||f||_{q,1,v} on the plan window.

    The report's lhs is the left side and rhs the bound; ``passed`` records
    the inequality rather than equality.
    """
    v, ctx = plan.v, plan.ctx
    q = ctx.q
    tf = translate_kernel(f, x_idx, plan)
    lhs = (1.0 - q) * math.fsum(abs(val) * q ** ((2 * v + 2) * n) for n, val in tf.items())
    rhs = lqpv_norm(f, NormSpec(1, v), ctx)
    report = VerificationReport.compare(
        "l1_contraction", {"v": v, "q": q, "x_idx": x_idx, "support": f.support}, lhs, rhs, slack, plan.eval_window
    )
    return replace(report, passed=lhs <= rhs + slack)
