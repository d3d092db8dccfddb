"""Residual reports for the addition formula, the product formula, the
order-shift expansion and the bilateral power sum of j_v.

Each check evaluates both sides independently and returns a
:class:`VerificationReport`.  Inputs outside an identity's hypotheses give
an ``invalid-domain`` report instead of a pass or fail.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

from .errors import ConvergenceError, DomainError, WindowTooSmallError
from .kernels import ENVELOPE_RUN, log_kernel_E, shift_coefficient
from .productsum import Factor, j_product_sum
from .qbessel import Base, J_at, c_qv, j_at, log_J_at, log_j_at
from .qcore import STAGNATION_RUN, QContext, bilateral_sum, qpoch_exp
from .reports import VerificationReport

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class GrafParams:
    """Parameters of the addition formula in its original, base-q form."""

    R: float
    x: float
    y: float
    v: float
    z: int


@dataclass(frozen=True)
class GrafLatticeParams:
    """Parameters of the lattice form J_v(q^m) J_{x-v}(q^z) = sum_k ..."""

    m: int
    z: int
    v: float
    x: float


def _exp_product(*pairs: tuple[float, int]) -> float:
    total = 0.0
    sign = 1
    for lv, sg in pairs:
        if sg == 0:
            return 0.0
        total += lv
        sign *= sg
    return sign * math.exp(total)


def graf_original(p: GrafParams, ctx: QContext, base: Base = Base.Q, tolerance: float = DEFAULT_TOL) -> VerificationReport:
    """J_v(R b^{(y+z+v)/2}) J_{x-v}(b^{z/2}) = sum_k J_k(R b^{(x+y+k)/2}) J_{v+k}(R b^{(y+k+v)/2}) J_x(b^{(z-k)/2}).

    ``b`` is q for ``Base.Q`` and q^2 for ``Base.Q_SQUARED``.  Valid when
    R^2 b^{1+x+y} < 1, x > -1 and R > 0.
    """
    ident = "graf_original" if base is Base.Q else "graf_original_q2"
    params = {**asdict(p), "q": ctx.q, "base": base.value}
    b = base.of(ctx.q)
    if p.R <= 0:
        return VerificationReport.invalid(ident, params, "R must be positive", tolerance)
    if p.x <= -1:
        return VerificationReport.invalid(ident, params, "x must exceed -1", tolerance)
    if p.R**2 * b ** (1 + p.x + p.y) >= 1:
        return VerificationReport.invalid(ident, params, "R^2 b^(1+x+y) < 1 violated", tolerance)
    lq = math.log(ctx.q)
    rho = math.log(p.R) / lq

    def e(w: float) -> float:
        # exponent of q in b^{w/2}
        return w * (0.5 if base is Base.Q else 1.0)

    lhs = _exp_product(log_J_at(p.v, rho + e(p.y + p.z + p.v), base, ctx), log_J_at(p.x - p.v, e(p.z), base, ctx))

    def parts(k: int) -> list[tuple[float, int]]:
        return [
            log_J_at(float(k), rho + e(p.x + p.y + k), base, ctx),
            log_J_at(p.v + k, rho + e(p.y + k + p.v), base, ctx),
            log_J_at(p.x, e(p.z - k), base, ctx),
        ]

    def term(k: int) -> float:
        return _exp_product(*parts(k))

    # The k -> -inf terms shrink geometrically, but the rate mixes all three
    # factors; measure it and widen the left window to reach series_tol.
    local = ctx
    slope = 0.0
    probe = -ctx.lattice_neg // 2
    near, far = parts(probe), parts(probe - 10)
    if all(sg != 0 for _, sg in near + far):
        l_near = sum(lv for lv, _ in near)
        slope = (sum(lv for lv, _ in far) - l_near) / 10.0
    if local is ctx and slope < 0:
        floor = math.log(ctx.series_tol * 1e-3 * max(abs(lhs), 1e-300))
        need = -probe + max(0, math.ceil((l_near - floor) / -slope)) + STAGNATION_RUN
        local = replace(ctx, lattice_neg=min(max(ctx.lattice_neg, need), ctx.max_terms))
    # the measured rate can be pre-asymptotic, so keep doubling on a left-edge failure
    while True:
        try:
            res = bilateral_sum(term, local)
            break
        except WindowTooSmallError as exc:
            if exc.side != "left" or local.lattice_neg >= ctx.max_terms:
                return VerificationReport.failed(ident, params, str(exc), tolerance)
            local = replace(local, lattice_neg=min(2 * local.lattice_neg, ctx.max_terms))
        except ConvergenceError as exc:
            return VerificationReport.failed(ident, params, str(exc), tolerance)
    return VerificationReport.compare(ident, params, lhs, res.value, tolerance, res.window, res.terms)


def graf_rewritten(
    p: GrafLatticeParams, ctx: QContext, k_probe: tuple[int, int] | None = None, tolerance: float = DEFAULT_TOL
) -> VerificationReport:
    """J_v(q^m; q^2) J_{x-v}(q^z; q^2) = sum_k J_{z-k}(q^{m+x-v-k}) J_{v+z-k}(q^{m-k}) J_x(q^k).

    ``k_probe`` optionally overrides the summation window (lo, hi); the
    default is the context window with stagnation detection.
    """
    params = {**asdict(p), "q": ctx.q}
    if p.x <= -1:
        return VerificationReport.invalid("graf_rewritten", params, "x must exceed -1", tolerance)
    qq = Base.Q_SQUARED
    lhs = _exp_product(log_J_at(p.v, float(p.m), qq, ctx), log_J_at(p.x - p.v, float(p.z), qq, ctx))

    def term(k: int) -> float:
        return _exp_product(
            log_J_at(float(p.z - k), p.m + p.x - p.v - k, qq, ctx),
            log_J_at(p.v + p.z - k, float(p.m - k), qq, ctx),
            log_J_at(p.x, float(k), qq, ctx),
        )

    local = ctx
    if k_probe is not None:
        lo, hi = k_probe
        params["k_probe"] = [lo, hi]
        local = replace(ctx, lattice_neg=max(-lo, 0), lattice_pos=max(hi, 0))
    try:
        res = bilateral_sum(term, local)
    except ConvergenceError as exc:
        return VerificationReport.failed("graf_rewritten", params, str(exc), tolerance)
    return VerificationReport.compare("graf_rewritten", params, lhs, res.value, tolerance, res.window, res.terms)


def graf_chain_lhs(p: GrafParams, ctx: QContext) -> tuple[float, float]:
    """Left side of the base-q^2 original form and of the lattice form at m = y + z + v + r.

    Here R = q^r; the two values agree when the rewriting is consistent.
    """
    r = math.log(p.R) / math.log(ctx.q)
    orig = graf_original(p, ctx, Base.Q_SQUARED)
    m = p.y + p.z + p.v + r
    lattice = J_at(p.v, m, Base.Q_SQUARED, ctx) * J_at(p.x - p.v, float(p.z), Base.Q_SQUARED, ctx)
    return orig.lhs, lattice


def product_formula(
    v: float, x: float, m: int, z: int, lambda_idx: int, ctx: QContext, tolerance: float = DEFAULT_TOL
) -> VerificationReport:
    """j_v(q^m lam) j_{x-v}(q^z lam) = c_x int E_{v,x}(q^m, q^z, t) j_x(lam t) t^{2x+1} d_q t at lam = q^{lambda_idx}."""
    params = {"v": v, "x": x, "m": m, "z": z, "lambda_idx": lambda_idx, "q": ctx.q}
    if v <= -1 or x - v <= -1 or x <= -1:
        return VerificationReport.invalid("product_formula", params, "need v > -1, x - v > -1, x > -1", tolerance)
    qq = Base.Q_SQUARED
    lhs = j_at(v, float(m + lambda_idx), qq, ctx) * j_at(x - v, float(z + lambda_idx), qq, ctx)
    lq = math.log(ctx.q)

    def term(k: int) -> float:
        return _exp_product(
            log_kernel_E(v, x, m, z, k, ctx), log_j_at(x, float(lambda_idx + k), qq, ctx), ((2 * x + 2) * k * lq, 1)
        )

    try:
        res = bilateral_sum(term, ctx)
    except ConvergenceError as exc:
        return VerificationReport.failed("product_formula", params, str(exc), tolerance)
    rhs = c_qv(x, ctx) * (1.0 - ctx.q) * res.value
    return VerificationReport.compare("product_formula", params, lhs, rhs, tolerance, res.window, res.terms)


def _geometric_tail_series(term, ratio: float, ctx: QContext, what: str) -> tuple[float, int]:
    """Sum term(i), i >= 0, whose magnitudes eventually shrink at least like ``ratio``."""
    partial = 0.0
    run = 0
    for i in range(ctx.max_terms):
        val = term(i)
        partial += val
        if abs(val) / (1.0 - ratio) <= ctx.series_tol * abs(partial):
            run += 1
            if run >= ENVELOPE_RUN:
                return partial, i + 1
        else:
            run = 0
    raise ConvergenceError(f"{what} series exceeded max_terms")


def order_shift_series(
    x: float, v: float, lambda_idx: int, ctx: QContext, normalized: bool = False, tolerance: float = DEFAULT_TOL
) -> VerificationReport:
    """J_{x-v}(lam; q^2) = lam^{-v} sum_i (q^{-2v};q^2)_i/(q^2;q^2)_i q^{i(2+x)} J_x(lam q^i; q^2).

    With ``normalized`` the equivalent form
    c_{x-v} j_{x-v}(lam) = c_x sum_i (q^{-2v};q^2)_i/(q^2;q^2)_i q^{i(2+2x)} j_x(lam q^i)
    is checked instead.
    """
    ident = "order_shift_normalized" if normalized else "order_shift"
    params = {"x": x, "v": v, "lambda_idx": lambda_idx, "q": ctx.q}
    if x - v <= -1 or x <= -1:
        return VerificationReport.invalid(ident, params, "need x - v > -1 and x > -1", tolerance)
    q = ctx.q
    qq = Base.Q_SQUARED
    li = float(lambda_idx)
    if normalized:
        lhs = c_qv(x - v, ctx) * j_at(x - v, li, qq, ctx)

        def term(i: int) -> float:
            return shift_coefficient(-2 * v, i, ctx) * q ** (i * (2 + 2 * x)) * j_at(x, li + i, qq, ctx)

    else:
        lhs = J_at(x - v, li, qq, ctx)

        def term(i: int) -> float:
            return shift_coefficient(-2 * v, i, ctx) * q ** (i * (2 + x)) * J_at(x, li + i, qq, ctx)

    # terms shrink like q^{i(2+2x)} in both forms
    ratio = q ** (2 + 2 * x)
    try:
        total, used = _geometric_tail_series(term, ratio, ctx, ident)
    except ConvergenceError as exc:
        return VerificationReport.failed(ident, params, str(exc), tolerance)
    rhs = c_qv(x, ctx) * total if normalized else q ** (-v * li) * total
    return VerificationReport.compare(ident, params, lhs, rhs, tolerance, (0, used - 1), used)


def lemma1_check(v: float, t_param: float, x_idx: int, ctx: QContext, tolerance: float = DEFAULT_TOL) -> VerificationReport:
    """(1-q) c_v sum_n q^{(1+v+t)n} j_v(q^n x) = (q^{1+v-t};q^2)_inf / (q^{1+v+t};q^2)_inf x^{-(1+v+t)}."""
    params = {"v": v, "t": t_param, "x_idx": x_idx, "q": ctx.q}
    if v <= -1:
        return VerificationReport.invalid("lemma1", params, "need v > -1", tolerance)
    if v + t_param <= -1:
        return VerificationReport.invalid("lemma1", params, "need v + t > -1", tolerance)
    q = ctx.q
    s = 1 + v + t_param
    try:
        res = j_product_sum(s, [Factor(v, x_idx)], ctx)
    except (ConvergenceError, DomainError) as exc:
        return VerificationReport.failed("lemma1", params, str(exc), tolerance)
    lhs = (1.0 - q) * c_qv(v, ctx) * res.value
    q2 = q * q
    ratio = qpoch_exp((1 + v - t_param) / 2.0, q2, ctx.product_tol) / qpoch_exp(s / 2.0, q2, ctx.product_tol)
    rhs = ratio * q ** (-x_idx * s)
    return VerificationReport.compare("lemma1", params, lhs, rhs, tolerance, res.window, res.terms_used)
