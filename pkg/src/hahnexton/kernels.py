"""Translation kernels D_v, E_{v,x}, T_{v,w,alpha} and the auxiliary function A.

Integral forms share :func:`productsum.j_product_sum`, so a single window
policy governs them all.  Closed forms are separate code paths built on
J_v at (possibly negative integer) orders and serve as oracles.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .productsum import Factor, ProductSum, j_product_sum
from .qbessel import Base, J_at, c_qv, log_J_at, log_prop1_bound, prop1_constant
from .qcore import QContext, bilateral_sum, log_qpoch_exp, phi_1_1, qpochhammer, signed_log_sum
from .reports import VerificationReport

# consecutive envelope-bounded terms below tolerance before a series is cut
ENVELOPE_RUN = 3


@dataclass(frozen=True)
class KernelQuery:
    v: float
    m: int
    n: int
    k: int
    second: float | None = None


@dataclass(frozen=True)
class ABranchParams:
    alpha: float
    mu: float
    v: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < self.mu < 1.0:
            raise DomainError(f"need 0 < alpha < mu < 1, got alpha={self.alpha}, mu={self.mu}")
        if self.v <= -1:
            raise DomainError(f"need v > -1, got {self.v}")


def _check_order(name: str, v: float) -> None:
    if v <= -1:
        raise DomainError(f"{name} must exceed -1, got {v}")


# ---------------------------------------------------------------- D_v


def kernel_D_sum(v: float, m: int, n: int, k: int, ctx: QContext) -> tuple[float, ProductSum]:
    _check_order("v", v)
    m, n, k = sorted((int(m), int(n), int(k)))
    res = j_product_sum(2 * v + 2, [Factor(v, m), Factor(v, n), Factor(v, k)], ctx)
    c = c_qv(v, ctx)
    return c * c * (1.0 - ctx.q) * res.value, res


def kernel_D(v: float, m: int, n: int, k: int, ctx: QContext) -> float:
    """D_v(q^m, q^n, q^k) = c^2 int_0^inf j_v(q^m t) j_v(q^n t) j_v(q^k t) t^{2v+1} d_q t.

    The indices are sorted before summation, so all six permutations give
    bit-identical results.
    """
    return kernel_D_sum(v, m, n, k, ctx)[0]


def kernel_D_envelope(v: float, m: int, n: int, k: int, ctx: QContext) -> float:
    """Upper bound for |D_v(q^m, q^n, q^k)| from the growth bound on each factor."""
    q = ctx.q
    lq = math.log(q)
    s = 2 * v + 2
    shifts = np.array(sorted((m, n, k)), dtype=float)
    t0 = int(-shifts[0])
    ts = np.arange(t0 - ctx.lattice_neg, t0)
    logs = s * ts * lq + sum(log_prop1_bound(v, ts + a, ctx) for a in shifts)
    body = float(np.sum(np.exp(logs)))
    tail = prop1_constant(v, ctx) ** 3 * q ** (s * t0) / (1.0 - q**s)
    c = c_qv(v, ctx)
    return c * c * (1.0 - q) * (body + tail)


def kernel_D_closed_v0(m: int, n: int, k: int, ctx: QContext) -> float:
    """(1/(1-q)) q^{-2k} [J_{n-k}(q^{m-k}; q^2)]^2; a square, hence never negative."""
    val = J_at(float(n - k), float(m - k), Base.Q_SQUARED, ctx)
    return ctx.q ** (-2 * k) * val * val / (1.0 - ctx.q)


def kernel_D_closed_vhalf(m: int, r: int, k: int, ctx: QContext) -> float:
    """D_{-1/2}(q^m, q^r, q^k) = q^{-m} J_{2(r-m)}(q^{k-m}; q) / (1 - q), base q."""
    return ctx.q ** (-m) * J_at(float(2 * (r - m)), float(k - m), Base.Q, ctx) / (1.0 - ctx.q)


def kernel_D_vhalf_phi(m: int, r: int, k: int, ctx: QContext) -> float:
    """Same value written with an explicit 1phi1 series; needs r >= m (no pole)."""
    q = ctx.q
    nu = 2 * (r - m)
    if nu < 0:
        raise DomainError("the 1phi1 form has a pole in its lower parameter when r < m")
    b = q ** (nu + 1)
    pref = q ** (nu * (k - m) - m) / ((1.0 - q) * qpochhammer(q, math.inf, ctx))
    return pref * qpochhammer(b, math.inf, ctx) * phi_1_1(b, q ** (2 * (k - m) + 1), ctx)


# ---------------------------------------------------------------- E_{v,x}


def _check_E_orders(v: float, x: float) -> None:
    _check_order("v", v)
    _check_order("x - v", x - v)


def log_kernel_E(v: float, x: float, m: int, z: int, k: int, ctx: QContext) -> tuple[float, int]:
    """log|E_{v,x}(q^m, q^z, q^k)| and sign from the two-J closed form."""
    _check_E_orders(v, x)
    q = ctx.q
    l1, s1 = log_J_at(float(z - k), x - v + m - k, Base.Q_SQUARED, ctx)
    l2, s2 = log_J_at(v + z - k, float(m - k), Base.Q_SQUARED, ctx)
    if s1 == 0 or s2 == 0:
        return -math.inf, 0
    expo = -k * (x + 2) - m * v - z * (x - v)
    den = 2 * math.log1p(-q) + math.log(c_qv(v, ctx) * c_qv(x - v, ctx))
    return expo * math.log(q) + l1 + l2 - den, s1 * s2


def kernel_E(v: float, x: float, m: int, z: int, k: int, ctx: QContext) -> float:
    """Two-J closed form of E_{v,x}(q^m, q^z, q^k):

    q^{-k(x+2) - m v - z(x-v)} J_{z-k}(q^{x-v+m-k}) J_{v+z-k}(q^{m-k}) / ((1-q)^2 c_v c_{x-v}).
    """
    lv, sg = log_kernel_E(v, x, m, z, k, ctx)
    return 0.0 if sg == 0 else sg * math.exp(lv)


def kernel_E_via_integral_sum(v: float, x: float, m: int, z: int, k: int, ctx: QContext) -> tuple[float, ProductSum]:
    _check_E_orders(v, x)
    _check_order("x", x)
    res = j_product_sum(2 * x + 2, [Factor(v, m), Factor(x - v, z), Factor(x, k)], ctx)
    return c_qv(x, ctx) * (1.0 - ctx.q) * res.value, res


def kernel_E_via_integral(v: float, x: float, m: int, z: int, k: int, ctx: QContext) -> float:
    """c_x int_0^inf j_v(q^m t) j_{x-v}(q^z t) j_x(q^k t) t^{2x+1} d_q t."""
    return kernel_E_via_integral_sum(v, x, m, z, k, ctx)[0]


def _enveloped_series(
    term: Callable[[int], tuple[float, float]], ctx: QContext, what: str
) -> tuple[float, int]:
    """Sum term(i) for i = 0, 1, ... where term returns (value, envelope)."""
    partial = 0.0
    run = 0
    for i in range(ctx.max_terms):
        val, env = term(i)
        partial += val
        if env <= ctx.series_tol * abs(partial):
            run += 1
            if run >= ENVELOPE_RUN:
                return partial, i + 1
        else:
            run = 0
    raise ConvergenceError(f"{what} series exceeded max_terms")


def shift_coefficient(e: float, i: int, ctx: QContext) -> float:
    """(q^e; q^2)_i / (q^2; q^2)_i."""
    q2 = ctx.q * ctx.q
    return qpochhammer(ctx.q**e, i, ctx, base=q2) / qpochhammer(q2, i, ctx, base=q2)


def kernel_E_vv_terms(v: float, m: int, n: int, k: int, ctx: QContext) -> list[float]:
    """Individual terms of the D_v expansion of E_{v,v}, for sign analysis."""
    terms: list[float] = []

    def term(i: int) -> tuple[float, float]:
        w = (1.0 - ctx.q) * shift_coefficient(-2 * v, i, ctx) * ctx.q ** (i * (2 + 2 * v))
        if w == 0.0:
            terms.append(0.0)
            return 0.0, 0.0
        val = w * kernel_D(v, m, n + i, k, ctx)
        terms.append(val)
        return val, abs(w) * kernel_D_envelope(v, m, n + i, k, ctx)

    _enveloped_series(term, ctx, "E_(v,v)")
    return terms


def kernel_E_vv_series(v: float, m: int, n: int, k: int, ctx: QContext) -> float:
    """E_{v,v}(q^m, q^n, q^k) = (1-q) sum_i (q^{-2v};q^2)_i/(q^2;q^2)_i q^{i(2+2v)} D_v(q^m, q^{n+i}, q^k)."""
    _check_order("v", v)
    return math.fsum(kernel_E_vv_terms(v, m, n, k, ctx))


# ---------------------------------------------------------------- T_{v,w,alpha}


def kernel_T(v: float, w: float, alpha: float, m: int, n: int, k: int, ctx: QContext) -> float:
    """c_w^2 int_0^inf j_v(q^m t) j_w(q^n t) j_w(q^k t) t^{2 alpha + 1} d_q t."""
    _check_order("v", v)
    _check_order("w", w)
    _check_order("alpha", alpha)
    n, k = sorted((int(n), int(k)))
    res = j_product_sum(2 * alpha + 2, [Factor(v, m), Factor(w, n), Factor(w, k)], ctx)
    c = c_qv(w, ctx)
    return c * c * (1.0 - ctx.q) * res.value


def kernel_T_double_series(v: float, mu: float, m: int, n: int, k: int, ctx: QContext) -> float:
    """T_{v,v+mu,v} written as a double series of D_v values with nonnegative weights."""
    _check_order("v", v)
    q = ctx.q

    def weight(i: int) -> float:
        return shift_coefficient(2 * mu, i, ctx) * q ** (2 * (1 + v) * i)

    def row(i: int) -> tuple[float, float]:
        wi = weight(i)

        def cell(j: int) -> tuple[float, float]:
            w = wi * weight(j)
            return w * kernel_D(v, m, n + i, k + j, ctx), abs(w) * kernel_D_envelope(v, m, n + i, k + j, ctx)

        val, _ = _enveloped_series(cell, ctx, "T inner")
        # the growth bound is nondecreasing in each index, so a far index bounds every cell
        far = kernel_D_envelope(v, m, n + i, k + ctx.lattice_pos, ctx)
        env = abs(wi) * sum(abs(weight(j)) for j in range(ctx.lattice_pos)) * far
        return val, env

    return _enveloped_series(row, ctx, "T outer")[0]


# ---------------------------------------------------------------- A_{alpha,mu,v}


def function_A(params: ABranchParams, x_idx: int, ctx: QContext) -> float:
    """A(x) = c_v int_0^inf t^{2 alpha} j_{v+mu}(t) j_v(x t) t^{2v+1} d_q t at x = q^{x_idx}."""
    a, mu, v = params.alpha, params.mu, params.v
    res = j_product_sum(2 * a + 2 * v + 2, [Factor(v + mu, 0), Factor(v, x_idx)], ctx)
    return c_qv(v, ctx) * (1.0 - ctx.q) * res.value


def _A_branch_logterms(params: ABranchParams, small: bool, ctx: QContext) -> Iterator[tuple[float, int]]:
    """log|b_i| and sign of the i-th branch coefficient, without the x power."""
    a, mu, v = params.alpha, params.mu, params.v
    q = ctx.q
    q2 = q * q
    lq = math.log(q)
    lower = 2 + 2 * v if small else 2 + 2 * v + 2 * mu
    lden = 0.0
    i = 0
    while True:
        if i > 0:
            lden += math.log1p(-(q2**i)) + math.log1p(-(q ** (lower + 2 * (i - 1))))
        top = (mu - a - i) if small else (-a - i)
        ltop, stop = log_qpoch_exp(top, q2, ctx.product_tol)
        lbot, _ = log_qpoch_exp(a + v + 1 + i, q2, ctx.product_tol)
        yield i * (i + 1) * lq - lden + ltop - lbot, stop * (-1) ** i
        i += 1


def _sum_branch(params: ABranchParams, small: bool, ctx: QContext, power: Callable[[int], float]) -> float:
    """sum_i b_i exp(power(i)), stopping on a run of negligible terms.

    Branch terms share one sign, so the partial sum bounds every later term.
    """
    items: list[tuple[float, int]] = []
    run = 0
    for i, (lt, sg) in enumerate(_A_branch_logterms(params, small, ctx)):
        items.append((lt + power(i), sg))
        s, ref, _ = signed_log_sum(items)
        if i > 2 and items[-1][0] - ref < math.log(ctx.series_tol) - 10 + math.log(abs(s) or 1.0):
            run += 1
            if run >= ENVELOPE_RUN:
                return s * math.exp(ref)
        else:
            run = 0
        if i >= ctx.max_terms:
            break
    raise ConvergenceError("A branch series exceeded max_terms")


def _A_branch(params: ABranchParams, x_idx: int, small: bool, ctx: QContext) -> float:
    lx = x_idx * math.log(ctx.q)
    if small:
        ratio = c_qv(params.v, ctx) / c_qv(params.v + params.mu, ctx)
        return ratio * _sum_branch(params, True, ctx, lambda i: 2 * i * lx)
    lead = -2 * (params.alpha + params.v + 1) * lx
    return _sum_branch(params, False, ctx, lambda i: lead - 2 * i * lx)


def function_A_small_branch(params: ABranchParams, x_idx: int, ctx: QContext) -> float:
    """Series for A valid at x = q^{x_idx} <= 1; every term is nonnegative."""
    if x_idx < 0:
        raise DomainError("small-argument branch needs x <= 1 (x_idx >= 0)")
    return _A_branch(params, x_idx, True, ctx)


def function_A_large_branch(params: ABranchParams, x_idx: int, ctx: QContext) -> float:
    """Series for A valid at x = q^{x_idx} > 1; every term is negative."""
    if x_idx >= 0:
        raise DomainError("large-argument branch needs x > 1 (x_idx < 0)")
    return _A_branch(params, x_idx, False, ctx)


def function_A_total_integral(params: ABranchParams, ctx: QContext, inner: int = 8) -> float:
    """int_0^inf A(x) x^{2v+1} d_q x.

    Lattice points with |x_idx| < ``inner`` use the integral form of A; the
    two tails are summed in closed form from the branch series, each of whose
    terms is a pure power of x.
    """
    a, v = params.alpha, params.v
    q = ctx.q
    body = math.fsum(q ** ((2 * v + 2) * kk) * function_A(params, kk, ctx) for kk in range(-inner + 1, inner))
    lq = math.log(q)
    csmall = c_qv(v, ctx) / c_qv(v + params.mu, ctx)

    def geometric(e: float) -> float:
        return e * inner * lq - math.log1p(-(q**e))

    right = _sum_branch(params, True, ctx, lambda i: geometric(2 * v + 2 + 2 * i))
    left = _sum_branch(params, False, ctx, lambda i: geometric(2 * (a + i)))
    return (1.0 - q) * (body + csmall * right + left)


# ---------------------------------------------------------------- scaling


def check_D_scaling(v: float, m: int, n: int, k: int, ctx: QContext, tolerance: float = 1e-10) -> VerificationReport:
    """D_v(q^m, q^n, q^k) against q^{-2(v+1)m} D_v(1, q^{n-m}, q^{k-m})."""
    lhs, res = kernel_D_sum(v, m, n, k, ctx)
    rhs = ctx.q ** (-2 * (v + 1) * m) * kernel_D(v, 0, n - m, k - m, ctx)
    params = {"v": v, "m": m, "n": n, "k": k, "q": ctx.q}
    return VerificationReport.compare("D_scaling", params, lhs, rhs, tolerance, res.window, res.terms_used)


def check_D_normalization(v: float, m: int, k: int, ctx: QContext, tolerance: float = 1e-10) -> VerificationReport:
    """int_0^inf D_v(q^m, y, q^k) y^{2v+1} d_q y = 1, summed over the lattice with stagnation detection."""
    q = ctx.q
    s = 2 * v + 2
    res = bilateral_sum(lambda n: q ** (s * n) * kernel_D(v, m, n, k, ctx), ctx, center=min(m, k))
    params = {"v": v, "m": m, "k": k, "q": q}
    return VerificationReport.compare("D_normalization", params, (1.0 - q) * res.value, 1.0, tolerance, res.window, res.terms)
