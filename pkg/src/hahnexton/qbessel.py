"""Hahn-Exton q-Bessel functions J_v and their normalized form j_v.

Evaluation goes through the symmetric two-parameter series

    G(a, b) = (p^a; p)_inf 1phi1(0; p^a; p, p^b)
            = sum_k (-1)^k p^{k(k-1)/2 + b k} (p^{a+k}; p)_inf / (p; p)_k,

which satisfies G(a, b) = G(b, a).  With x = p^s one has

    J_v(x; p) = x^v G(v + 1, 1 + 2 s) / (p; p)_inf,
    j_v(x; p) = G(v + 1, 1 + 2 s) / (p^{v+1}; p)_inf.

Of the two equivalent orderings we sum the one whose terms are smallest in
absolute value, in log space.  This keeps large arguments (where the direct
series cancels catastrophically) and negative integer orders (where the
leading terms vanish) accurate in double precision.  Near q = 1 even the
better ordering can cancel badly; such sums are redone in decimal
arithmetic sized to the measured loss.
"""

from __future__ import annotations

import decimal
import enum
import math
from collections.abc import Callable
from decimal import Decimal
from functools import lru_cache

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, DomainError, NoSignChangeError, PoleError
from .qcore import QContext, log_qpoch_exp, qpoch_exp, signed_log_sum

# an argument exponent within this distance of an integer is treated as a lattice point
LATTICE_SNAP = 1e-10


class Base(enum.Enum):
    Q = "q"
    Q_SQUARED = "q2"

    def of(self, q: float) -> float:
        return q if self is Base.Q else q * q

    def exponent_scale(self) -> float:
        """Factor turning x = q^e into x = p^{e * scale}."""
        return 1.0 if self is Base.Q else 0.5


def _is_neg_int(v: float) -> bool:
    return float(v).is_integer() and v < 0


def _series_terms(a: float, b: float, p: float, cut: float, max_terms: int) -> list[tuple[float, int]]:
    """(log|term|, sign) for the G(a, b) series, skipping exactly zero terms."""
    lp = math.log(p)
    k = 0
    if float(a).is_integer() and a <= 0:
        # (p^{a+k}; p)_inf vanishes until a + k reaches 1
        k = int(1 - a)
        L, sgn = log_qpoch_exp(1.0, p)
    else:
        L, sgn = log_qpoch_exp(a, p)
    lqk = sum(math.log1p(-(p**i)) for i in range(1, k + 1))
    out: list[tuple[float, int]] = []
    peak = -math.inf
    small = 0
    for _ in range(max_terms):
        lt = (k * (k - 1) / 2 + b * k) * lp + L - lqk
        out.append((lt, sgn if k % 2 == 0 else -sgn))
        peak = max(peak, lt)
        if k + b > 0 and k + a > 0 and lt < peak + cut:
            small += 1
            if small >= 2:
                return out
        else:
            small = 0
        w = a + k
        if w > 0:
            L -= math.log1p(-math.exp(w * lp))
        else:
            L -= w * lp + math.log1p(-math.exp(-w * lp))
            sgn = -sgn
        k += 1
        lqk += math.log1p(-(p**k))
    raise ConvergenceError(f"q-Bessel series did not converge within {max_terms} terms")


# Digits the double-precision sum may lose before it is redone in decimal arithmetic.
CANCELLATION_DIGITS = 3.0
MAX_DECIMAL_PRECISION = 600


def _G_decimal(a: float, b: float, p: float, digits: int, max_terms: int) -> float:
    """G(a, b) summed in ``digits``-digit decimal arithmetic from the exact binary inputs."""
    with decimal.localcontext() as dc:
        dc.prec = digits
        P, A, B = Decimal(p), Decimal(a), Decimal(b)
        eps = Decimal(10) ** (-digits)
        k = int(1 - a) if float(a).is_integer() and a <= 0 else 0
        # L = (p^{a+k}; p)_inf
        L = Decimal(1)
        f = P ** (A + k)
        while abs(f) > eps:
            L *= 1 - f
            f *= P
        pk = P**k
        qk = Decimal(1)
        for i in range(1, k + 1):
            qk *= 1 - P**i
        w = P ** (Decimal(k * (k - 1) // 2) + B * k)
        pb = P**B
        total = Decimal(0)
        peak = Decimal(0)
        small = 0
        for _ in range(max_terms):
            term = w * L / qk
            total += -term if k % 2 else term
            peak = max(peak, abs(term))
            if k + b > 0 and k + a > 0 and abs(term) < eps * peak:
                small += 1
                if small >= 2:
                    return float(total)
            else:
                small = 0
            L /= 1 - P ** (A + k)
            w *= pb * pk
            pk *= P
            k += 1
            qk *= 1 - pk
        raise ConvergenceError(f"q-Bessel series did not converge within {max_terms} terms")


@lru_cache(maxsize=200_000)
def log_G(a: float, b: float, p: float, tol: float = 1e-13, max_terms: int = 5000) -> tuple[float, int]:
    """log|G(a, b)| and its sign, summed in the better conditioned ordering.

    When the alternating sum cancels more than ``CANCELLATION_DIGITS``
    digits in double precision, it is redone in decimal arithmetic with
    enough extra digits to cover the loss.
    """
    cut = math.log(tol) - 10.0
    best: tuple[float, float, float] | None = None
    for x, y in ((a, b), (b, a)):
        s, ref, mag = signed_log_sum(_series_terms(x, y, p, cut, max_terms))
        if mag == 0.0:
            return -math.inf, 0
        size = ref + math.log(mag)
        if best is None or size < best[2]:
            best = (s, ref, size, x, y)
    s, ref, size, x, y = best
    lost = (size - ref - math.log(abs(s))) / math.log(10) if s != 0.0 else math.inf
    if lost > CANCELLATION_DIGITS:
        digits = 25 + int(min(lost, MAX_DECIMAL_PRECISION))
        value = _G_decimal(x, y, p, digits, max_terms)
        if value == 0.0:
            return -math.inf, 0
        return math.log(abs(value)), 1 if value > 0 else -1
    return ref + math.log(abs(s)), 1 if s > 0 else -1


def _beta(e: float, base: Base) -> float:
    return 1.0 + 2.0 * e * base.exponent_scale()


def log_J_at(v: float, e: float, base: Base, ctx: QContext) -> tuple[float, int]:
    """log|J_v(q^e; p)| and sign, for a real exponent ``e`` of the argument."""
    p = base.of(ctx.q)
    s = e * base.exponent_scale()
    lg, sg = log_G(v + 1.0, 1.0 + 2.0 * s, p, ctx.series_tol, ctx.max_terms)
    if sg == 0:
        return -math.inf, 0
    lpp, _ = log_qpoch_exp(1.0, p, ctx.product_tol)
    return s * v * math.log(p) + lg - lpp, sg


def J_at(v: float, e: float, base: Base, ctx: QContext) -> float:
    """J_v(q^e; p) with p = q or q^2 chosen by ``base``."""
    lv, sg = log_J_at(v, e, base, ctx)
    return 0.0 if sg == 0 else sg * math.exp(lv)


def log_j_at(v: float, e: float, base: Base, ctx: QContext) -> tuple[float, int]:
    if _is_neg_int(v + 1.0) or v == -1.0:
        raise PoleError(f"j_v has a pole in its lower parameter at v={v}; use J_hahn_exton")
    p = base.of(ctx.q)
    lg, sg = log_G(v + 1.0, _beta(e, base), p, ctx.series_tol, ctx.max_terms)
    if sg == 0:
        return -math.inf, 0
    lnorm, nsg = log_qpoch_exp(v + 1.0, p, ctx.product_tol)
    return lg - lnorm, sg * nsg


def j_at(v: float, e: float, base: Base, ctx: QContext) -> float:
    """j_v(q^e; p) for a real exponent ``e``."""
    lv, sg = log_j_at(v, e, base, ctx)
    return 0.0 if sg == 0 else sg * math.exp(lv)


def _exponent_of(x: float, q: float) -> float:
    e = math.log(x) / math.log(q)
    r = round(e)
    return float(r) if abs(e - r) < LATTICE_SNAP else e


def j_normalized(v: float, x: float, base: Base, ctx: QContext) -> float:
    """j_v(x; p) = sum_n (-1)^n p^{n(n+1)/2} x^{2n} / ((p;p)_n (p^{v+1};p)_n).

    Even in ``x``; ``j_v(0) = 1`` exactly.  Negative integer orders are poles
    of the normalization and raise :class:`PoleError`.
    """
    if _is_neg_int(v) or (float(v).is_integer() and v <= -1):
        raise PoleError(f"j_v has a pole in its lower parameter at v={v}; use J_hahn_exton")
    if x == 0.0:
        return 1.0
    return j_at(v, _exponent_of(abs(x), ctx.q), base, ctx)


def j_direct_series(v: float, x: float, base: Base, ctx: QContext) -> float:
    """Term-by-term power series for j_v; an independent but cancellation-prone path."""
    p = base.of(ctx.q)
    b = p ** (v + 1.0)
    total = 1.0
    term = 1.0
    biggest = 1.0
    small = 0
    for n in range(1, ctx.max_terms):
        den = (1.0 - p**n) * (1.0 - b * p ** (n - 1))
        if den == 0.0:
            raise PoleError(f"pole in lower parameter at v={v}")
        term *= -(p**n) * x * x / den
        total += term
        biggest = max(biggest, abs(total))
        if abs(term) < ctx.series_tol * biggest:
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise ConvergenceError("direct j series exceeded max_terms")


def J_hahn_exton(v: float, x: float, base: Base, ctx: QContext) -> float:
    """J_v(x; p) = (p^{v+1};p)_inf / (p;p)_inf * x^v * 1phi1(0; p^{v+1}; p, p x^2).

    Negative integer orders are the limit in which the leading terms of the
    series drop out; they are evaluated from the surviving shifted series.
    """
    integer = float(v).is_integer()
    if x == 0.0:
        if v == 0:
            return 1.0
        if v > 0 or integer:
            return 0.0
        raise DomainError(f"J_v(0) is unbounded for v={v}")
    if x < 0.0:
        if not integer:
            raise DomainError(f"x must be positive for non-integer order v={v}")
        sign = -1.0 if int(v) % 2 else 1.0
        return sign * J_at(v, _exponent_of(-x, ctx.q), base, ctx)
    return J_at(v, _exponent_of(x, ctx.q), base, ctx)


def J_reflection(m: int, x: float, base: Base, ctx: QContext) -> float:
    """J_{-m}(x; p) through (-1)^m p^{m/2} J_m(p^{m/2} x; p)."""
    p = base.of(ctx.q)
    half = p ** (m / 2.0)
    return (-1.0) ** m * half * J_hahn_exton(float(m), half * x, base, ctx)


def prop1_constant(v: float, ctx: QContext) -> float:
    q2 = ctx.q * ctx.q
    e = v + 1.0
    num = math.exp(_log_neg_qpoch(1.0, q2, ctx) + _log_neg_qpoch(e, q2, ctx))
    return num / qpoch_exp(e, q2, ctx.product_tol)


def _log_neg_qpoch(e: float, p: float, ctx: QContext) -> float:
    """log (-p^e; p)_inf for e > 0."""
    total = 0.0
    pw = p**e
    while pw > ctx.product_tol:
        total += math.log1p(pw)
        pw *= p
    return total + pw / (1.0 - p)


def prop1_bound(v: float, n: int, ctx: QContext) -> float:
    """Upper bound for |j_v(q^n; q^2)|; grows like q^{n^2 - (2v+1) n} for n < 0."""
    if v <= -1:
        raise DomainError(f"growth bound needs v > -1, got {v}")
    c = prop1_constant(v, ctx)
    if n >= 0:
        return c
    return c * ctx.q ** (n * n - (2 * v + 1) * n)


def log_prop1_bound(v: float, n: np.ndarray, ctx: QContext) -> np.ndarray:
    lc = math.log(prop1_constant(v, ctx))
    n = np.asarray(n, dtype=float)
    expo = np.where(n < 0, n * n - (2 * v + 1) * n, 0.0)
    return lc + expo * math.log(ctx.q)


def phi_v(v: float, q: float, ctx: QContext) -> float:
    """(q^2; q^2)_inf^2 J_v(1; q^2), whose first zero in q is q_1 when v = 0."""
    local = ctx.with_q(q)
    p = q * q
    lg, sg = log_G(v + 1.0, 1.0, p, local.series_tol, local.max_terms)
    if sg == 0:
        return 0.0
    lpp, _ = log_qpoch_exp(1.0, p, local.product_tol)
    return sg * math.exp(lg + lpp)


def find_first_zero(f: Callable[[float], float], bracket: tuple[float, float], tol: float) -> float:
    """Bisection root of ``f`` on a sign-changing bracket, to width ``tol``."""
    lo, hi = bracket

    def checked(t: float) -> float:
        val = f(t)
        if not math.isfinite(val):
            raise DomainError(f"non-finite function value {val} at {t}")
        return val

    flo, fhi = checked(lo), checked(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NoSignChangeError(f"no sign change on [{lo}, {hi}]")
    return optimize.bisect(checked, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=400)


def first_sign_change(f: Callable[[float], float], lo: float, hi: float, step: float) -> tuple[float, float]:
    """Scan ``[lo, hi]`` on a uniform grid and return the first sign-changing cell."""
    n = int(math.floor((hi - lo) / step + 1e-9))
    prev_x = lo
    prev = f(lo)
    for i in range(1, n + 1):
        x = lo + i * step
        val = f(x)
        if prev == 0.0:
            return prev_x, prev_x
        if prev * val < 0:
            return prev_x, x
        prev_x, prev = x, val
    raise NoSignChangeError(f"no sign change found on [{lo}, {hi}] with step {step}")


# Lattice tables of log|j_v(q^n; q^2)| used by the summation engine.

_BLOCK = 64


@lru_cache(maxsize=512)
def _lattice_table(v: float, q: float, lo: int, hi: int, tol: float, max_terms: int) -> tuple[np.ndarray, np.ndarray]:
    ctx = QContext(q, series_tol=tol, max_terms=max_terms)
    logs = np.empty(hi - lo + 1)
    signs = np.empty(hi - lo + 1)
    for i, n in enumerate(range(lo, hi + 1)):
        lv, sg = log_j_at(v, float(n), Base.Q_SQUARED, ctx)
        logs[i] = lv
        signs[i] = sg
    logs.flags.writeable = False
    signs.flags.writeable = False
    return logs, signs


def lattice_log_j(v: float, lo: int, hi: int, ctx: QContext) -> tuple[np.ndarray, np.ndarray]:
    """Arrays of log|j_v(q^n; q^2)| and signs for n in [lo, hi]."""
    tlo = _BLOCK * (lo // _BLOCK)
    thi = _BLOCK * (hi // _BLOCK + 1)
    logs, signs = _lattice_table(float(v), ctx.q, tlo, thi, ctx.series_tol, ctx.max_terms)
    return logs[lo - tlo : hi - tlo + 1], signs[lo - tlo : hi - tlo + 1]


def j_lattice(v: float, n: int, ctx: QContext) -> float:
    """j_v(q^n; q^2) for integer n, served from the cached lattice table."""
    logs, signs = lattice_log_j(v, n, n, ctx)
    return float(signs[0] * math.exp(logs[0])) if signs[0] else 0.0


def j_series_coefficients(v: float, q: float, count: int) -> np.ndarray:
    """Coefficients a_k of j_v(x; q^2) = sum_k a_k x^{2k}."""
    q2 = q * q
    out = np.empty(count)
    a = 1.0
    for k in range(count):
        out[k] = a
        a *= -(q2 ** (k + 1)) / ((1.0 - q2 ** (k + 1)) * (1.0 - q2 ** (v + 1.0 + k)))
    return out


def c_qv(v: float, ctx: QContext) -> float:
    """c_{q,v} = (q^{2v+2}; q^2)_inf / ((q^2; q^2)_inf (1 - q))."""
    if v <= -1:
        raise DomainError(f"c_(q,v) needs v > -1, got {v}")
    q2 = ctx.q * ctx.q
    lnum, _ = log_qpoch_exp(v + 1.0, q2, ctx.product_tol)
    lden, _ = log_qpoch_exp(1.0, q2, ctx.product_tol)
    return math.exp(lnum - lden) / (1.0 - ctx.q)
