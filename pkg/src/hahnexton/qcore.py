"""q-shifted factorials, the 1phi1 series, Jackson q-integrals and L_{q,p,v} norms.

Everything here is a pure function of its arguments plus a :class:`QContext`,
which carries the base ``q`` and every truncation knob.  Routines never read
global state, so they are safe to call from many threads at once.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from .errors import ConvergenceError, DomainError, PoleError, WindowTooSmallError

# consecutive negligible terms before a windowed bilateral sum is declared stagnant
STAGNATION_RUN = 20


@dataclass(frozen=True)
class QContext:
    """Base ``q`` in (0, 1) together with the truncation policy.

    ``series_tol`` is the relative tail tolerance of unilateral series,
    ``product_tol`` the cut-off for infinite products, ``lattice_neg`` and
    ``lattice_pos`` bound bilateral sums over exponents, and ``max_terms`` is
    a hard cap on any single summation.
    """

    q: float
    series_tol: float = 1e-13
    product_tol: float = 1e-17
    lattice_neg: int = 60
    lattice_pos: int = 200
    max_terms: int = 5000

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise DomainError(f"q must lie in (0, 1), got {self.q!r}")
        if not (self.series_tol > 0 and self.product_tol > 0):
            raise DomainError("series_tol and product_tol must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")
        if self.lattice_neg < 0 or self.lattice_pos < 0:
            raise DomainError("lattice window sizes must be non-negative")

    def with_q(self, q: float) -> QContext:
        return dataclasses.replace(self, q=q)

    def as_dict(self) -> dict[str, float | int]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class LatticeFunction:
    """Finitely supported function on the lattice {q^n : n in Z}.

    ``values`` maps the exponent ``n`` to ``f(q^n)``; any exponent outside the
    mapping evaluates to exactly ``0.0``.
    """

    values: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {int(n): float(v) for n, v in self.values.items()}
        object.__setattr__(self, "values", clean)

    @classmethod
    def indicator(cls, n: int, value: float = 1.0) -> LatticeFunction:
        return cls({n: value})

    @classmethod
    def zero(cls) -> LatticeFunction:
        return cls({})

    def __getitem__(self, n: int) -> float:
        return self.values.get(n, 0.0)

    def __call__(self, n: int) -> float:
        return self.values.get(n, 0.0)

    @property
    def support(self) -> list[int]:
        return sorted(self.values)

    def items(self) -> list[tuple[int, float]]:
        return sorted(self.values.items())

    def __add__(self, other: LatticeFunction) -> LatticeFunction:
        out = dict(self.values)
        for n, v in other.values.items():
            out[n] = out.get(n, 0.0) + v
        return LatticeFunction(out)

    def scale(self, alpha: float) -> LatticeFunction:
        return LatticeFunction({n: alpha * v for n, v in self.values.items()})

    def abs(self) -> LatticeFunction:
        return LatticeFunction({n: abs(v) for n, v in self.values.items()})

    def max_abs_difference(self, other: LatticeFunction, exponents: Iterable[int]) -> float:
        return max((abs(self[n] - other[n]) for n in exponents), default=0.0)


@dataclass(frozen=True)
class NormSpec:
    p: float
    v: float

    def __post_init__(self) -> None:
        if self.p < 1:
            raise DomainError(f"norm exponent p must be >= 1, got {self.p}")
        if self.v <= -1:
            raise DomainError(f"norm order v must exceed -1, got {self.v}")


class SumResult(NamedTuple):
    value: float
    window: tuple[int, int]
    terms: int


Integrand = Union[LatticeFunction, Callable[[float], float]]


def qpochhammer(a: float, n: int | float, ctx: QContext, base: float | None = None) -> float:
    """(a; p)_n with p = ``base`` (default ``ctx.q``); ``n`` may be ``math.inf``."""
    p = ctx.q if base is None else base
    if n == 0:
        return 1.0
    if n != math.inf:
        if n < 0 or int(n) != n:
            raise DomainError(f"n must be a non-negative integer or inf, got {n}")
        out = 1.0
        for i in range(int(n)):
            out *= 1.0 - a * p**i
        return out
    if a == 0.0:
        return 1.0
    out = 1.0
    pi = 1.0
    for _ in range(ctx.max_terms):
        t = a * pi
        if abs(t) < ctx.product_tol:
            # log of the remaining factors is -a p^i / (1 - p) to first order
            return out * math.exp(-t / (1.0 - p))
        out *= 1.0 - t
        pi *= p
    raise ConvergenceError("infinite q-product exceeded max_terms")


def log_abs_one_minus_power(w: float, lp: float) -> tuple[float, int]:
    """log|1 - p^w| and the sign of 1 - p^w, for ``lp = log p`` and w != 0."""
    if w > 0:
        return math.log1p(-math.exp(w * lp)), 1
    return w * lp + math.log1p(-math.exp(-w * lp)), -1


def log_qpoch_exp(e: float, p: float, tol: float = 1e-17, max_terms: int = 100000) -> tuple[float, int]:
    """log|(p^e; p)_inf| with its sign, for a real exponent ``e``.

    A factor vanishes exactly when ``e`` is an integer <= 0; the result is then
    ``(-inf, 0)``.  Large negative ``e`` is handled without overflow.
    """
    if float(e).is_integer() and e <= 0:
        return -math.inf, 0
    lp = math.log(p)
    total = 0.0
    sign = 1
    j = 0
    while e + j < 0:
        val, sg = log_abs_one_minus_power(e + j, lp)
        total += val
        sign *= sg
        j += 1
    for _ in range(max_terms):
        pw = math.exp((e + j) * lp)
        if pw < tol:
            return total - pw / (1.0 - p), sign
        total += math.log1p(-pw)
        j += 1
    raise ConvergenceError("infinite q-product exceeded max_terms")


def qpoch_exp(e: float, p: float, tol: float = 1e-17) -> float:
    """(p^e; p)_inf as a float."""
    lv, sg = log_qpoch_exp(e, p, tol)
    return 0.0 if sg == 0 else sg * math.exp(lv)


def signed_log_sum(terms: Iterable[tuple[float, int]]) -> tuple[float, float, float]:
    """Sum ``sign * exp(log)`` pairs without overflow.

    Returns ``(scaled_sum, ref, scaled_abs_sum)`` where the true sum is
    ``scaled_sum * exp(ref)``.
    """
    items = [(lt, sg) for lt, sg in terms if sg != 0 and lt != -math.inf]
    if not items:
        return 0.0, 0.0, 0.0
    ref = max(lt for lt, _ in items)
    s = 0.0
    a = 0.0
    for lt, sg in items:
        e = math.exp(lt - ref)
        s += sg * e
        a += e
    return s, ref, a


def phi_1_1(b: float, z: float, ctx: QContext, base: float | None = None) -> float:
    """1phi1(0; b; p, z) = sum_n (-1)^n p^{n(n-1)/2} z^n / ((p;p)_n (b;p)_n).

    The series is summed term by term until two consecutive terms fall below
    ``series_tol`` times the largest partial sum seen so far.
    """
    p = ctx.q if base is None else base
    total = 1.0
    biggest = 1.0
    term = 1.0
    small = 0
    for n in range(1, ctx.max_terms):
        denom = (1.0 - p**n) * (1.0 - b * p ** (n - 1))
        if abs(1.0 - b * p ** (n - 1)) < 1e-14:
            raise PoleError(f"pole in lower parameter: (b;q)_{n} vanishes for b={b!r}")
        term *= -(p ** (n - 1)) * z / denom
        total += term
        biggest = max(biggest, abs(total))
        if abs(term) < ctx.series_tol * biggest:
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise ConvergenceError("1phi1 series exceeded max_terms")


def bilateral_sum(term: Callable[[int], float], ctx: QContext, center: int = 0) -> SumResult:
    """Sum ``term(n)`` over n in [center - lattice_neg, center + lattice_pos].

    Each direction stops early once ``STAGNATION_RUN`` consecutive terms add
    less than ``series_tol`` times the running partial sum.  Reaching an edge
    with a non-negligible last term raises :class:`WindowTooSmallError`.
    """
    partial = term(center)
    used = 1
    lo = hi = center
    for side, step, limit in (("right", 1, ctx.lattice_pos), ("left", -1, ctx.lattice_neg)):
        run = 0
        last = 0.0
        n = center
        for _ in range(limit):
            n += step
            last = term(n)
            partial += last
            used += 1
            if abs(last) <= ctx.series_tol * abs(partial):
                run += 1
                if run >= STAGNATION_RUN:
                    break
            else:
                run = 0
        else:
            if limit and abs(last) > ctx.series_tol * abs(partial):
                raise WindowTooSmallError(n, side, last, partial)
        if step > 0:
            hi = n
        else:
            lo = n
    return SumResult(partial, (lo, hi), used)


def jackson_integral(f: Integrand, ctx: QContext) -> float:
    """Jackson integral over [0, inf): (1 - q) sum_n q^n f(q^n).

    A :class:`LatticeFunction` is integrated exactly over its support; a
    callable of ``x`` is summed over the context window with stagnation
    detection (see :func:`bilateral_sum`).
    """
    return jackson_sum(f, ctx).value


def jackson_sum(f: Integrand, ctx: QContext) -> SumResult:
    q = ctx.q
    if isinstance(f, LatticeFunction):
        items = f.items()
        value = (1.0 - q) * math.fsum(q**n * v for n, v in items)
        window = (items[0][0], items[-1][0]) if items else (0, 0)
        return SumResult(value, window, len(items))
    res = bilateral_sum(lambda n: q**n * f(q**n), ctx)
    return SumResult((1.0 - q) * res.value, res.window, res.terms)


def lqpv_norm(f: LatticeFunction, spec: NormSpec, ctx: QContext) -> float:
    """[ int_0^inf |f(x)|^p x^{2v+1} d_q x ]^{1/p} for finitely supported f."""
    q = ctx.q
    weighted = LatticeFunction(
        {n: abs(val) ** spec.p * q ** (n * (2 * spec.v + 1)) for n, val in f.items()}
    )
    return jackson_integral(weighted, ctx) ** (1.0 / spec.p)
