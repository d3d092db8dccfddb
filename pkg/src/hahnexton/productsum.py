"""Bilateral lattice sums of products of normalized q-Bessel functions.

Every kernel in the package reduces to

    S = sum_{t in Z} q^{s t} prod_i j_{v_i}(q^{a_i + t}; q^2),    s > 0.

Terms are formed in log space, since the weight q^{s t} and the values of
j at large arguments both leave the double range long before the product
does.  The left tail decays like q^{t^2}; we sum it explicitly down to
``-lattice_neg`` and check the growth envelope there.  The right tail decays
only geometrically, so it is summed in closed form from a cut-over point T0:
expanding each j in powers of q^{2t} turns the tail into a geometric series
per power.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, WindowTooSmallError
from .qbessel import j_series_coefficients, lattice_log_j, log_prop1_bound
from .qcore import QContext

# the right tail starts where |a_1| x^2 drops below this for every factor
TAIL_CAP = 1e-2
TAIL_TERMS = 16


@dataclass(frozen=True)
class Factor:
    """One factor j_v(q^{shift + t}; q^2) of the summand."""

    v: float
    shift: int


@dataclass(frozen=True)
class ProductSum:
    value: float
    abs_value: float
    window: tuple[int, int]
    terms_used: int


def _tail_start(factors: Sequence[Factor], q: float) -> int:
    lq = math.log(q)
    t0 = -min(f.shift for f in factors)
    for f in factors:
        a1 = q * q / ((1.0 - q * q) * (1.0 - q ** (2 * f.v + 2)))
        if a1 > TAIL_CAP:
            t0 = max(t0, math.ceil(math.log(TAIL_CAP / a1) / (2 * lq)) - f.shift)
    return t0


def _tail(s: float, factors: Sequence[Factor], t0: int, q: float) -> tuple[float, float, float]:
    """sum_{t >= t0} of the summand as (signed scaled sum, log scale, scaled abs sum)."""
    lq = math.log(q)
    conv = np.ones(1)
    for f in factors:
        y = q ** (2 * (f.shift + t0))
        coef = j_series_coefficients(f.v, q, TAIL_TERMS) * y ** np.arange(TAIL_TERMS)
        conv = np.convolve(conv, coef)[:TAIL_TERMS]
    geo = 1.0 / (1.0 - np.exp((s + 2.0 * np.arange(TAIL_TERMS)) * lq))
    return float(np.sum(conv * geo)), s * t0 * lq, float(np.sum(np.abs(conv) * geo))


def j_product_sum(s: float, factors: Sequence[Factor], ctx: QContext) -> ProductSum:
    """sum_t q^{s t} prod_i j_{v_i}(q^{a_i + t}; q^2) over all integers t."""
    if s <= 0:
        raise DomainError(f"weight exponent must be positive for convergence, got {s}")
    for f in factors:
        if f.v <= -1:
            raise DomainError(f"order must exceed -1, got {f.v}")
    q = ctx.q
    lq = math.log(q)
    a_min = min(f.shift for f in factors)
    t0 = _tail_start(factors, q)
    tmin = -ctx.lattice_neg - a_min
    ts = np.arange(tmin, t0)
    logs = s * ts * lq
    signs = np.ones(ts.size)
    for f in factors:
        lj, sj = lattice_log_j(f.v, tmin + f.shift, t0 - 1 + f.shift, ctx)
        logs = logs + lj
        signs = signs * sj
    tail_s, tail_ref, tail_abs = _tail(s, factors, t0, q)

    live = signs != 0
    ref = max(tail_ref, float(np.max(logs[live])) if live.any() else -math.inf)
    scaled = np.where(live, np.exp(np.where(live, logs, ref) - ref), 0.0)
    tail_scale = math.exp(tail_ref - ref)
    total = float(np.sum(signs * scaled)) + tail_s * tail_scale
    total_abs = float(np.sum(scaled)) + tail_abs * tail_scale

    # growth envelope at the left edge must be negligible and still shrinking
    n_edge = tmin + np.array([f.shift for f in factors], dtype=float)
    env = s * tmin * lq + sum(float(log_prop1_bound(f.v, n, ctx)) for f, n in zip(factors, n_edge))
    slope = s + sum(2 * n - 2 * f.v - 1 for f, n in zip(factors, n_edge) if n < 0)
    floor = ctx.series_tol * max(abs(total), 1e-6 * total_abs)
    too_big = floor > 0 and env - ref > math.log(floor)
    if too_big or slope >= 0:
        raise WindowTooSmallError(int(tmin), "left", math.exp(env), total * math.exp(ref))

    scale = math.exp(ref)
    cut = np.log(max(floor, 1e-300)) + math.log(1e-4)
    significant = np.nonzero(live & (logs - ref > cut))[0]
    first = int(ts[significant[0]]) if significant.size else int(t0)
    return ProductSum(
        value=total * scale,
        abs_value=total_abs * scale,
        window=(first, int(t0)),
        terms_used=int(t0 - first) + TAIL_TERMS,
    )
