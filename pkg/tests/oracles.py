"""Independent reference implementations for the tests.

Everything here works in mpmath at high precision straight from the
defining power series, sharing no code with the package.
"""

from __future__ import annotations

from functools import lru_cache

import mpmath as mp

DPS = 80


def qpoch(a, p, n=None):
    with mp.workdps(DPS):
        if n is None:
            return mp.qp(mp.mpf(a), mp.mpf(p))
        return mp.qp(mp.mpf(a), mp.mpf(p), n)


@lru_cache(maxsize=None)
def _j(v: float, x: str, p: str):
    # arguments passed as strings so the cache key is exact
    with mp.workdps(DPS):
        x = mp.mpf(x)
        p = mp.mpf(p)
        b = p ** (mp.mpf(v) + 1)
        total = mp.mpf(1)
        term = mp.mpf(1)
        n = 0
        while True:
            n += 1
            term *= -(p**n) * x * x / ((1 - p**n) * (1 - b * p ** (n - 1)))
            total += term
            if n > 5 and abs(term) < mp.mpf(10) ** (-DPS + 5) * max(1, abs(total)):
                return total


def j(v: float, x, p: float):
    """j_v(x; p) = sum_n (-1)^n p^{n(n+1)/2} x^{2n} / ((p;p)_n (p^{v+1};p)_n)."""
    with mp.workdps(DPS):
        return _j(v, mp.nstr(mp.mpf(x), DPS), mp.nstr(mp.mpf(p), DPS))


def J(v: float, x, p: float):
    """J_v(x; p) = (p^{v+1};p)_inf / (p;p)_inf x^v j_v(x; p)."""
    with mp.workdps(DPS):
        p_ = mp.mpf(p)
        x_ = mp.mpf(x)
        return mp.qp(p_ ** (v + 1), p_) / mp.qp(p_, p_) * x_**v * j(v, x_, p)


def J_int(m: int, x, p: float):
    """Integer order (possibly negative) through the full bilateral form."""
    with mp.workdps(DPS):
        p_ = mp.mpf(p)
        x_ = mp.mpf(x)
        return mp.fsum(
            (-1) ** k * p_ ** (k * (k + 1) / 2) * x_ ** (2 * k + m) / (mp.qp(p_, p_, k) * mp.qp(p_, p_, k + m))
            for k in range(max(0, -m), 120)
        )


def jq(v: float, n: int, q: float):
    """j_v(q^n; q^2), with q^2 formed in high precision."""
    with mp.workdps(DPS):
        qq = mp.mpf(q)
        return j(v, qq**n, qq * qq)


def c(v: float, q: float):
    with mp.workdps(DPS):
        q = mp.mpf(q)
        return mp.qp(q ** (2 * v + 2), q * q) / (mp.qp(q * q, q * q) * (1 - q))


def kernel_D(v: float, m: int, n: int, k: int, q: float, lo: int = -12, hi: int = 400) -> float:
    """Brute-force Jackson sum of c^2 j_v j_v j_v t^{2v+1}."""
    with mp.workdps(DPS):
        qq = mp.mpf(q)
        lo = lo - min(m, n, k)
        total = mp.fsum(qq ** ((2 * v + 2) * t) * jq(v, m + t, q) * jq(v, n + t, q) * jq(v, k + t, q) for t in range(lo, hi))
        return float(c(v, q) ** 2 * (1 - qq) * total)


def phi11(b, z, p, magnitude: bool = False):
    """1phi1(0; b; p, z) summed with running products.

    With ``magnitude`` the sum of absolute terms is returned as well, which
    bounds the rounding error of any float evaluation of the same series.
    """
    with mp.workdps(DPS):
        b, z, p = mp.mpf(b), mp.mpf(z), mp.mpf(p)
        total = term = size = mp.mpf(1)
        for n in range(1, 400):
            term *= -(p ** (n - 1)) * z / ((1 - p**n) * (1 - b * p ** (n - 1)))
            total += term
            size += abs(term)
        return (total, size) if magnitude else total
