"""Named verification suites driven by the ``verify`` command.

A suite is a list of zero-argument jobs in declaration order.  Jobs are
pure and picklable, so they may run in a process pool; results are always
returned in declaration order.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from .errors import ConvergenceError, DomainError
from .identities import (
    GrafLatticeParams,
    GrafParams,
    graf_original,
    graf_rewritten,
    lemma1_check,
    order_shift_series,
    product_formula,
)
from .kernels import (
    ABranchParams,
    check_D_normalization,
    check_D_scaling,
    function_A,
    function_A_large_branch,
    function_A_small_branch,
    function_A_total_integral,
    kernel_D,
    kernel_D_closed_v0,
    kernel_D_closed_vhalf,
    kernel_D_vhalf_phi,
    kernel_E,
    kernel_E_via_integral,
    kernel_E_vv_series,
    kernel_T,
    kernel_T_double_series,
)
from .qbessel import Base, c_qv, j_at, prop1_bound
from .qcore import LatticeFunction, QContext
from .qtransform import TransformPlan, check_inversion, check_plancherel
from .reports import VerificationReport

SUITE_NAMES = ("graf", "transform", "kernels", "lemma1", "prop2", "prop4")
DEFAULT_ORDERS = (-0.4, 0.0, 0.3, 0.8, 1.5)
DEFAULT_INDICES = (-2, 3)
A_PARAMS = ((0.2, 0.5, 0.3), (0.1, 0.9, -0.4))

Job = Callable[[], VerificationReport]


@dataclass(frozen=True)
class SuiteConfig:
    """Grid shared by every suite; ``orders`` are the sampled Bessel orders."""

    qs: tuple[float, ...] = (0.5,)
    orders: tuple[float, ...] = DEFAULT_ORDERS
    indices: tuple[int, int] = DEFAULT_INDICES
    tolerance: float = 1e-9
    ctx: QContext = QContext(0.5)
    random_functions: int = 3
    seed: int = 20240607

    def contexts(self) -> list[QContext]:
        return [self.ctx.with_q(q) for q in self.qs]

    def index_range(self) -> range:
        return range(self.indices[0], self.indices[1] + 1)

    def box(self) -> list[tuple[int, int, int]]:
        r = self.index_range()
        return list(itertools.product(r, r, r))


def compare_values(
    identity_id: str,
    params: dict,
    lhs: Callable[[], float],
    rhs: Callable[[], float],
    tolerance: float,
) -> VerificationReport:
    """Evaluate both sides; hypothesis violations become invalid-domain reports."""
    try:
        a = lhs()
        b = rhs()
    except DomainError as exc:
        return VerificationReport.invalid(identity_id, params, str(exc), tolerance)
    except ConvergenceError as exc:
        return VerificationReport.failed(identity_id, params, str(exc), tolerance)
    return VerificationReport.compare(identity_id, params, a, b, tolerance)


def _guarded(identity_id: str, params: dict, tolerance: float, fn: Callable[[], VerificationReport]) -> VerificationReport:
    try:
        return fn()
    except DomainError as exc:
        return VerificationReport.invalid(identity_id, params, str(exc), tolerance)
    except ConvergenceError as exc:
        return VerificationReport.failed(identity_id, params, str(exc), tolerance)


# ------------------------------------------------------------------ graf


def graf_jobs(cfg: SuiteConfig) -> list[Job]:
    jobs: list[Job] = []
    r = cfg.index_range()
    for ctx in cfg.contexts():
        for v, x in itertools.product(cfg.orders, cfg.orders):
            for m, z in itertools.product((r[0], 0, r[-1]), (r[0] + 1, r[-1] - 1)):
                p = GrafLatticeParams(m, z, v, x)
                jobs.append(partial(graf_rewritten, p, ctx, tolerance=cfg.tolerance))
        for R, x, y, v, z in itertools.product((0.5, 1.15), cfg.orders, (0.0, 0.5), (-0.4, 0.3, 1.5), (-1, 2)):
            jobs.append(partial(graf_original, GrafParams(R, x, y, v, z), ctx, tolerance=cfg.tolerance))
    return jobs


# ------------------------------------------------------------- transform


def random_lattice_function(rng: np.random.Generator, lo: int = -3, hi: int = 6, size: int = 5) -> LatticeFunction:
    """Finitely supported function with ``size`` nonzero normal values on [lo, hi]."""
    points = rng.choice(np.arange(lo, hi + 1), size=min(size, hi - lo + 1), replace=False)
    return LatticeFunction({int(p): float(rng.normal()) for p in sorted(points)})


def transform_jobs(cfg: SuiteConfig) -> list[Job]:
    jobs: list[Job] = []
    rng = np.random.default_rng(cfg.seed)
    for ctx in cfg.contexts():
        for v in cfg.orders:
            plan = TransformPlan(v, ctx)
            for _ in range(cfg.random_functions):
                f = random_lattice_function(rng)
                jobs.append(partial(check_inversion, f, plan, cfg.tolerance))
                jobs.append(partial(check_plancherel, f, plan, cfg.tolerance))
    return jobs


# --------------------------------------------------------------- kernels


def _params(ctx: QContext, **kw) -> dict:
    return {**kw, "q": ctx.q}


def prop1_check(v: float, n: int, ctx: QContext) -> VerificationReport:
    """|j_v(q^n; q^2)| against its growth bound; lhs is the value, rhs the bound."""
    params = _params(ctx, v=v, n=n)
    value = abs(j_at(v, float(n), Base.Q_SQUARED, ctx))
    bound = prop1_bound(v, n, ctx)
    report = VerificationReport.compare("prop1_bound", params, value, bound, 0.0)
    return replace(report, passed=value <= bound * (1 + 1e-12))


def a_sign_check(alpha: float, mu: float, v: float, n: int, ctx: QContext, tolerance: float) -> VerificationReport:
    """A >= 0 on x <= 1 and A <= 0 on x > 1, at x = q^n; lhs is A, rhs 0."""
    params = _params(ctx, alpha=alpha, mu=mu, v=v, n=n)

    def run() -> VerificationReport:
        a = function_A(ABranchParams(alpha, mu, v), n, ctx)
        ok = a >= -tolerance if n >= 0 else a <= tolerance
        return replace(VerificationReport.compare("A_sign", params, a, 0.0, tolerance), passed=ok)

    return _guarded("A_sign", params, tolerance, run)


def a_branch_check(alpha: float, mu: float, v: float, n: int, ctx: QContext, tolerance: float) -> VerificationReport:
    p = ABranchParams(alpha, mu, v)
    branch = function_A_small_branch if n >= 0 else function_A_large_branch
    return compare_values(
        "A_branch_series", _params(ctx, alpha=alpha, mu=mu, v=v, n=n),
        partial(function_A, p, n, ctx), partial(branch, p, n, ctx), tolerance,
    )


def _zero() -> float:
    return 0.0


def a_total_check(alpha: float, mu: float, v: float, ctx: QContext, tolerance: float) -> VerificationReport:
    p = ABranchParams(alpha, mu, v)
    return compare_values(
        "A_total_integral", _params(ctx, alpha=alpha, mu=mu, v=v),
        partial(function_A_total_integral, p, ctx), _zero, tolerance,
    )


def e00_vs_d0(m: int, n: int, k: int, ctx: QContext) -> float:
    return kernel_D(0.0, m, n, k, ctx) / c_qv(0.0, ctx)


def kernel_jobs(cfg: SuiteConfig) -> list[Job]:
    jobs: list[Job] = []
    tol = cfg.tolerance
    box = cfg.box()
    for ctx in cfg.contexts():
        for m, n, k in box:
            jobs.append(partial(compare_values, "D0_closed", _params(ctx, m=m, n=n, k=k),
                                partial(kernel_D, 0.0, m, n, k, ctx), partial(kernel_D_closed_v0, m, n, k, ctx), tol))
        for m, r, k in box:
            jobs.append(partial(compare_values, "D_half_closed", _params(ctx, m=m, r=r, k=k),
                                partial(kernel_D, -0.5, m, r, k, ctx), partial(kernel_D_closed_vhalf, m, r, k, ctx), tol))
            if k < m - 1:
                # the 1phi1 argument q^{2(k-m)+1} exceeds 1/q: the direct series loses every digit
                continue
            jobs.append(partial(compare_values, "D_half_phi", _params(ctx, m=m, r=r, k=k),
                                partial(kernel_D_vhalf_phi, m, r, k, ctx), partial(kernel_D_closed_vhalf, m, r, k, ctx), tol))
        for m, n, k in box:
            jobs.append(partial(compare_values, "E00_D0", _params(ctx, m=m, n=n, k=k),
                                partial(kernel_E, 0.0, 0.0, m, n, k, ctx), partial(e00_vs_d0, m, n, k, ctx), tol))
        for v, x in itertools.product(cfg.orders, cfg.orders):
            for m, z, k in box:
                jobs.append(partial(compare_values, "E_integral", _params(ctx, v=v, x=x, m=m, z=z, k=k),
                                    partial(kernel_E, v, x, m, z, k, ctx),
                                    partial(kernel_E_via_integral, v, x, m, z, k, ctx), tol))
        for v in sorted({*cfg.orders, -0.5}):
            for m, n, k in ((0, 1, 2), (-2, 0, 3), (1, 1, -1)):
                jobs.append(partial(check_D_scaling, v, m, n, k, ctx, tol))
            for m, k in ((0, 0), (1, -1), (3, 2)):
                jobs.append(partial(check_D_normalization, v, m, k, ctx, tol))
        for v, mu in ((0.3, 0.3), (1.5, 0.5)):
            jobs.append(partial(compare_values, "T_double_series", _params(ctx, v=v, mu=mu, m=0, n=1, k=2),
                                partial(kernel_T, v, v + mu, v, 0, 1, 2, ctx),
                                partial(kernel_T_double_series, v, mu, 0, 1, 2, ctx), tol))
        for alpha, mu, v in A_PARAMS:
            for n in range(-6, 11):
                jobs.append(partial(a_sign_check, alpha, mu, v, n, ctx, tol))
                jobs.append(partial(a_branch_check, alpha, mu, v, n, ctx, tol))
            jobs.append(partial(a_total_check, alpha, mu, v, ctx, tol))
        for v in cfg.orders:
            for n in range(-10, 21):
                jobs.append(partial(prop1_check, v, n, ctx))
    return jobs


# ------------------------------------------------------ lemma1 / prop2 / prop4


def lemma1_jobs(cfg: SuiteConfig) -> list[Job]:
    return [
        partial(lemma1_check, v, t, x_idx, ctx, cfg.tolerance)
        for ctx in cfg.contexts()
        for v in cfg.orders
        for t in (-0.5, -0.2, 0.0, 0.4, 1.0)
        for x_idx in cfg.index_range()
    ]


def prop2_jobs(cfg: SuiteConfig) -> list[Job]:
    r = cfg.index_range()
    ends = (r[0], 1, r[-1])
    return [
        partial(product_formula, v, x, m, z, lam, ctx, cfg.tolerance)
        for ctx in cfg.contexts()
        for v, x in itertools.product(cfg.orders, cfg.orders)
        for m, z in itertools.product(ends, ends)
        for lam in (-1, 2)
    ]


def evv_check(v: float, m: int, n: int, k: int, ctx: QContext, tolerance: float) -> VerificationReport:
    return compare_values(
        "E_vv_series", _params(ctx, v=v, m=m, n=n, k=k),
        partial(kernel_E, v, v, m, n, k, ctx), partial(kernel_E_vv_series, v, m, n, k, ctx), tolerance,
    )


def prop4_jobs(cfg: SuiteConfig) -> list[Job]:
    jobs: list[Job] = []
    for ctx in cfg.contexts():
        for x, v in itertools.product(cfg.orders, cfg.orders):
            for lam in cfg.index_range():
                jobs.append(partial(order_shift_series, x, v, lam, ctx, False, cfg.tolerance))
                jobs.append(partial(order_shift_series, x, v, lam, ctx, True, cfg.tolerance))
        for v in cfg.orders:
            for m, n, k in cfg.box():
                jobs.append(partial(evv_check, v, m, n, k, ctx, cfg.tolerance))
    return jobs


SUITES: dict[str, Callable[[SuiteConfig], list[Job]]] = {
    "graf": graf_jobs,
    "transform": transform_jobs,
    "kernels": kernel_jobs,
    "lemma1": lemma1_jobs,
    "prop2": prop2_jobs,
    "prop4": prop4_jobs,
}


def suite_jobs(name: str, cfg: SuiteConfig) -> list[Job]:
    if name == "all":
        return [job for key in SUITE_NAMES for job in SUITES[key](cfg)]
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from all, {', '.join(SUITE_NAMES)}")
    return SUITES[name](cfg)


def _call(job: Job) -> VerificationReport:
    return job()


def run_jobs(jobs: Sequence[Job], workers: int = 1) -> list[VerificationReport]:
    """Run jobs, possibly concurrently; the result order is the job order."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_call, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    return [job() for job in jobs]


def run_suite(name: str, cfg: SuiteConfig, workers: int = 1) -> list[VerificationReport]:
    return run_jobs(suite_jobs(name, cfg), workers)


def summarize(reports: Sequence[VerificationReport]) -> dict[str, int]:
    out = {"total": len(reports), "passed": 0, "failed": 0, "invalid": 0}
    for r in reports:
        if r.passed:
            out["passed"] += 1
        elif r.counts_as_failure:
            out["failed"] += 1
        else:
            out["invalid"] += 1
    return out


def worst_residual(reports: Sequence[VerificationReport]) -> float:
    vals = [min(r.abs_residual, r.rel_residual) for r in reports if r.status == "ok"]
    return max(vals, default=0.0) if all(math.isfinite(v) for v in vals) else math.inf
