"""Structured verification results shared by the identity, kernel and CLI layers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

OK = "ok"
INVALID = "invalid-domain"
ERROR = "error"


def _num(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return float(f"{x:.17g}")


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of checking one identity at one parameter set.

    ``passed`` holds when either the absolute or the relative residual is
    within ``tolerance``.  Reports with ``status`` other than ``"ok"`` never
    pass; an ``"invalid-domain"`` report means the inputs violate the
    identity's hypotheses and no claim is made either way.
    """

    identity_id: str
    params: dict[str, Any]
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    tolerance: float
    passed: bool
    window: tuple[int, int] = (0, 0)
    terms_used: int = 0
    status: str = OK
    note: str = field(default="", compare=False)

    @classmethod
    def compare(
        cls,
        identity_id: str,
        params: dict[str, Any],
        lhs: float,
        rhs: float,
        tolerance: float,
        window: tuple[int, int] = (0, 0),
        terms_used: int = 0,
    ) -> VerificationReport:
        abs_res = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs))
        rel_res = abs_res / scale if scale > 0 else 0.0
        finite = math.isfinite(abs_res)
        passed = finite and (abs_res <= tolerance or rel_res <= tolerance)
        return cls(identity_id, dict(params), lhs, rhs, abs_res, rel_res, tolerance, passed,
                   (int(window[0]), int(window[1])), int(terms_used))

    @classmethod
    def invalid(cls, identity_id: str, params: dict[str, Any], reason: str, tolerance: float = 0.0) -> VerificationReport:
        nan = math.nan
        return cls(identity_id, dict(params), nan, nan, nan, nan, tolerance, False, status=INVALID, note=reason)

    @classmethod
    def failed(cls, identity_id: str, params: dict[str, Any], reason: str, tolerance: float = 0.0) -> VerificationReport:
        nan = math.nan
        return cls(identity_id, dict(params), nan, nan, nan, nan, tolerance, False, status=ERROR, note=reason)

    @property
    def counts_as_failure(self) -> bool:
        return self.status != INVALID and not self.passed

    def to_dict(self) -> dict[str, Any]:
        out = {
            "identity_id": self.identity_id,
            "params": {k: (_num(v) if isinstance(v, float) else v) for k, v in self.params.items()},
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "abs_residual": _num(self.abs_residual),
            "rel_residual": _num(self.rel_residual),
            "tolerance": _num(self.tolerance),
            "pass": self.passed,
            "window": list(self.window),
            "terms_used": self.terms_used,
            "status": self.status,
        }
        if self.note:
            out["note"] = self.note
        return out
