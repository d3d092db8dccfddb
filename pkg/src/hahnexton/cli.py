"""Command-line front end: ``eval``, ``verify``, ``scan`` and ``zeros``.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numerical-domain error.  Every output starts with one ``#`` line echoing
the effective configuration; the payload below it is deterministic.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import re
import sys
import tempfile
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from .errors import QBesselError
from .kernels import (
    ABranchParams,
    function_A,
    kernel_D,
    kernel_D_closed_v0,
    kernel_D_closed_vhalf,
    kernel_E,
    kernel_E_via_integral,
    kernel_E_vv_series,
    kernel_T,
)
from .positivity import AtlasRow, IndexBox, ScanSpec, ZeroResult, locate_q0, locate_q1, scan_Q
from .qbessel import Base, J_hahn_exton, c_qv, j_normalized, phi_v, prop1_bound
from .qcore import QContext
from .suites import DEFAULT_ORDERS, SUITE_NAMES, SuiteConfig, run_suite, summarize

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3

EVAL_TARGETS = ("j", "J", "D", "D0closed", "Dhalfclosed", "E", "Eintegral", "Evv", "T", "A", "phi_v", "c", "prop1")
CSV_FIELDS = ("q", "v", "window", "min_value", "argmin_m", "argmin_n", "argmin_k", "is_positive", "error")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    """Effective settings after merging flags, the config file and defaults."""

    q: str = "0.5"
    v: str | None = None
    x: float | None = None
    w: float | None = None
    mu: float | None = None
    alpha: float | None = None
    m: int | None = None
    n: int | None = None
    k: int | None = None
    z: int | None = None
    base: str = "q2"
    tol: float | None = None
    series_tol: float = 1e-13
    window: str | None = None
    grid: str = "0.1:0.9:0.1"
    pos_tol_factor: float = 1e-12
    workers: int = 1
    output: str = "-"
    format: str | None = None

    def header(self, verb: str, target: str) -> str:
        items = [f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                 for k, v in dataclasses.asdict(self).items() if v is not None]
        return f"# hahnexton {verb} {target} " + " ".join(items)

    def context(self, q: float | None = None) -> QContext:
        return QContext(q if q is not None else self.single_q(), series_tol=self.series_tol)

    def q_values(self) -> list[float]:
        return _float_list(self.q, "q")

    def single_q(self) -> float:
        qs = self.q_values()
        if len(qs) != 1:
            raise UsageError(f"expected one value for --q, got {self.q!r}")
        return qs[0]

    def single_v(self) -> float:
        if self.v is None:
            raise UsageError("--v is required")
        vs = _float_list(self.v, "v")
        if len(vs) != 1:
            raise UsageError(f"expected one value for --v, got {self.v!r}")
        return vs[0]


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(CliConfig)}


def _fmt(x: float) -> str:
    # shortest string that round-trips to the same double
    return repr(float(x))


def _float_list(text: str, name: str) -> list[float]:
    try:
        return [float(s) for s in str(text).split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects comma-separated numbers, got {text!r}") from None


def _convert(key: str, raw: str) -> Any:
    kind = FIELD_TYPES[key]
    try:
        if "int" in kind and "float" not in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError:
        raise UsageError(f"bad value for {key}: {raw!r}") from None
    return raw


def read_config_file(path: str) -> dict[str, Any]:
    """Flat ``key = value`` lines; ``#`` starts a comment; keys use flag names."""
    out: dict[str, Any] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in FIELD_TYPES or key == "format" and raw not in ("csv", "json"):
            raise UsageError(f"{path}:{lineno}: unknown key or value {key}={raw}")
        out[key] = _convert(key, raw)
    return out


def resolve_config(args: argparse.Namespace) -> CliConfig:
    """Flags override the config file, which overrides built-in defaults."""
    merged: dict[str, Any] = {}
    if args.config:
        merged.update(read_config_file(args.config))
    for key in FIELD_TYPES:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return CliConfig(**merged)


# ------------------------------------------------------------------ output


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename; ``-`` is stdout."""
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".hahnexton-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_payload(text: str) -> str:
    """Strip the leading ``#`` header lines from CLI output."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def _num(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return float(_fmt(x))


def atlas_to_dict(row: AtlasRow) -> dict[str, Any]:
    am = row.argmin or (None, None, None)
    return {
        "q": _num(row.q),
        "v": _num(row.v),
        "window": row.window,
        "min_value": _num(row.min_value),
        "argmin_m": am[0],
        "argmin_n": am[1],
        "argmin_k": am[2],
        "is_positive": row.is_positive,
        "error": row.error,
    }


def atlas_csv(rows: Sequence[AtlasRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        d = atlas_to_dict(row)
        cells = []
        for key in CSV_FIELDS:
            val = d[key]
            if val is None:
                cells.append("")
            elif isinstance(val, bool):
                cells.append("true" if val else "false")
            elif isinstance(val, float):
                cells.append(_fmt(val))
            else:
                cells.append(str(val))
        writer.writerow(cells)
    return buf.getvalue()


# ------------------------------------------------------------------ verbs


def _need(cfg: CliConfig, target: str, *names: str) -> list[Any]:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise UsageError(f"eval {target} needs " + ", ".join(f"--{n}" for n in missing))
    return [getattr(cfg, n) for n in names]


def evaluate(target: str, cfg: CliConfig) -> float:
    """Dispatch one ``eval`` target; see ``hahnexton eval --help`` for the parameters."""
    ctx = cfg.context()
    base = Base.Q if cfg.base == "q" else Base.Q_SQUARED
    if target in ("j", "J"):
        (x,) = _need(cfg, target, "x")
        fn = j_normalized if target == "j" else J_hahn_exton
        return fn(cfg.single_v(), x, base, ctx)
    if target == "D":
        m, n, k = _need(cfg, target, "m", "n", "k")
        return kernel_D(cfg.single_v(), m, n, k, ctx)
    if target == "D0closed":
        m, n, k = _need(cfg, target, "m", "n", "k")
        return kernel_D_closed_v0(m, n, k, ctx)
    if target == "Dhalfclosed":
        m, n, k = _need(cfg, target, "m", "n", "k")
        return kernel_D_closed_vhalf(m, n, k, ctx)
    if target in ("E", "Eintegral"):
        x, m, z, k = _need(cfg, target, "x", "m", "z", "k")
        fn = kernel_E if target == "E" else kernel_E_via_integral
        return fn(cfg.single_v(), x, m, z, k, ctx)
    if target == "Evv":
        m, n, k = _need(cfg, target, "m", "n", "k")
        return kernel_E_vv_series(cfg.single_v(), m, n, k, ctx)
    if target == "T":
        w, alpha, m, n, k = _need(cfg, target, "w", "alpha", "m", "n", "k")
        return kernel_T(cfg.single_v(), w, alpha, m, n, k, ctx)
    if target == "A":
        alpha, mu, n = _need(cfg, target, "alpha", "mu", "n")
        return function_A(ABranchParams(alpha, mu, cfg.single_v()), n, ctx)
    if target == "phi_v":
        return phi_v(cfg.single_v(), ctx.q, ctx)
    if target == "c":
        return c_qv(cfg.single_v(), ctx)
    if target == "prop1":
        (n,) = _need(cfg, target, "n")
        return prop1_bound(cfg.single_v(), n, ctx)
    raise UsageError(f"unknown eval target {target!r}")


def cmd_eval(args: argparse.Namespace, cfg: CliConfig) -> int:
    value = evaluate(args.target, cfg)
    fmt = cfg.format or "csv"
    head = cfg.header("eval", args.target)
    ctx_line = "# qcontext " + " ".join(f"{k}={v}" for k, v in cfg.context().as_dict().items())
    if fmt == "json":
        body = json.dumps({"target": args.target, "value": _num(value)}) + "\n"
    else:
        body = _fmt(value) + "\n"
    write_atomic(cfg.output, f"{head}\n{ctx_line}\n{body}")
    return EXIT_OK


def suite_config(cfg: CliConfig) -> SuiteConfig:
    orders = tuple(_float_list(cfg.v, "v")) if cfg.v is not None else DEFAULT_ORDERS
    indices = (-2, 3)
    if cfg.window is not None:
        try:
            lo, hi = (int(s) for s in cfg.window.split(":"))
        except ValueError:
            raise UsageError(f"--window for verify expects lo:hi, got {cfg.window!r}") from None
        indices = (lo, hi)
    qs = tuple(cfg.q_values())
    return SuiteConfig(
        qs=qs, orders=orders, indices=indices, tolerance=cfg.tol if cfg.tol is not None else 1e-9, ctx=cfg.context(qs[0])
    )


def cmd_verify(args: argparse.Namespace, cfg: CliConfig) -> int:
    reports = run_suite(args.suite, suite_config(cfg), workers=cfg.workers)
    body = json.dumps([r.to_dict() for r in reports], indent=1) + "\n"
    write_atomic(cfg.output, f"{cfg.header('verify', args.suite)}\n{body}")
    counts = summarize(reports)
    print(
        f"verify {args.suite}: {counts['passed']} passed, {counts['failed']} failed, {counts['invalid']} invalid-domain",
        file=sys.stderr,
    )
    return EXIT_FAIL if counts["failed"] else EXIT_OK


def cmd_scan(args: argparse.Namespace, cfg: CliConfig) -> int:
    try:
        start, stop, step = (float(s) for s in cfg.grid.split(":"))
    except ValueError:
        raise UsageError(f"--grid expects start:stop:step, got {cfg.grid!r}") from None
    window = IndexBox.parse(cfg.window) if cfg.window else IndexBox()
    spec = ScanSpec(cfg.single_v(), (start, stop, step), window, cfg.pos_tol_factor)
    rows = scan_Q(spec, cfg.context(start), workers=cfg.workers)
    if (cfg.format or "csv") == "json":
        body = json.dumps([atlas_to_dict(r) for r in rows], indent=1) + "\n"
    else:
        body = atlas_csv(rows)
    write_atomic(cfg.output, f"{cfg.header('scan', 'atlas')}\n{body}")
    return EXIT_OK


def zero_to_dict(z: ZeroResult) -> dict[str, Any]:
    return {
        "name": z.name,
        "value": _num(z.value),
        "tol": z.tol,
        "bracket": [round(z.bracket[0], 12), round(z.bracket[1], 12)],
        "definition": z.definition,
    }


def cmd_zeros(args: argparse.Namespace, cfg: CliConfig) -> int:
    tol = cfg.tol if cfg.tol is not None else 1e-12
    ctx = cfg.context(0.5)
    found = []
    if args.which in ("q0", "both"):
        found.append(locate_q0(ctx, tol))
    if args.which in ("q1", "both"):
        found.append(locate_q1(ctx, tol))
    dicts = [zero_to_dict(z) for z in found]
    if (cfg.format or "csv") == "json":
        body = json.dumps(dicts, indent=1) + "\n"
    else:
        body = "".join(
            f"{d['name']} {_fmt(d['value'])} tol={d['tol']:g} bracket=[{d['bracket'][0]:g},{d['bracket'][1]:g}] "
            f"definition=\"{d['definition']}\"\n"
            for d in dicts
        )
    write_atomic(cfg.output, f"{cfg.header('zeros', args.which)}\n{body}")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--q", help="base q in (0,1); verify accepts a comma list")
    p.add_argument("--v", help="Bessel order; verify accepts a comma list")
    p.add_argument("--x", type=float, help="argument of j/J, or the second order of E")
    p.add_argument("--w", type=float, help="second order of T")
    p.add_argument("--mu", type=float)
    p.add_argument("--alpha", type=float)
    for name in ("m", "n", "k", "z"):
        p.add_argument(f"--{name}", type=int, help="lattice exponent")
    p.add_argument("--base", choices=("q", "q2"), help="base of j/J evaluation (default q2)")
    p.add_argument("--tol", type=float, help="verification tolerance or bisection width")
    p.add_argument("--series-tol", type=float, dest="series_tol")
    p.add_argument("--window", help="index box: lo:hi or a:b,c:d,e:f")
    p.add_argument("--grid", help="q grid start:stop:step")
    p.add_argument("--pos-tol-factor", type=float, dest="pos_tol_factor")
    p.add_argument("--workers", type=int)
    p.add_argument("--output", help="output path, - for stdout")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--config", help="flat key=value file; flags take precedence")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="hahnexton", description="Hahn-Exton q-Bessel calculus and identity checks.")
    sub = parser.add_subparsers(dest="verb", required=True)
    ev = sub.add_parser("eval", parents=[common], help="evaluate one quantity")
    ev.add_argument("target", choices=EVAL_TARGETS)
    ev.set_defaults(func=cmd_eval)
    ve = sub.add_parser("verify", parents=[common], help="run an identity suite; JSON reports")
    ve.add_argument("suite", choices=("all", *SUITE_NAMES))
    ve.set_defaults(func=cmd_verify)
    sc = sub.add_parser("scan", parents=[common], help="sample the positivity domain over a q grid")
    sc.set_defaults(func=cmd_scan)
    ze = sub.add_parser("zeros", parents=[common], help="locate q0 and/or q1")
    ze.add_argument("which", choices=("q0", "q1", "both"))
    ze.set_defaults(func=cmd_zeros)
    return parser


_NEGATIVE_VALUE = re.compile(r"^-[\d.][\d.,:eE+-]*$")


def _attach_negative_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--window -2:4`` into ``--window=-2:4``; argparse would read -2:4 as a flag."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and _NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_attach_negative_values(sys.argv[1:] if argv is None else argv))
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hahnexton: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QBesselError, ValueError, ArithmeticError) as exc:
        print(f"hahnexton: numerical-domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"hahnexton: I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
