"""Command-line front end.

Exit codes::

    0  success / pass
    1  check or oracle comparison failed
    2  section is not admissible
    3  config could not be parsed
    4  surface evaluation failed
    5  grid output could not be written
    6  check passed only through near-equalities (boundary flags)
    7  LP solver error
"""
from __future__ import annotations

import argparse
import io
import json
import logging
from pathlib import Path
import sys

from . import checks, oracle
from .config import BUILTIN_NAMES, builtin_section, load_section, section_to_dict
from .constructions import SurfaceKind, context, surface
from .errors import AdmissibilityError, ConfigError, DomainError, SolverError

log = logging.getLogger("splicecop")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_PARSE = 3
EXIT_EVAL = 4
EXIT_IO = 5
EXIT_BOUNDARY = 6
EXIT_SOLVER = 7

GRID_MIN, GRID_MAX = 2, 4096
CHECKS = ("copula", "coincidence", "phi-simple", "k-condition", "quasi", "all")

DEFAULT_GRID_N = 101
DEFAULT_PAIR_N = 400
DEFAULT_ORACLE_N = 16
REPORT_GRID_N = 41
REPORT_FIGURE_KINDS = ("C1", "C2", "SPLICE")
REPORT_CONTOUR_KINDS = ("SPLICE", "A_UPPER", "BERTINO")


class _Exit(Exception):
    def __init__(self, code, message=None):
        super().__init__(message)
        self.code = code
        self.message = message


def fmt(v) -> str:
    """Shortest round-trip decimal (at most 17 significant digits)."""
    return repr(float(v))


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _load(args):
    try:
        if args.config:
            return load_section(args.config)
        return builtin_section(args.builtin)
    except ConfigError as exc:
        raise _Exit(EXIT_PARSE, str(exc)) from exc
    except (AdmissibilityError, DomainError) as exc:
        raise _Exit(EXIT_INVALID, str(exc)) from exc


def _grid_n(n):
    if not GRID_MIN <= n <= GRID_MAX:
        raise _Exit(EXIT_PARSE, f"--n must lie in [{GRID_MIN}, {GRID_MAX}]")
    return n


def _tol(args, default=checks.TOL):
    tol = default if args.tol is None else args.tol
    if not tol > 0:
        raise _Exit(EXIT_PARSE, "--tol must be positive")
    return tol


def _write(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot write {out}: {exc}") from exc


# commands ----------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        sec = load_section(args.config) if args.config else builtin_section(args.builtin)
    except ConfigError as exc:
        _write(dumps({"valid": False, "error": "parse", "detail": str(exc)}), None)
        return EXIT_PARSE
    except AdmissibilityError as exc:
        where = exc.where if not isinstance(exc.where, tuple) else list(exc.where)
        _write(dumps({"valid": False, "error": "admissibility", "property": exc.prop,
                      "where": where, "detail": str(exc)}), None)
        return EXIT_INVALID
    except DomainError as exc:
        _write(dumps({"valid": False, "error": "layout", "detail": str(exc)}), None)
        return EXIT_INVALID
    _write(dumps({"valid": True, "name": sec.name, "resolution": sec.resolution,
                  "hat_breaks": [float(t) for t in sec.hat_breaks],
                  "tilde_breaks": [float(t) for t in sec.tilde_breaks]}), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    ctx = context(_load(args))
    try:
        value = surface(ctx, args.kind, float(args.x), float(args.y))
    except (DomainError, ValueError) as exc:
        raise _Exit(EXIT_EVAL, str(exc)) from exc
    _write(fmt(value) + "\n", args.out)
    return EXIT_OK


def grid_csv(g: checks.GridSurface) -> str:
    buf = io.StringIO()
    buf.write("x,y,value\n")
    for i, x in enumerate(g.xs):
        sx = fmt(x)
        for j, y in enumerate(g.ys):
            buf.write(f"{sx},{fmt(y)},{fmt(g.values[i, j])}\n")
    return buf.getvalue()


def _fill(ctx, kind, n, workers):
    xs, ys = checks.knot_axes(ctx, n)
    try:
        return checks.fill_grid(ctx, kind, xs, ys, workers=workers)
    except (DomainError, ValueError) as exc:
        raise _Exit(EXIT_EVAL, str(exc)) from exc


def cmd_grid(args) -> int:
    ctx = context(_load(args))
    n = _grid_n(args.n or DEFAULT_GRID_N)
    g = _fill(ctx, args.kind, n, args.workers)
    _write(grid_csv(g), args.out)
    return EXIT_OK


def run_checks(ctx, which, n, tol, workers=1) -> list[checks.VerdictReport]:
    wanted = CHECKS[:-1] if which == "all" else (which,)
    reports = []
    for name in wanted:
        if name == "copula":
            reports.append(checks.copulahood_criterion(ctx, n, tol))
        elif name == "coincidence":
            reports.append(checks.coincidence_criterion(ctx, n, tol))
        elif name == "phi-simple":
            reports.append(checks.phi_simple_report(ctx, n, tol))
        elif name == "k-condition":
            reports.append(checks.k_condition_report(ctx, tol=tol))
        elif name == "quasi":
            xs, ys = checks.knot_axes(ctx, min(n, 201))
            g = checks.fill_grid(ctx, "SPLICE", xs, ys, workers=workers)
            reports.append(checks.check_quasi_copula(g, tol))
    return reports


def verdict_exit(reports) -> int:
    if any(not r.passed for r in reports):
        return EXIT_FAIL
    if any(r.boundary_only for r in reports):
        return EXIT_BOUNDARY
    return EXIT_OK


def cmd_check(args) -> int:
    ctx = context(_load(args))
    n = _grid_n(args.n or DEFAULT_PAIR_N)
    reports = run_checks(ctx, args.which, n, _tol(args), args.workers)
    if len(reports) == 1:
        payload = reports[0].to_dict()
    else:
        payload = {"reports": [r.to_dict() for r in reports]}
    _write(dumps(payload), args.out)
    return verdict_exit(reports)


def _parse_node(text):
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"node must be 'a,b', got {text!r}") from exc
    return a, b


def oracle_payload(ctx, n, nodes):
    rows, mesh = oracle.compare(ctx, n, nodes)
    table = [r.to_dict(mesh) for r in rows]
    return {"n": n, "mesh": mesh, "band": [oracle.GAP_FLOOR, 2.0 * mesh],
            "all_in_band": all(t["in_band"] for t in table), "rows": table}


def cmd_oracle(args) -> int:
    ctx = context(_load(args))
    n = args.n or DEFAULT_ORACLE_N
    if not 2 <= n <= oracle.MAX_N:
        raise _Exit(EXIT_PARSE, f"--n must lie in [2, {oracle.MAX_N}] for the oracle")
    nodes = args.node or oracle.default_nodes(n)
    try:
        payload = oracle_payload(ctx, n, nodes)
    except SolverError as exc:
        raise _Exit(EXIT_SOLVER, str(exc)) from exc
    except DomainError as exc:
        raise _Exit(EXIT_PARSE, str(exc)) from exc
    _write(dumps(payload), args.out)
    return EXIT_OK if payload["all_in_band"] else EXIT_FAIL


def cmd_report(args) -> int:
    from . import plotting

    sec = _load(args)
    ctx = context(sec)
    out = Path(args.out or "report")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot create {out}: {exc}") from exc
    n = _grid_n(args.n or REPORT_GRID_N)
    tol = _tol(args)
    grids = {k: _fill(ctx, k, n, args.workers) for k in
             dict.fromkeys(REPORT_FIGURE_KINDS + REPORT_CONTOUR_KINDS)}
    reports = run_checks(ctx, "all", DEFAULT_PAIR_N, tol, args.workers)
    splice_grid = grids["SPLICE"]
    summary = {
        "name": sec.name,
        "reports": [r.to_dict() for r in reports],
        "derivative_criterion": checks.derivative_criterion(ctx),
        "two_increasing": checks.check_two_increasing(splice_grid, tol).to_dict(),
        "m_behavior_nodes": len(checks.m_behavior_scan(splice_grid, tol)),
        "max_abs_splice_minus_a": checks.max_abs_difference(splice_grid, grids["A_UPPER"]),
        "max_abs_splice_minus_k": checks.max_abs_difference(
            splice_grid, _fill(ctx, "K", n, args.workers)),
    }
    try:
        orc = oracle_payload(ctx, DEFAULT_ORACLE_N, oracle.default_nodes(DEFAULT_ORACLE_N))
    except SolverError as exc:
        raise _Exit(EXIT_SOLVER, str(exc)) from exc
    _write(dumps(section_to_dict(sec)), out / "section.json")
    _write(dumps(summary), out / "checks.json")
    _write(dumps(orc), out / "oracle.json")
    for kind, g in grids.items():
        _write(grid_csv(g), out / f"grid_{kind}.csv")
    try:
        plotting.surfaces_figure([grids[k] for k in REPORT_FIGURE_KINDS],
                                 out / "surfaces.png", phi=sec.phi, title=sec.name)
        plotting.contour_figure([grids[k] for k in REPORT_CONTOUR_KINDS],
                                out / "contours.png", phi=sec.phi)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot write figures: {exc}") from exc
    log.info("report written to %s", out)
    return EXIT_OK


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="section config (JSON)")
    src.add_argument("--builtin", metavar="NAME", default="example-1",
                     help=f"named section: {', '.join(BUILTIN_NAMES)} (default example-1)")
    common.add_argument("--n", type=int, default=None, help="grid size / pair resolution")
    common.add_argument("--tol", type=float, default=None, help="check tolerance")
    common.add_argument("--out", metavar="PATH", default=None, help="output file or directory")
    common.add_argument("--workers", type=int, default=1, help="threads for grid fills")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="splicecop",
                                description="Supremum copulas with a given curvilinear section.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("validate", parents=[common], help="validate a section")
    s.set_defaults(func=cmd_validate)
    s = sub.add_parser("eval", parents=[common], help="evaluate a surface at one point")
    s.add_argument("kind", help="surface: " + ", ".join(k.value for k in SurfaceKind))
    s.add_argument("x", type=float)
    s.add_argument("y", type=float)
    s.set_defaults(func=cmd_eval)
    s = sub.add_parser("grid", parents=[common], help="export a surface grid as CSV")
    s.add_argument("--kind", default="SPLICE")
    s.set_defaults(func=cmd_grid)
    s = sub.add_parser("check", parents=[common], help="run a decision procedure")
    s.add_argument("which", choices=CHECKS)
    s.set_defaults(func=cmd_check)
    s = sub.add_parser("oracle", parents=[common], help="compare the splice with LP bounds")
    s.add_argument("--node", type=_parse_node, action="append",
                   help="knot index pair 'a,b' (repeatable); default: curve and 5 off-curve nodes")
    s.set_defaults(func=cmd_oracle)
    s = sub.add_parser("report", parents=[common], help="run everything, write JSON/CSV/PNG")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except _Exit as exc:
        if exc.message:
            print(f"error: {exc.message}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
