"""Command line interface: ``plumbsw validate|sw|check <graph-file>``.

Exit codes: 0 success, 1 invalid input, 2 disagreement between routes or a
failed/non-converging computation.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import hilbert, latcoh, series, surgery
from .graph import GraphError, load_graph, parse_graph, validate
from .lattice import LatticeContext

EXIT_OK, EXIT_INPUT, EXIT_MATH = 0, 1, 2
METHODS = ("series", "latcoh", "surgery")
CAP_ENV = "PLUMBSW_CAP"


def _fmt(x) -> str | None:
    return None if x is None else str(Fraction(x))


def _load(path: str):
    """(graph, None) or (None, message)."""
    try:
        g = load_graph(path)
    except OSError as exc:
        return None, f"cannot read {path}: {exc.strerror or exc}"
    except GraphError as exc:
        return None, f"{path}: {exc}"
    report = validate(g)
    if not report:
        return None, f"{path}: " + "; ".join(report.reasons)
    return g, None


def graph_summary(ctx: LatticeContext) -> dict:
    return {
        "s": ctx.s,
        "d": ctx.d,
        "K2": _fmt(ctx.square(ctx.K)),
        "invariant_factors": list(ctx.invariant_factors),
    }


# -- per-class work, also run in worker processes ------------------------------------


def class_row(ctx: LatticeContext, h: tuple, methods: tuple, cap: int | None) -> dict:
    row: dict = {"class": list(h)}
    errors = []
    if "series" in methods:
        row["sw_series"] = hilbert.s_invariant(ctx, h)
    if "latcoh" in methods:
        try:
            res = latcoh.eu_lattice(ctx, ctx.spinc_char_class(h))
            row["sw_latcoh"] = -res.eu
            row["eu"] = res.eu
            row["d_k"] = res.d_k
        except latcoh.LatCohError as exc:
            errors.append(f"latcoh: {exc}")
    if "surgery" in methods:
        try:
            row["sw_surgery"] = surgery.sw_via_surgery(ctx, h, cap)
        except surgery.PeriodicConstantError as exc:
            errors.append(f"surgery: {exc}")
    if errors:
        row["errors"] = errors
    return row


def _class_row_worker(args):
    text, h, methods, cap = args
    return class_row(LatticeContext(parse_graph(text)), h, methods, cap)


def run_sw(g, methods: tuple, cap: int | None, parallel: bool) -> dict:
    ctx = LatticeContext(g)
    if parallel and ctx.d > 1:
        text = g.to_text()
        jobs = [(text, h, methods, cap) for h in ctx.classes()]
        with ProcessPoolExecutor() as pool:
            rows = list(pool.map(_class_row_worker, jobs))
    else:
        rows = [class_row(ctx, h, methods, cap) for h in ctx.classes()]
    for row in rows:
        values = {row[f"sw_{m}"] for m in methods if f"sw_{m}" in row}
        row["agree"] = len(values) <= 1 and "errors" not in row
    return {"graph": graph_summary(ctx), "methods": list(methods), "rows": rows}


_RATIONAL_KEYS = {"sw_series", "sw_latcoh", "sw_surgery", "eu", "d_k"}


def _serializable(report: dict) -> dict:
    rows = [{k: _fmt(v) if k in _RATIONAL_KEYS else v for k, v in row.items()}
            for row in report["rows"]]
    return {**report, "rows": rows}


def _print_table(report: dict, out) -> None:
    gs = report["graph"]
    print(f"s={gs['s']} d={gs['d']} K^2={gs['K2']} H1=" +
          (" x ".join(f"Z/{f}" for f in gs["invariant_factors"]) or "0"), file=out)
    cols = [f"sw_{m}" for m in report["methods"]]
    extra = ["d_k"] if "latcoh" in report["methods"] else []
    header = ["class"] + cols + extra + ["agree"]
    print("  ".join(f"{h:>12}" for h in header), file=out)
    for row in report["rows"]:
        cells = [str(tuple(row["class"]))]
        cells += [_fmt(row.get(c)) or "-" for c in cols + extra]
        cells.append("yes" if row["agree"] else "NO")
        print("  ".join(f"{c:>12}" for c in cells), file=out)
        for err in row.get("errors", []):
            print(f"    error: {err}", file=out)


# -- commands ----------------------------------------------------------------------------


def cmd_validate(args) -> int:
    g, err = _load(args.graph)
    if err:
        print(err, file=sys.stderr)
        return EXIT_INPUT
    ctx = LatticeContext(g)
    if args.json:
        print(json.dumps({"valid": True, **graph_summary(ctx)}, sort_keys=True))
    else:
        print(f"valid: s={ctx.s} d={ctx.d}")
    return EXIT_OK


def cmd_sw(args) -> int:
    g, err = _load(args.graph)
    if err:
        print(err, file=sys.stderr)
        return EXIT_INPUT
    methods = METHODS if args.method == "all" else (args.method,)
    t0 = time.perf_counter()
    report = run_sw(g, methods, args.cap, args.parallel)
    if args.json:
        print(json.dumps(_serializable(report), sort_keys=True))
    else:
        _print_table(report, sys.stdout)
        print(f"time {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return EXIT_OK if all(r["agree"] for r in report["rows"]) else EXIT_MATH


def run_checks(g, cap: int | None = None, blowup: bool = False) -> list[tuple[str, bool, str]]:
    """Every identity for one graph, in a fixed order: (name, passed, detail)."""
    ctx = LatticeContext(g)
    results = []

    def record(name, fn):
        try:
            ok, detail = fn()
        except (surgery.PeriodicConstantError, latcoh.LatCohError) as exc:
            ok, detail = False, str(exc)
        results.append((name, bool(ok), detail))

    classes = ctx.classes()
    record("cube_expansion", lambda: (series.verify_cube_expansion(ctx), "dual coordinates <= 4"))
    record("hilbert_expression", lambda: (
        all(hilbert.hilbert_expression_check(ctx, h, 3) for h in classes), "3 zone elements per class"))
    record("symmetry", lambda: (latcoh.verify_symmetry(ctx), "eu([k]) = eu([-k])"))
    ends = g.end_vertices() if ctx.s >= 2 else []

    def partial_sums():
        for u in ends:
            for h in classes:
                for a in ctx.zone_representatives_dual(h, 2):
                    if not surgery.verify_partial_sum(ctx, ctx.from_dual(a), u):
                        return False, f"class {h} at {u}"
        return True, f"{len(ends)} end-vertices"

    def surgery_identity():
        for u in ends:
            for h in classes:
                if not surgery.verify_surgery_identity(ctx, h, u, cap):
                    return False, f"class {h} at {u}"
        return True, f"{len(ends)} end-vertices"

    def routes():
        report = run_sw(g, METHODS, cap, False)
        bad = [tuple(r["class"]) for r in report["rows"] if not r["agree"]]
        return not bad, f"disagreeing classes {bad}" if bad else "all classes"

    record("partial_sum", partial_sums)
    record("surgery_identity", surgery_identity)
    record("route_equality", routes)
    if blowup:
        def blow():
            targets = [g.ids[0]] + ([g.edges[0]] if g.edges else [])
            ok = all(hilbert.blow_up_invariance(g, t) for t in targets)
            return ok, f"{len(targets)} blow-ups"
        record("blow_up_invariance", blow)
    return results


def cmd_check(args) -> int:
    g, err = _load(args.graph)
    if err:
        print(err, file=sys.stderr)
        return EXIT_INPUT
    results = run_checks(g, args.cap, args.blowup)
    if args.json:
        print(json.dumps([{"check": n, "pass": ok, "detail": d} for n, ok, d in results],
                         sort_keys=True))
    else:
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    failed = [n for n, ok, _ in results if not ok]
    if failed:
        print(f"first failing check: {failed[0]}", file=sys.stderr)
        return EXIT_MATH
    return EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plumbsw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("graph", help="graph file (text format, or JSON with a .json suffix)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--parallel", action="store_true", help="run classes in worker processes")
    common.add_argument("--cap", type=_positive_int, default=None,
                        help=f"largest period tried, as a multiple of d (default 8; env {CAP_ENV})")
    sub.add_parser("validate", parents=[common], help="parse and validate a graph")
    p_sw = sub.add_parser("sw", parents=[common], help="invariants of every class")
    p_sw.add_argument("--method", choices=METHODS + ("all",), default="all")
    p_check = sub.add_parser("check", parents=[common], help="run every identity")
    p_check.add_argument("--blowup", action="store_true", help="also check blow-up invariance")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cap is None and os.environ.get(CAP_ENV):
        try:
            args.cap = _positive_int(os.environ[CAP_ENV])
        except (ValueError, argparse.ArgumentTypeError):
            print(f"{CAP_ENV} must be a positive integer", file=sys.stderr)
            return EXIT_INPUT
    handler = {"validate": cmd_validate, "sw": cmd_sw, "check": cmd_check}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
