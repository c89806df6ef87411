"""Command-line front end.

Exit status: 0 on success, 1 on invalid input, 2 when an exact enumeration
would exceed the edge cap.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import analysis
from .analysis import (
    BoundError,
    DecodingPolynomial,
    EnumerationCapError,
    census,
    census_from_json,
    census_to_csv,
    census_to_json,
    compute_Dx,
)
from .montecarlo import TrialConfig, compare_exact, simulate
from .multigraph import GraphError, MultiGraph, stats
from .report import build_report, render_table
from .scheme import (
    CodingScheme,
    SchemeError,
    derive_params,
    format_grid,
    generate_interleaved,
    generate_plain,
    to_graph,
)


def _emit(text: str, out: str | None = None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _load_graph(path: str) -> MultiGraph:
    doc = json.loads(Path(path).read_text())
    if "relays" in doc:
        return to_graph(CodingScheme.from_dict(doc))
    return MultiGraph.from_dict(doc)


def cmd_generate(args) -> int:
    params = derive_params(args.n, args.k, args.r)
    if args.mode == "plain":
        scheme = generate_plain(params)
    else:
        if args.L is None:
            raise SchemeError("--L is required for interleaved schemes")
        scheme = generate_interleaved(params, args.L)
    if args.format == "table":
        _emit(format_grid(scheme) + "\n", args.out)
    else:
        _emit(_dumps(scheme.to_dict()), args.out)
    return 0


def _census_bounds(g: MultiGraph, result):
    if result.loop_cut is None:
        print("warning: no D_x bounds for an undecodable graph", file=sys.stderr)
        return None
    try:
        return compute_Dx(g.n, g.m, result.loop_cut, stats(g).max_loops)
    except BoundError as exc:
        print(f"warning: no D_x bounds for this graph: {exc}", file=sys.stderr)
        return None


def cmd_census(args) -> int:
    g = _load_graph(args.file)
    result = census(g, cap=args.cap, force=args.force, workers=args.workers)
    bounds = _census_bounds(g, result) if args.bounds else None
    if args.format == "csv":
        _emit(census_to_csv(result, bounds), args.out)
    elif args.format == "json":
        _emit(_dumps(census_to_json(result, bounds)), args.out)
    else:
        lines = [f"n={result.n} m={result.m} m(G)={result.loop_cut}"]
        for row in analysis.census_rows(result, bounds):
            lines.append("  ".join(f"{k}={v}" for k, v in row.items() if v != ""))
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _polynomial_from_doc(doc: dict) -> DecodingPolynomial:
    if "c" in doc:
        result = census_from_json(doc)
        return DecodingPolynomial.from_census(result)
    if "D" in doc:
        return DecodingPolynomial(int(doc["m"]), [int(v) for v in doc["D"]])
    raise ValueError("document has neither a census ('c') nor a bound row ('D')")


def cmd_prob(args) -> int:
    poly = _polynomial_from_doc(json.loads(Path(args.file).read_text()))
    other = None
    if args.compare:
        other = _polynomial_from_doc(json.loads(Path(args.compare).read_text()))
    if args.grid:
        steps = round(1 / args.grid)
        ps = [i / steps for i in range(steps + 1)]
    else:
        ps = args.p or [0.8]
    rows = []
    for p in ps:
        row = {"p": p, "probability": poly(p)}
        if other is not None:
            row["compare"] = other(p)
            row["gap"] = other(p) - row["probability"]
        rows.append(row)
    if args.format == "json":
        _emit(_dumps([{k: (f"{v:.10f}" if k != "p" else v) for k, v in r.items()} for r in rows]))
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.10f}" if k != "p" else f"{v:g}") for k, v in r.items()})
        _emit(buf.getvalue())
    else:
        lines = []
        for r in rows:
            text = f"p={r['p']:g}  P={r['probability']:.10f}"
            if other is not None:
                text += f"  compare={r['compare']:.10f}  gap={r['gap']:.10f}"
            lines.append(text)
        _emit("\n".join(lines) + "\n")
    return 0


def cmd_bounds(args) -> int:
    rep = compute_Dx(args.n, args.m, args.mG, args.deltaL)
    top = args.m - args.n
    if args.format == "json":
        doc = {
            "n": rep.n,
            "m": rep.m,
            "loop_cut": rep.loop_cut,
            "delta_l": rep.delta_l,
            "theta": rep.theta,
            "lemma3": {"delta_cap": rep.lemma3_delta_cap, "loop_cut_cap": rep.lemma3_loop_cut_cap},
            "lemma4_cap": str(rep.lemma4_cap.value),
            "lemma6_floors": {str(x): str(v) for x, v in rep.lemma6_floors.items()},
            "lemma7_floors": {str(x): str(v) for x, v in rep.lemma7_floors.items()},
            "D": [str(v) for v in rep.D],
            "flags": list(rep.flags),
        }
        _emit(_dumps(doc))
    elif args.format == "csv":
        lines = ["x,D_x"] + [f"{x},{rep.D[x]}" for x in range(1, top + 1)]
        _emit("\n".join(lines) + "\n")
    else:
        lines = [f"theta={rep.theta}"]
        lines += [f"lemma6 floor k_{x} >= {v}" for x, v in rep.lemma6_floors.items()]
        lines += [f"lemma7 floor k_{x} >= {v}" for x, v in rep.lemma7_floors.items()]
        lines.append("D_x: " + " ".join(str(rep.D[x]) for x in range(1, top + 1)))
        lines += [f"note: {f}" for f in rep.flags]
        _emit("\n".join(lines) + "\n")
    return 0


def cmd_simulate(args) -> int:
    g = _load_graph(args.file)
    result = simulate(g, TrialConfig(args.p, args.trials, args.seed, args.workers))
    doc = result.to_dict()
    if args.exact is not None:
        doc["exact"] = args.exact
        doc["z_score"] = compare_exact(result, args.exact)
    if args.format == "json":
        _emit(_dumps(doc))
    else:
        lines = [f"{'decoding probability':>22}  {'simulation':>10}"]
        exact = f"{args.exact:.10f}" if args.exact is not None else "-"
        lines.append(f"{exact:>22}  {result.estimate:>10.5f}")
        lines.append(f"successes={result.successes} trials={result.trials} "
                     f"std_error={result.std_error:.3g}")
        if args.exact is not None:
            lines.append(f"z={doc['z_score']:.3f}")
        _emit("\n".join(lines) + "\n")
    return 0


def cmd_report(args) -> int:
    bundle = build_report(
        args.n, args.k, args.r,
        p_values=args.p,
        trials=args.trials,
        seed=args.seed,
        delta_l=args.deltaL,
        workers=args.workers,
    )
    if args.format == "table":
        _emit(render_table(bundle), args.out)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scheme", *analysis.CSV_FIELDS])
        for e in bundle.entries:
            for row in analysis.census_rows(e.census, bundle.bounds):
                w.writerow([e.label, *row.values()])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_dumps(bundle.to_dict()), args.out)
    for d in bundle.discrepancies:
        print("differs from reference: " + json.dumps(d), file=sys.stderr)
    return 0


class _Parser(argparse.ArgumentParser):
    # usage mistakes are validation errors (1); status 2 is reserved for the cap
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wbangraph",
        description="Build XOR relay coding schemes and analyse their erasure robustness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p, choices=("json", "csv", "table"), default="json"):
        p.add_argument("--format", choices=choices, default=default)

    p = sub.add_parser("generate", help="write a coding scheme as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--mode", choices=("interleaved", "plain"), default="interleaved")
    p.add_argument("--L", type=int, help="loop count (interleaved mode)")
    p.add_argument("--out")
    fmt(p, ("json", "table"))
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("census", help="exact decodable-subgraph counts")
    p.add_argument("file", help="scheme or graph JSON")
    p.add_argument("--cap", type=int, default=analysis.DEFAULT_CAP)
    p.add_argument("--force", action="store_true", help="enumerate beyond the edge cap")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--bounds", action="store_true", help="add the D_x column")
    p.add_argument("--out")
    fmt(p, default="csv")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("prob", help="evaluate the decoding probability from a census")
    p.add_argument("file", help="census JSON")
    p.add_argument("--p", type=float, action="append")
    p.add_argument("--grid", type=float, help="evaluate on 0, step, ..., 1")
    p.add_argument("--compare", help="second census or bounds JSON; reports compare - P")
    fmt(p, default="table")
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("bounds", help="analytic upper bounds D_x")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mG", type=int, required=True)
    p.add_argument("--deltaL", type=int, required=True)
    fmt(p, default="table")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="Monte Carlo decoding probability")
    p.add_argument("file", help="scheme or graph JSON")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--exact", type=float)
    fmt(p, ("json", "table"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="census, bounds, probabilities and simulation for a shape")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--p", type=float, action="append")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per scheme (0 skips)")
    p.add_argument("--seed", type=int)
    p.add_argument("--deltaL", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    fmt(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SchemeError, GraphError, BoundError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
