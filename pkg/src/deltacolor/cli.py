"""Command-line harness: ``gen``, ``run``, ``verify`` and ``bench``.

Exit codes: 0 when every checked bound holds, 1 on a verification failure,
2 on a usage or configuration error. ``--config`` reads a JSON object whose
keys are the long option names (``"algo"``, ``"p"``, ``"max_rounds"``, ...);
flags given on the command line win. The default output directory is taken
from ``DELTACOLOR_OUT`` (falling back to ``./deltacolor-out``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .coloring import Coloring
from .defective import defective_color, refine
from .delta import (DEFAULT_EPS, TRADEOFF_K, as_fraction, color_delta_plus_one, floor_power, mis_from_coloring,
                    tradeoff_color)
from .engine import BITS_CONSTANT, trace_to_csv
from .errors import DeltaColorError, GraphFormatError, GraphInvariantError, InvalidParameters
from .graphcore import Graph, GraphSpec, generate, load_graph, save_graph
from .palette import linial_coloring
from .reduce import kw_reduce
from .verify import BoundReport, bound_formulas, check_defect, check_legal, check_mis

ALGORITHMS = ("linial", "refine", "defective", "kw", "delta", "tradeoff", "mis")
BENCH_COLUMNS = ("n", "delta", "algorithm", "params", "rounds", "palette", "defect", "messages", "max_bits", "pass")
OUT_ENV = "DELTACOLOR_OUT"


class UsageError(DeltaColorError):
    pass


def resolve_graph(source: str, seed: int | None = None) -> Graph:
    """A path to an edge-list file, or a generator spec such as ``regular:n=256,d=8,seed=4``."""
    path = Path(source)
    if path.is_file():
        return load_graph(path.read_bytes())
    if ":" not in source:
        raise UsageError(f"{source!r} is neither a file nor a generator spec 'kind:key=value,...'")
    spec = GraphSpec.parse(source)
    if seed is not None:
        spec = GraphSpec(spec.kind, spec.n, spec.p, spec.d, spec.cols, seed)
    return generate(spec)


def _bits_bound(n: int) -> int:
    return BITS_CONSTANT * max(1, math.ceil(math.log2(max(n, 2))))


def _measured(res, col: Coloring | None, graph: Graph, extra=None) -> dict:
    m = {"rounds": res.rounds_used, "messages": res.messages_sent, "max_bits": res.max_message_bits}
    if col is not None:
        defect, used = check_defect(graph, col)
        m.update(palette=used, defect=defect, violations=len(check_legal(graph, col)))
    m.update(extra or {})
    return m


def execute(graph: Graph, algo: str, params: dict) -> dict:
    """Run one algorithm and attach its BoundReport.

    Returns a dict with ``report`` and ``run`` plus ``coloring`` or ``members``.
    """
    backend, order, trace = params.get("backend"), params.get("order"), bool(params.get("trace"))
    max_rounds = params.get("max_rounds")
    eps = as_fraction(params.get("eps") or DEFAULT_EPS)
    delta, n = graph.max_degree, graph.n
    common = {"n": n, "delta": delta}
    if algo not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")

    if algo == "linial":
        col, res = linial_coloring(graph, backend=backend, order=order, trace=trace)
        c = col.meta["c"]
        bounds = bound_formulas("linial", {**common, "c": c})
        report = BoundReport(algo, common, _measured(res, col, graph), bounds, {"c": c})
        out = {"coloring": col}
    elif algo in ("refine", "kw"):
        base, _ = linial_coloring(graph, backend=backend)
        if algo == "refine":
            p = int(params.get("p") or max(1, math.isqrt(max(delta, 1))))
            col, res = refine(graph, base.colors, p, m=0, backend=backend, order=order, trace=trace)
            bounds = bound_formulas("refine", {"p": p, "chi": int(base.colors.max()) if n else 0, "m": 0,
                                               "delta": col.meta["sub_delta"]})
            prm = {**common, "p": p}
        else:
            col, res = kw_reduce(graph, base, backend=backend, order=order, trace=trace)
            bounds = bound_formulas("kw", {"m": base.palette, "delta": delta})
            prm = {**common, "m": base.palette}
        report = BoundReport(algo, prm, _measured(res, col, graph), bounds)
        out = {"coloring": col}
    elif algo == "defective":
        p = int(params.get("p") or max(1, int(math.log2(max(delta, 1)))))
        q = int(params.get("q") or max(floor_power(delta, eps), p * p + 1))
        col, res = defective_color(graph, p, q, backend=backend, order=order, trace=trace)
        iters = col.meta["iterations"]
        bounds = bound_formulas("defective", {"p": p, "q": q, "chi0": col.meta["chi0"], "delta": delta,
                                              "iterations": iters})
        prm = {**common, "p": p, "q": q}
        report = BoundReport(algo, prm, _measured(res, col, graph, {"iterations": iters}), bounds)
        out = {"coloring": col}
    elif algo == "delta":
        depth = params.get("depth")
        col, res, report = color_delta_plus_one(graph, eps=eps, depth=depth, backend=backend, order=order,
                                                trace=trace, max_rounds=max_rounds)
        out = {"coloring": col}
    elif algo == "tradeoff":
        if params.get("t") is None:
            raise UsageError("tradeoff needs --t")
        t = int(params["t"])
        col, res = tradeoff_color(graph, t, eps=eps, backend=backend, order=order, trace=trace,
                                  max_rounds=max_rounds)
        bounds = bound_formulas("tradeoff", {"delta": delta, "t": t, "K": TRADEOFF_K})
        report = BoundReport(algo, {**common, "t": t, "eps": str(eps)}, _measured(res, col, graph), bounds,
                             {"K_measured": col.meta["K"], "K": TRADEOFF_K, "branch": col.meta["branch"]})
        out = {"coloring": col}
    else:
        base, _, _ = color_delta_plus_one(graph, eps=eps, backend=backend)
        mis = mis_from_coloring(graph, base, backend=backend, order=order, trace=trace)
        res = mis.run
        bounds = bound_formulas("mis", {"palette": base.palette})
        measured = _measured(res, None, graph, {"violations": len(check_mis(graph, mis.members)),
                                                "size": int(mis.members.sum())})
        report = BoundReport(algo, {**common, "palette": base.palette}, measured, bounds)
        out = {"members": mis.members}

    report.bounds.setdefault("max_bits", (_bits_bound(n), f"{BITS_CONSTANT}*ceil(log2 n)"))
    report.measured.setdefault("max_bits", res.max_message_bits)
    if max_rounds is not None:
        report.bounds.setdefault("rounds_cap", (int(max_rounds), "max_rounds"))
        report.measured.setdefault("rounds_cap", res.rounds_used)
    out.update(report=report, run=res)
    return out


def _output_text(result: dict) -> str:
    if "coloring" in result:
        return result["coloring"].to_csv()
    rows = ["vertex,member"] + [f"{v},{int(m)}" for v, m in enumerate(result["members"].tolist(), start=1)]
    return "\n".join(rows) + "\n"


# --------------------------------------------------------------------------


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def _merged(args, keys) -> dict:
    cfg = _load_config(getattr(args, "config", None))
    out = {}
    for k in keys:
        val = getattr(args, k, None)
        out[k] = val if val is not None else cfg.get(k)
    return out


def _out_dir(value: str | None) -> Path:
    return Path(value or os.environ.get(OUT_ENV) or "deltacolor-out")


def cmd_gen(args) -> int:
    graph = resolve_graph(args.graph, args.seed)
    data = save_graph(graph)
    if args.out in (None, "-"):
        sys.stdout.write(data.decode("ascii"))
    else:
        try:
            Path(args.out).write_bytes(data)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}") from None
    return 0


RUN_KEYS = ("graph", "algo", "p", "q", "t", "eps", "depth", "seed", "trace", "max_rounds", "out", "order",
            "backend")


def cmd_run(args) -> int:
    cfg = _merged(args, RUN_KEYS)
    if not cfg["graph"] or not cfg["algo"]:
        raise UsageError("run needs --graph and --algo (on the command line or in --config)")
    graph = resolve_graph(cfg["graph"], cfg["seed"])
    result = execute(graph, cfg["algo"], cfg)
    report: BoundReport = result["report"]
    out = _out_dir(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.json").write_text(report.to_json() + "\n")
    (out / ("coloring.csv" if "coloring" in result else "mis.csv")).write_text(_output_text(result))
    if cfg["trace"]:
        (out / "trace.csv").write_text(trace_to_csv(result["run"].trace or []))
    print(report.to_json())
    return 0 if report.passed else 1


def cmd_verify(args) -> int:
    graph = resolve_graph(args.graph, args.seed)
    text = Path(args.coloring).read_text()
    if text.startswith("vertex,member"):
        members = [int(line.split(",")[1]) == 1 for line in text.strip().splitlines()[1:]]
        bad = check_mis(graph, np.array(members, dtype=bool))
        summary = {"kind": "mis", "violations": [list(x) for x in bad]}
    else:
        col = Coloring.from_csv(text)
        bad = check_legal(graph, col)
        defect, used = check_defect(graph, col)
        summary = {"kind": "coloring", "violations": [list(x) for x in bad], "defect": defect, "palette": used,
                   "delta": graph.max_degree}
        if args.defect is not None:
            bad = [("defect", defect)] if defect > args.defect else []
        if args.max_colors is not None and used > args.max_colors:
            bad = bad + [("palette", used)]
    summary["passed"] = not bad
    print(json.dumps(summary, sort_keys=True))
    return 0 if not bad else 1


def _param_text(params: dict) -> str:
    return ";".join(f"{k}={params[k]}" for k in sorted(params) if params[k] is not None)


def bench_rows(cells: list[dict]) -> list[dict]:
    rows = []
    for cell in cells:
        params = {k: v for k, v in cell.get("params", {}).items()}
        row = {"algorithm": cell["algo"], "params": _param_text(params), "graph": cell["graph"]}
        try:
            graph = resolve_graph(cell["graph"])
            result = execute(graph, cell["algo"], params)
            rep = result["report"]
            m = rep.measured
            row.update(n=graph.n, delta=graph.max_degree, rounds=m["rounds"], palette=m.get("palette", ""),
                       defect=m.get("defect", ""), messages=m["messages"], max_bits=m["max_bits"],
                       **{"pass": int(rep.passed)})
        except DeltaColorError as exc:
            row.update(n="", delta="", rounds="", palette="", defect="", messages="", max_bits="",
                       **{"pass": f"error: {exc}"})
        rows.append(row)
    rows.sort(key=lambda r: (r["graph"], r["algorithm"], r["params"]))
    return rows


def bench_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def cmd_bench(args) -> int:
    cells = []
    if args.matrix:
        try:
            spec = json.loads(Path(args.matrix).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read matrix {args.matrix}: {exc}") from None
        cells = spec.get("cells", []) if isinstance(spec, dict) else spec
    params = {k: getattr(args, k) for k in ("p", "q", "t", "eps", "depth") if getattr(args, k) is not None}
    for g in args.graph or []:
        for a in args.algo or []:
            cells.append({"graph": g, "algo": a, "params": params})
    text = bench_csv(bench_rows(cells))
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deltacolor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated graph as a canonical edge list")
    g.add_argument("--graph", required=True, help="generator spec, e.g. regular:n=16,d=3,seed=1")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output file (default: stdout)")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run one algorithm and check its bounds")
    r.add_argument("--graph", help="edge-list file or generator spec")
    r.add_argument("--algo", choices=ALGORITHMS)
    r.add_argument("--p", type=int)
    r.add_argument("--q", type=int)
    r.add_argument("--t", type=int)
    r.add_argument("--eps", type=float)
    r.add_argument("--depth", type=int)
    r.add_argument("--seed", type=int, help="override the seed of a generator spec")
    r.add_argument("--trace", action="store_true", default=None)
    r.add_argument("--max-rounds", dest="max_rounds", type=int)
    r.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./deltacolor-out)")
    r.add_argument("--order", choices=("natural", "reverse"), help="within-round vertex order")
    r.add_argument("--backend", choices=("numba", "numpy"))
    r.add_argument("--config", help="JSON file with defaults for the options above")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="check a coloring or MIS CSV against a graph")
    v.add_argument("--graph", required=True)
    v.add_argument("--seed", type=int)
    v.add_argument("--coloring", required=True, help="CSV with header vertex,color or vertex,member")
    v.add_argument("--max-colors", dest="max_colors", type=int)
    v.add_argument("--defect", type=int, help="accept this defect instead of requiring a legal coloring")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run a matrix of cells and write one CSV row per cell")
    b.add_argument("--matrix", help='JSON: {"cells": [{"graph": ..., "algo": ..., "params": {...}}]}')
    b.add_argument("--graph", action="append")
    b.add_argument("--algo", action="append", choices=ALGORITHMS)
    b.add_argument("--p", type=int)
    b.add_argument("--q", type=int)
    b.add_argument("--t", type=int)
    b.add_argument("--eps", type=float)
    b.add_argument("--depth", type=int)
    b.add_argument("--out", help="CSV path (default: stdout)")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidParameters, GraphFormatError, GraphInvariantError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    except DeltaColorError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
