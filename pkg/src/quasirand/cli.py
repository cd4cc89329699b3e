"""``quasirand`` command line.

Exit codes: 0 success, 2 bad arguments, 3 precondition/parse errors,
4 construction failures.  Errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, catalog
from .errors import PreconditionError, QuasirandError
from .graph import Graph, as_prob, nearest_integer_distance, sample_gnp
from .reporting import dumps, jsonable, write_json

SWEEP_COLUMNS = [
    "n", "p", "k", "seed", "mode", "status", "u_k", "u_k_scaled", "D",
    "S_K2", "S_P2", "S_K3", "phase2_steps", "wall_time",
]


def _prob(text: str):
    try:
        return as_prob(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _prob_list(text: str) -> list:
    return [_prob(x) for x in text.split(",") if x]


def _pair(text: str) -> tuple[int, int]:
    vals = _int_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("expected a,b")
    return vals[0], vals[1]


def _emit(obj, report: str | None) -> None:
    if report:
        write_json(obj, report)
    print(dumps(obj))


# ------------------------------------------------------------------ commands


def cmd_construct(args) -> int:
    from .flip import construct
    from .graphio import write_graph

    rep = construct(args.n, args.p, args.k, args.seed, args.eps, args.cap_c, args.retries, floor=args.floor)
    if args.out:
        write_graph(rep.graph, args.out)
    out = rep.to_dict()
    out["parameters"] = jsonable({"n": args.n, "p": args.p, "k": args.k, "seed": args.seed, "eps": args.eps,
                                  "C": args.cap_c, "retries": args.retries, "floor": args.floor})
    out["output_graph"] = args.out
    _emit(out, args.report)
    return 0


def cmd_measure(args) -> int:
    from .census import deviation
    from .graphio import read_graph

    G = read_graph(args.input)
    dev = deviation(G, args.p, args.k)
    out = {"input": args.input, **dev.to_dict()}
    _emit(out, args.report)
    return 0


def cmd_identities(args) -> int:
    from .identities import decomposition_suite, quadratic_suite, stepup_suite

    results = []
    if "decomposition" in args.suites:
        results.append(decomposition_suite(args.n, [str(p) for p in args.p]))
    if "quadratic" in args.suites:
        results.append(quadratic_suite(args.n, args.quadratic_p))
    if "stepup" in args.suites:
        results.append(stepup_suite(args.count, args.n_max, args.seed))
    out = {"ok": all(r["ok"] for r in results), "suites": results}
    _emit(out, args.report)
    return 0


def cmd_schatten(args) -> int:
    from .graphio import read_graph
    from .schatten import bipartite_formula, bipartite_norm, norm_constructions, schatten_formula, schatten_norm

    if args.construction in ("empty", "looprandom") and args.n is None:
        raise PreconditionError("--n is required for generated constructions")
    if args.construction == "looprandom" and args.seed is None:
        raise PreconditionError("--seed is required for the looprandom construction")
    if args.construction == "file":
        if not args.input:
            raise PreconditionError("--in is required with --construction file")
        G = read_graph(args.input)
    elif args.construction == "empty":
        G = Graph.empty(args.n, loops=True)
    else:
        G = sample_gnp(args.n, args.p, seed=args.seed, loops=True)
    params = {"construction": args.construction, "n": G.n, "p": args.p, "seed": args.seed, "input": args.input}
    if args.bipartite:
        a, b = args.bipartite
        out = {**params, "bipartite": [a, b], "norm": bipartite_norm(G, args.p, a, b),
               "formula": bipartite_formula(G.n, args.p, a, b)}
    else:
        out = {**params, "s": args.s, "norm": schatten_norm(G, args.p, args.s),
               "formula": schatten_formula(G.n, args.p, args.s)}
    if args.compare and args.construction != "file":
        out["constructions"] = norm_constructions(
            G.n, args.p, args.s, tuple(args.bipartite) if args.bipartite else None, args.seed or 0
        )
    _emit(out, args.report)
    return 0


def cmd_oracle(args) -> int:
    from . import oracle

    if args.oracle_cmd == "min-uk":
        out = oracle.minimize_u_k(args.n, args.p, args.k).to_dict()
    elif args.oracle_cmd == "min-schatten":
        out = oracle.minimize_schatten(args.n, args.p, args.s).to_dict()
    else:
        hits = oracle.proportional_search(args.p, 3, args.n_max)
        out = {"p": args.p, "k": 3, "n_max": args.n_max,
               "orders_checked": {str(p): oracle.proportional_orders(p, args.n_max) for p in args.p},
               "count": len(hits), "graphs": [h.to_dict() for h in hits]}
    _emit(out, args.report)
    return 0


def _sweep_cell(cell: dict) -> dict:
    from .census import deviation
    from .flip import construct

    n, p, k, seed, mode = cell["n"], cell["p"], cell["k"], cell["seed"], cell["mode"]
    row = {c: "" for c in SWEEP_COLUMNS}
    row.update(n=n, p=jsonable(p), k=k, seed=seed, mode=mode, D=jsonable(nearest_integer_distance(n, p)))
    t0 = time.perf_counter()
    try:
        if mode == "construct":
            rep = construct(n, p, k, seed, cell["eps"], cell["C"], cell["retries"])
            u, S, steps = rep.u_k, rep.S_after, rep.phase2_steps
        else:
            from .signed import signed_stats

            G = sample_gnp(n, p, seed=seed)
            u = deviation(G, p, k).u if k <= 4 else None
            S, steps = signed_stats(G, p, 3), ""
        row["status"] = "ok"
        if u is not None:
            row["u_k"] = float(u)
            row["u_k_scaled"] = float(u) / n ** (k - 2)
        for name in ("K2", "P2", "K3"):
            v = S.get(catalog.get(name))
            row[f"S_{name}"] = "" if v is None else float(v)
        row["phase2_steps"] = steps
    except QuasirandError as exc:
        row["status"] = type(exc).__name__
    row["wall_time"] = round(time.perf_counter() - t0, 3)
    return row


def _workers(cells: int) -> int:
    cap = os.environ.get("QUASIRAND_THREADS")
    limit = int(cap) if cap and cap.isdigit() and int(cap) > 0 else (os.cpu_count() or 1)
    return max(1, min(cells, limit))


def cmd_sweep(args) -> int:
    seeds = args.seeds if len(args.seeds) > 1 else list(range(1, args.seeds[0] + 1))
    cells = [
        {"n": n, "p": p, "k": args.k, "seed": s, "mode": args.mode,
         "eps": args.eps, "C": args.cap_c, "retries": args.retries}
        for n in args.n for p in args.p for s in seeds
    ]
    workers = _workers(len(cells))
    if workers == 1:
        rows = [_sweep_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        path = Path(args.out)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(buf.getvalue())
        os.replace(tmp, path)
    else:
        sys.stdout.write(buf.getvalue())
    return 0


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    from .flip import DEFAULT_C, DEFAULT_EPS, DEFAULT_RETRIES, REGIME_FLOOR

    ap = argparse.ArgumentParser(prog="quasirand", description="Quasirandom graph toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def tunables(sp):
        sp.add_argument("--eps", type=float, default=DEFAULT_EPS)
        sp.add_argument("--cap-c", type=float, default=DEFAULT_C, help="reservoir constant C")
        sp.add_argument("--retries", type=int, default=DEFAULT_RETRIES)

    c = sub.add_parser("construct", help="build a graph with small u_k by sampling and repair")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--p", type=_prob, required=True)
    c.add_argument("--k", type=int, default=4)
    c.add_argument("--seed", type=int, required=True)
    tunables(c)
    c.add_argument("--floor", type=float, default=REGIME_FLOOR, help="minimum p(1-p)sqrt(n)")
    c.add_argument("--out", help="graph6 output path")
    c.add_argument("--report", help="JSON report path")
    c.set_defaults(func=cmd_construct)

    m = sub.add_parser("measure", help="u_k(G, p) of a graph file")
    m.add_argument("--in", dest="input", required=True)
    m.add_argument("--p", type=_prob, required=True)
    m.add_argument("--k", type=int, default=4)
    m.add_argument("--report")
    m.set_defaults(func=cmd_measure)

    i = sub.add_parser("identities", help="run the exact identity suites")
    i.add_argument("--suites", type=lambda s: s.split(","), default=["decomposition", "quadratic", "stepup"])
    i.add_argument("--n", type=int, default=5)
    i.add_argument("--p", type=_prob_list, default=_prob_list("1/3,1/2,2/5"))
    i.add_argument("--quadratic-p", type=_prob, default=_prob("2/5"))
    i.add_argument("--count", type=int, default=500)
    i.add_argument("--n-max", type=int, default=12)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--report")
    i.set_defaults(func=cmd_identities)

    s = sub.add_parser("schatten", help="Schatten or K_{a,b} norm of G - p")
    s.add_argument("--n", type=int)
    s.add_argument("--p", type=_prob, required=True)
    s.add_argument("--s", type=int, default=4)
    s.add_argument("--construction", choices=["empty", "looprandom", "file"], default="empty")
    s.add_argument("--in", dest="input")
    s.add_argument("--bipartite", type=_pair)
    s.add_argument("--seed", type=int)
    s.add_argument("--compare", action="store_true", help="also report both constructions")
    s.add_argument("--report")
    s.set_defaults(func=cmd_schatten)

    o = sub.add_parser("oracle", help="exhaustive ground truth for tiny n")
    osub = o.add_subparsers(dest="oracle_cmd", required=True)
    o1 = osub.add_parser("min-uk")
    o1.add_argument("--n", type=int, required=True)
    o1.add_argument("--p", type=_prob, required=True)
    o1.add_argument("--k", type=int, required=True)
    o2 = osub.add_parser("min-schatten")
    o2.add_argument("--n", type=int, required=True)
    o2.add_argument("--p", type=_prob, required=True)
    o2.add_argument("--s", type=int, default=4)
    o3 = osub.add_parser("proportional")
    o3.add_argument("--p", type=_prob_list, required=True)
    o3.add_argument("--n-max", type=int, default=9)
    for sp in (o1, o2, o3):
        sp.add_argument("--report")
    o.set_defaults(func=cmd_oracle)

    w = sub.add_parser("sweep", help="construct or measure over an (n, p, seed) grid, CSV out")
    w.add_argument("--n", type=_int_list, required=True)
    w.add_argument("--p", type=_prob_list, required=True)
    w.add_argument("--k", type=int, default=4)
    w.add_argument("--seeds", type=_int_list, required=True,
                   help="a count N (seeds 1..N) or an explicit comma list")
    w.add_argument("--mode", choices=["construct", "measure"], default="construct")
    tunables(w)
    w.add_argument("--out", help="CSV path (default stdout)")
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QuasirandError as exc:
        print(json.dumps(jsonable(exc.to_dict())), file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
