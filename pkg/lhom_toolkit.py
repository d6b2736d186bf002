#!/usr/bin/env python3
"""
lhom_toolkit.py

Command-line surface for list homomorphisms and binary CSPs: solve instances,
compute target invariants, build layouts, emit CNF-SAT reductions, verify
certificates and benchmark the engines on a corpus.

Instances are either list-instance text files (graph block + `target <file>`
+ lists) or BCSP JSON files (`*.json`).

Supports .env defaults (optional, see lib/config.py):
- LHOM_CUTWIDTH_CAP, LHOM_FVS_CAP, LHOM_CA_CAP
- LHOM_NODE_BUDGET, LHOM_SYNTH_DEPTH, LHOM_SYNTH_STATES, LHOM_WALK_MAX_LEN
- LHOM_PRIME, LHOM_BENCH_TIMEOUT
- LHOM_LOG_LEVEL (default: WARNING), DEBUG (default: false)

Exit codes: 0 ok, 1 UNSAT (solve --decide), 2 usage or input error, 3 check failure.

Usage examples
--------------
# 1) Solve with the representative-set engine on an exact layout
python lhom_toolkit.py solve instance.txt --engine repset --layout exact --stats json

# 2) Starred invariants of a target, as JSON
python lhom_toolkit.py invariants c6.txt --kind all --star

# 3) Layout and feedback vertex set of a graph
python lhom_toolkit.py layout g.txt --greedy --fvs

# 4) Reduce a DIMACS formula to LHom(C6) with a cutwidth certificate
python lhom_toolkit.py reduce f.cnf --target c6.txt --mode ctw --g 6 --out red.txt --cert red.json

# 5) Re-check a certificate and cross-check engines
python lhom_toolkit.py verify red.txt --cert red.json --engines fvs,brute

# 6) Benchmark a corpus written by seed_random_corpus.py
python lhom_toolkit.py bench corpus --engines brute,dp,repset --csv bench.csv
"""

from __future__ import annotations

import argparse
import json
import logging
import multiprocessing
import queue
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import pandas as pd

from lib import config
from lib.errors import LhomError
from lib.formats import (
    read_bcsp,
    read_certificate,
    read_cnf,
    read_graph,
    read_layout,
    read_list_instance,
    to_dot,
    write_certificate,
    write_layout,
    write_list_instance,
)
from lib.graphs import Graph, cycle_graph, is_bipartite
from lib.instances import BcspInstance, ListInstance, lhom_to_bcsp
from lib.invariants import (
    KINDS,
    InvariantReport,
    invariant_gamma,
    invariant_i,
    invariant_mim,
    invariant_report_problem,
    invariant_star,
    is_complement_circular_arc,
    is_undecomposable,
)
from lib.layouts import FeedbackSet, LinearLayout, cutwidth_of_order, exact_fvs, is_feedback_set
from lib.reductions import formula_satisfiable, random_cnf, reduce_sat_ctw, reduce_sat_fvs, solve_and_decode
from lib.solvers import ENGINES, SolveResult, choose_layout, run_bcsp, solve_lhom
from lib.walks import find_corner_triple

logger = logging.getLogger("lhom_toolkit")

EXIT_OK, EXIT_UNSAT, EXIT_INPUT, EXIT_CHECK = 0, 1, 2, 3

Instance = Union[ListInstance, BcspInstance]

BENCH_COLUMNS = [
    "file", "kind", "engine", "status", "satisfiable", "seconds",
    "n", "width", "k", "max_table", "max_rank", "table_bound", "agrees", "error",
]


# ==========================================================
# Helpers
# ==========================================================

def _load_instance(path: str) -> Instance:
    if not Path(path).exists():
        raise SystemExit(f'Instance not found: "{path}"')
    if path.endswith(".json"):
        return read_bcsp(path)
    return read_list_instance(path)


def _instance_graph(inst: Instance) -> Graph:
    return inst.g if isinstance(inst, ListInstance) else inst.primal_graph()


def _layout_spec(inst: Instance, choice: str) -> Union[str, LinearLayout]:
    if choice in ("exact", "greedy"):
        return choice
    return read_layout(choice, _instance_graph(inst))


def _run_engine(inst: Instance, engine: str, layout: Union[str, LinearLayout] = "exact", fvs: Optional[Sequence[int]] = None) -> SolveResult:
    """One engine on either instance kind; list-instance assignments map G to H."""
    if isinstance(inst, BcspInstance):
        return run_bcsp(inst, "repset" if engine == "clean" else engine, layout, fvs)
    if engine == "fvs" and fvs is not None:
        res = run_bcsp(lhom_to_bcsp(inst), "fvs", fvs=fvs)
        if res.assignment is not None:
            res.assignment = tuple(a - 1 for a in res.assignment)
        return res
    return solve_lhom(inst, engine, layout)


def _assignment_problem(inst: Instance, assignment: Sequence[int]) -> Optional[str]:
    if isinstance(inst, BcspInstance):
        return inst.violated(assignment)
    return None if inst.verify(assignment) else "not a list homomorphism"


def _dump(doc: Any) -> str:
    return json.dumps(doc, indent=2, default=str)


def _engine_list(raw: str) -> List[str]:
    engines = [e.strip() for e in raw.split(",") if e.strip()]
    unknown = [e for e in engines if e not in ENGINES]
    if unknown:
        raise SystemExit(f"unknown engine(s): {', '.join(unknown)} (choose from {', '.join(ENGINES)})")
    return engines


# ==========================================================
# solve
# ==========================================================

def cmd_solve(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    res = _run_engine(inst, args.engine, _layout_spec(inst, args.layout))
    if args.stats == "json":
        print(_dump({"satisfiable": res.satisfiable, "stats": res.stats}))
    if res.satisfiable:
        if args.stats != "json":
            print("SAT")
            if isinstance(inst, ListInstance):
                for v, x in enumerate(res.assignment):
                    print(f"{inst.g.label(v)} -> {inst.h.label(x)}")
            else:
                for name, a in zip(inst.variables, res.assignment):
                    print(f"{name} = {a}")
        return EXIT_OK
    if args.stats != "json":
        print("UNSAT")
    return EXIT_UNSAT if args.decide else EXIT_OK


# ==========================================================
# invariants
# ==========================================================

def _report_doc(report: InvariantReport) -> Dict[str, Any]:
    g = report.graph
    doc: Dict[str, Any] = {"value": report.value}
    if g is not None:
        doc["vertices"] = [g.label(v) for v in sorted(report.vertices)]
        doc["sets"] = [[g.label(v) for v in sorted(s)] for s in report.sets]
    doc["verified"] = invariant_report_problem(report) or "ok"
    return doc


def cmd_invariants(args: argparse.Namespace) -> int:
    if not Path(args.target).exists():
        raise SystemExit(f'Target not found: "{args.target}"')
    h = read_graph(args.target)
    kinds = KINDS if args.kind == "all" else (args.kind,)
    base = {"i": invariant_i, "mim": invariant_mim, "gamma": invariant_gamma}
    doc: Dict[str, Any] = {"target": args.target, "n": h.n}
    bipartite = not h.loops and is_bipartite(h)
    if bipartite:
        doc["undecomposable"] = is_undecomposable(h)
        doc["complement_circular_arc"] = is_complement_circular_arc(h, args.ca_cap).answer
    for kind in kinds:
        if args.star:
            doc[kind + "_star"] = _report_doc(invariant_star(h, kind, args.ca_cap))
        elif bipartite:
            doc[kind] = _report_doc(base[kind](h))
        else:
            raise SystemExit(f"{kind} needs a bipartite target without loops; use --star")
    print(_dump(doc))
    return EXIT_OK


# ==========================================================
# layout
# ==========================================================

def cmd_layout(args: argparse.Namespace) -> int:
    if not Path(args.graph).exists():
        raise SystemExit(f'Graph not found: "{args.graph}"')
    g = read_graph(args.graph)
    layout = choose_layout(g, "greedy" if args.greedy else "exact")
    doc: Dict[str, Any] = {"order": [g.label(v) for v in layout.order], "width": layout.width}
    if args.out:
        write_layout(layout, g, args.out)
    if args.fvs:
        f = exact_fvs(g)
        doc["fvs"] = [g.label(v) for v in sorted(f.vertices)]
        if args.cert:
            write_certificate(f, g, args.cert)
    elif args.cert:
        write_certificate(layout, g, args.cert)
    print(_dump(doc))
    return EXIT_OK


# ==========================================================
# reduce
# ==========================================================

def cmd_reduce(args: argparse.Namespace) -> int:
    if args.random:
        n, m = args.random
        cnf = random_cnf(n, m, args.width, args.seed)
    elif args.cnf:
        if not Path(args.cnf).exists():
            raise SystemExit(f'CNF not found: "{args.cnf}"')
        cnf = read_cnf(args.cnf)
    else:
        raise SystemExit("give a DIMACS file or --random N M")

    if not Path(args.target).exists():
        raise SystemExit(f'Target not found: "{args.target}"')
    h = read_graph(args.target)
    triple = find_corner_triple(h)
    if args.colours:
        s = [h.index(lab.strip()) for lab in args.colours.split(",")]
    elif args.mode == "fvs":
        s = sorted(triple.core)
    else:
        s = sorted((triple.alpha, triple.beta))

    if args.mode == "fvs":
        out = reduce_sat_fvs(cnf, h, triple, s, args.p)
    else:
        out = reduce_sat_ctw(cnf, h, triple, s, args.p, args.g)

    write_list_instance(out.instance, args.out, args.target)
    g = out.instance.g
    if args.cert:
        write_certificate(out.certificate, g, args.cert)
    if args.dot:
        Path(args.dot).write_text(to_dot(g, out.instance.lists, h, Path(args.out).stem) + "\n", encoding="utf-8")

    doc: Dict[str, Any] = {
        "mode": out.mode,
        "vertices": g.n,
        "edges": len(g.edges),
        "colours": [h.label(c) for c in out.colours],
        "k": out.params.k,
        "p": out.params.p,
        "t": out.params.t,
        "capacity": out.params.capacity,
        "certificate": "fvs" if isinstance(out.certificate, FeedbackSet) else "layout",
    }
    if isinstance(out.certificate, LinearLayout):
        doc["width"] = out.certificate.width
        doc["width_constant"] = out.width_constant
    else:
        doc["fvs_size"] = len(out.certificate.vertices)
    print(_dump(doc))
    return EXIT_OK


# ==========================================================
# verify
# ==========================================================

def _certificate_problem(inst: Instance, cert: Union[FeedbackSet, LinearLayout]) -> Optional[str]:
    g = _instance_graph(inst)
    if isinstance(cert, FeedbackSet):
        return None if is_feedback_set(g, cert.vertices) else "certificate: not a feedback vertex set"
    if sorted(cert.order) != list(range(g.n)):
        return "certificate: layout is not a permutation"
    actual = cutwidth_of_order(g, cert.order)
    if actual != cert.width:
        return f"width mismatch: declared {cert.width}, recomputed {actual}"
    return None


def _cross_check(inst: Instance, engines: Sequence[str], cert: Optional[Union[FeedbackSet, LinearLayout]]) -> Optional[str]:
    layout: Union[str, LinearLayout] = cert if isinstance(cert, LinearLayout) else "exact"
    fvs = sorted(cert.vertices) if isinstance(cert, FeedbackSet) else None
    answers: Dict[str, bool] = {}
    for engine in engines:
        res = _run_engine(inst, engine, layout, fvs)
        if res.satisfiable:
            problem = _assignment_problem(inst, res.assignment)
            if problem is not None:
                return f"invalid assignment from {engine}: {problem}"
        answers[engine] = res.satisfiable
        logger.info("verify: %s -> %s", engine, "SAT" if res.satisfiable else "UNSAT")
    if len(set(answers.values())) > 1:
        detail = ", ".join(f"{e}={'SAT' if a else 'UNSAT'}" for e, a in answers.items())
        return f"engine divergence: {detail}"
    return None


def cmd_verify(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance)
    checks: List[str] = ["instance"]
    cert = None
    if args.cert:
        cert = read_certificate(args.cert, _instance_graph(inst))
        problem = _certificate_problem(inst, cert)
        if problem is not None:
            print(f"FAIL {problem}")
            return EXIT_CHECK
        checks.append("certificate")
    if args.engines:
        engines = _engine_list(args.engines)
        n = _instance_graph(inst).n
        if n > args.cap:
            logger.warning("verify: %d vertices exceed cap %d; engine cross-check skipped", n, args.cap)
            checks.append(f"engines skipped ({n} vertices > cap {args.cap})")
        else:
            problem = _cross_check(inst, engines, cert)
            if problem is not None:
                print(f"FAIL {problem}")
                return EXIT_CHECK
            checks.append("engines")
    print("OK " + ", ".join(checks))
    return EXIT_OK


# ==========================================================
# bench
# ==========================================================

def _bench_job(path: str, engine: str, out: Any) -> None:
    """Runs in a child process; puts one row dict on `out`."""
    row: Dict[str, Any] = {"file": Path(path).name, "engine": engine}
    try:
        start = time.perf_counter()
        if path.endswith(".cnf"):
            cnf = read_cnf(path)
            h = cycle_graph(6)
            triple = find_corner_triple(h)
            red = reduce_sat_fvs(cnf, h, triple, sorted(triple.core), 1)
            res, _ = solve_and_decode(red)
            row.update(kind="cnf", n=red.instance.g.n, agrees=res.satisfiable == formula_satisfiable(cnf))
        else:
            b = read_bcsp(path)
            res = run_bcsp(b, engine)
            row.update(kind="bcsp", n=b.n)
        row["seconds"] = round(time.perf_counter() - start, 6)
        row.update(status="ok", satisfiable=res.satisfiable)
        for key in ("width", "k", "max_table", "max_rank"):
            if key in res.stats:
                row[key] = res.stats[key]
        if "k" in res.stats and "width" in res.stats:
            row["table_bound"] = 2 ** (res.stats["k"] * res.stats["width"])
    except LhomError as e:
        row.update(status="error", error=str(e))
    except Exception as e:
        logger.exception("bench: %s with %s crashed", path, engine)
        row.update(status="error", error=f"{type(e).__name__}: {e}")
    out.put(row)


def _bench_one(ctx: Any, path: Path, engine: str, timeout: float, job: Callable[..., None] = _bench_job) -> Dict[str, Any]:
    """One child run; a child that dies without a row is `crashed`, one past the deadline `timeout`."""
    q = ctx.Queue()
    proc = ctx.Process(target=job, args=(str(path), engine, q))
    proc.start()
    deadline = time.monotonic() + timeout
    row: Optional[Dict[str, Any]] = None
    while row is None:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            proc.terminate()
            row = {"file": path.name, "engine": engine, "status": "timeout", "seconds": float(timeout)}
            logger.warning("bench: %s with %s timed out after %ss", path.name, engine, timeout)
            break
        try:
            row = q.get(timeout=min(0.2, remaining))
        except queue.Empty:
            if proc.exitcode is not None:
                try:
                    row = q.get(timeout=0.2)
                except queue.Empty:
                    row = {"file": path.name, "engine": engine, "status": "crashed", "error": f"exit code {proc.exitcode}"}
                    logger.warning("bench: %s with %s exited with code %s", path.name, engine, proc.exitcode)
    proc.join()
    return row


def bench_corpus(corpus: Path, engines: Sequence[str], timeout: float) -> pd.DataFrame:
    files = sorted(corpus.glob("*.bcsp.json")) + sorted(corpus.glob("*.cnf"))
    ctx = multiprocessing.get_context()
    rows: List[Dict[str, Any]] = []
    for path in files:
        for engine in (["reduce-fvs"] if path.suffix == ".cnf" else engines):
            rows.append(_bench_one(ctx, path, engine, timeout))
    df = pd.DataFrame(rows, columns=BENCH_COLUMNS)
    manifest = corpus / "manifest.csv"
    if rows and manifest.exists():
        meta = pd.read_csv(manifest)
        extra = [c for c in meta.columns if c == "file" or c not in df.columns]
        df = df.merge(meta[extra], on="file", how="left")
    return df


def cmd_bench(args: argparse.Namespace) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise SystemExit(f'Corpus directory not found: "{args.corpus}"')
    df = bench_corpus(corpus, _engine_list(args.engines), args.timeout)
    if args.csv:
        df.to_csv(args.csv, index=False)
    if args.json:
        df.to_json(args.json, orient="records", indent=2)
    if not args.csv and not args.json:
        print("(empty corpus)" if df.empty else df.to_string(index=False))
    return EXIT_OK


# ==========================================================
# CLI
# ==========================================================

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description="List homomorphism / binary CSP toolkit.")
    p.add_argument("--verbose", "-v", action="store_true", help="Debug logging.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="Decide an instance and print a solution.")
    s.add_argument("instance", help="List-instance text file or BCSP JSON file.")
    s.add_argument("--engine", choices=ENGINES, default="brute")
    s.add_argument("--layout", default="exact", help="exact | greedy | path to a layout file.")
    s.add_argument("--stats", choices=["text", "json"], default="text", help="Output format.")
    s.add_argument("--decide", action="store_true", help="Exit 1 when unsatisfiable.")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("invariants", help="i, mim, gamma (or their starred versions) of a target.")
    s.add_argument("target", help="Graph file.")
    s.add_argument("--kind", choices=[*KINDS, "all"], default="all")
    s.add_argument("--star", action="store_true", help="Maximise over qualifying induced subgraphs.")
    s.add_argument("--ca-cap", type=int, default=config.CA_CAP, help="Circular-arc oracle vertex cap.")
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("layout", help="Linear layout and optional feedback vertex set of a graph.")
    s.add_argument("graph", help="Graph file.")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="Minimum cutwidth (default).")
    mode.add_argument("--greedy", action="store_true")
    s.add_argument("--fvs", action="store_true", help="Also compute a minimum feedback vertex set.")
    s.add_argument("--out", default=None, help="Write the layout file here.")
    s.add_argument("--cert", default=None, help="Write a certificate JSON (the FVS when --fvs).")
    s.set_defaults(func=cmd_layout)

    s = sub.add_parser("reduce", help="CNF-SAT -> LHom(H) with a structural certificate.")
    s.add_argument("cnf", nargs="?", default=None, help="DIMACS file.")
    s.add_argument("--random", type=int, nargs=2, metavar=("N", "M"), help="Random formula instead of a file.")
    s.add_argument("--width", type=int, default=3, help="Max clause width for --random.")
    s.add_argument("--seed", type=int, default=0, help="Seed for --random.")
    s.add_argument("--target", required=True, help="Graph file of H.")
    s.add_argument("--mode", choices=["fvs", "ctw"], default="fvs")
    s.add_argument("--colours", default=None, help="Comma-separated labels of the colour set S.")
    s.add_argument("--p", type=int, default=1, help="Vertices per variable group.")
    s.add_argument("--g", type=int, default=4, help="Girth / spacing bound for --mode ctw.")
    s.add_argument("--out", required=True, help="Output list-instance file.")
    s.add_argument("--cert", default=None, help="Certificate JSON.")
    s.add_argument("--dot", default=None, help="Graphviz export.")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("verify", help="Re-check an instance, its certificate and engine agreement.")
    s.add_argument("instance")
    s.add_argument("--cert", default=None)
    s.add_argument("--engines", default=None, help="Comma-separated engines to cross-check.")
    s.add_argument("--cap", type=int, default=config.CUTWIDTH_CAP, help="Vertex cap for the cross-check.")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bench", help="Run engines over a corpus directory.")
    s.add_argument("corpus")
    s.add_argument("--engines", default="brute,dp,repset")
    s.add_argument("--timeout", type=float, default=config.BENCH_TIMEOUT, help="Per-run timeout (seconds).")
    s.add_argument("--csv", default=None)
    s.add_argument("--json", default=None)
    s.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config.configure_logging(args.verbose)
    try:
        return args.func(args)
    except (LhomError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as e:
        if isinstance(e.code, str):
            print(e.code, file=sys.stderr)
            return EXIT_INPUT
        raise


if __name__ == "__main__":
    raise SystemExit(main())
