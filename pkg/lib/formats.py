# lib/formats.py
"""
File formats.

Graph text:
    # comment
    n m
    labels: a b c ...        (optional; otherwise labels are taken in order of appearance)
    u v                      (m lines, labels; a loop is `u u`)

List instance text: a graph block for G, then `target <file>` (relative to the instance
file), then `v: a b c` lines naming list members by H labels. Vertices without a
list line get all of V(H).

BCSP JSON: {"variables": [...], "domains": [[...]], "constraints": [{"u", "v", "allowed"}]}.
CNF: DIMACS through pysat. Layout: one line of labels.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from pysat.formula import CNF

from lib.errors import FormatError
from lib.graphs import Graph
from lib.instances import BcspInstance, ListInstance
from lib.layouts import FeedbackSet, LinearLayout, make_layout

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _content_lines(text: str) -> Iterator[Tuple[int, str]]:
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


# ---------- graphs ----------

def _parse_graph_block(lines: List[Tuple[int, str]], pos: int, path: Optional[str]) -> Tuple[Graph, int]:
    if pos >= len(lines):
        raise FormatError("missing `n m` header", path)
    no, head = lines[pos]
    parts = head.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise FormatError(f"expected `n m`, got {head!r}", path, no)
    n, m = int(parts[0]), int(parts[1])
    pos += 1

    labels: List[str] = []
    if pos < len(lines) and lines[pos][1].startswith("labels:"):
        no, line = lines[pos]
        labels = line[len("labels:"):].split()
        if len(labels) != n or len(set(labels)) != n:
            raise FormatError(f"labels line must list {n} distinct labels", path, no)
        pos += 1
    index: Dict[str, int] = {lab: i for i, lab in enumerate(labels)}
    fixed = bool(labels)

    def vertex(lab: str, no: int) -> int:
        if lab not in index:
            if fixed:
                raise FormatError(f"unknown vertex {lab!r}", path, no)
            if len(index) >= n:
                raise FormatError(f"more than {n} distinct vertices", path, no)
            index[lab] = len(index)
        return index[lab]

    edges = []
    for _ in range(m):
        if pos >= len(lines):
            raise FormatError(f"expected {m} edge lines", path)
        no, line = lines[pos]
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"expected an edge `u v`, got {line!r}", path, no)
        edges.append((vertex(parts[0], no), vertex(parts[1], no)))
        pos += 1
    if not fixed:
        # unnamed isolated vertices
        k = 0
        while len(index) < n:
            lab = f"_{k}"
            if lab not in index:
                index[lab] = len(index)
            k += 1
        labels = sorted(index, key=index.__getitem__)
    if len(set(tuple(sorted(e)) for e in edges)) != len(edges):
        raise FormatError("duplicate edge", path)
    return Graph.from_edges(n, edges, labels), pos


def parse_graph(text: str, path: Optional[str] = None) -> Graph:
    lines = list(_content_lines(text))
    g, pos = _parse_graph_block(lines, 0, path)
    if pos != len(lines):
        raise FormatError(f"trailing content {lines[pos][1]!r}", path, lines[pos][0])
    return g


def format_graph(g: Graph) -> str:
    out = [f"{g.n} {g.m}", "labels: " + " ".join(g.labels)]
    out += [f"{g.label(u)} {g.label(v)}" for u, v in sorted(g.edges)]
    return "\n".join(out) + "\n"


def read_graph(path: PathLike) -> Graph:
    p = Path(path)
    return parse_graph(p.read_text(encoding="utf-8"), str(p))


def write_graph(g: Graph, path: PathLike) -> None:
    Path(path).write_text(format_graph(g), encoding="utf-8")


# ---------- list instances ----------

def read_list_instance(path: PathLike) -> ListInstance:
    p = Path(path)
    lines = list(_content_lines(p.read_text(encoding="utf-8")))
    g, pos = _parse_graph_block(lines, 0, str(p))
    if pos >= len(lines) or not lines[pos][1].startswith("target "):
        raise FormatError("expected `target <file>` after the graph block", str(p), lines[pos][0] if pos < len(lines) else None)
    target = (p.parent / lines[pos][1][len("target "):].strip()).resolve()
    try:
        h = read_graph(target)
    except OSError as e:
        raise FormatError(f"cannot read target {target}: {e}", str(p), lines[pos][0])
    pos += 1
    lists: Dict[int, List[int]] = {}
    for no, line in lines[pos:]:
        if ":" not in line:
            raise FormatError(f"expected `v: a b c`, got {line!r}", str(p), no)
        head, body = line.split(":", 1)
        try:
            v = g.index(head.strip())
            lists[v] = [h.index(lab) for lab in body.split()]
        except KeyError as e:
            raise FormatError(str(e.args[0]), str(p), no)
        if len(set(lists[v])) != len(lists[v]):
            raise FormatError("repeated list member", str(p), no)
    return ListInstance.build(g, h, lists)


def write_list_instance(inst: ListInstance, path: PathLike, target_path: PathLike) -> None:
    """Writes the instance and, when it does not exist yet, the target graph file."""
    p, t = Path(path), Path(target_path)
    if not t.exists():
        write_graph(inst.h, t)
    try:
        rel = t.resolve().relative_to(p.resolve().parent)
    except ValueError:
        rel = t.resolve()
    out = [format_graph(inst.g).rstrip("\n"), f"target {rel.as_posix()}"]
    full = frozenset(range(inst.h.n))
    for v in range(inst.g.n):
        if inst.lists[v] != full:
            out.append(f"{inst.g.label(v)}: " + " ".join(inst.h.label(x) for x in sorted(inst.lists[v])))
    p.write_text("\n".join(out) + "\n", encoding="utf-8")


# ---------- BCSP ----------

def bcsp_to_dict(b: BcspInstance) -> Dict[str, Any]:
    return {
        "variables": list(b.variables),
        "domains": [sorted(d) for d in b.domains],
        "constraints": [
            {"u": b.variables[c.u], "v": b.variables[c.v], "allowed": [list(p) for p in sorted(c.allowed)]}
            for c in b.constraints
        ],
    }


def bcsp_from_dict(doc: Dict[str, Any], path: Optional[str] = None) -> BcspInstance:
    try:
        variables = [str(v) for v in doc["variables"]]
        index = {v: i for i, v in enumerate(variables)}
        domains = [[int(a) for a in d] for d in doc["domains"]]
        cons = []
        for c in doc["constraints"]:
            u, v = c["u"], c["v"]
            u = index[u] if isinstance(u, str) else int(u)
            v = index[v] if isinstance(v, str) else int(v)
            cons.append((u, v, [(int(a), int(b)) for a, b in c["allowed"]]))
        return BcspInstance.build(variables, domains, cons)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed BCSP document: {e}", path)


def read_bcsp(path: PathLike) -> BcspInstance:
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, str(p), e.lineno)
    return bcsp_from_dict(doc, str(p))


def write_bcsp(b: BcspInstance, path: PathLike) -> None:
    Path(path).write_text(json.dumps(bcsp_to_dict(b), indent=2) + "\n", encoding="utf-8")


# ---------- layouts and certificates ----------

def read_layout(path: PathLike, g: Graph) -> LinearLayout:
    p = Path(path)
    lines = list(_content_lines(p.read_text(encoding="utf-8")))
    if len(lines) != 1:
        raise FormatError("a layout file holds exactly one line", str(p))
    no, line = lines[0]
    try:
        order = [g.index(lab) for lab in line.split()]
    except KeyError as e:
        raise FormatError(str(e.args[0]), str(p), no)
    if sorted(order) != list(range(g.n)):
        raise FormatError("layout is not a permutation of the vertices", str(p), no)
    return make_layout(g, order)


def write_layout(layout: LinearLayout, g: Graph, path: PathLike) -> None:
    Path(path).write_text(" ".join(g.label(v) for v in layout.order) + "\n", encoding="utf-8")


def certificate_to_dict(cert: Union[FeedbackSet, LinearLayout], g: Graph) -> Dict[str, Any]:
    if isinstance(cert, FeedbackSet):
        return {"kind": "fvs", "vertices": [g.label(v) for v in sorted(cert.vertices)]}
    return {"kind": "layout", "order": [g.label(v) for v in cert.order], "width": cert.width}


def certificate_from_dict(doc: Dict[str, Any], g: Graph, path: Optional[str] = None) -> Union[FeedbackSet, LinearLayout]:
    """A layout keeps its declared width so that `verify` can compare it to the recomputed one."""
    try:
        kind = doc["kind"]
        if kind == "fvs":
            return FeedbackSet(frozenset(g.index(lab) for lab in doc["vertices"]))
        if kind == "layout":
            order = tuple(g.index(lab) for lab in doc["order"])
            return LinearLayout(order, int(doc["width"]))
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"malformed certificate: {e}", path)
    raise FormatError(f"unknown certificate kind {kind!r}", path)


def read_certificate(path: PathLike, g: Graph) -> Union[FeedbackSet, LinearLayout]:
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, str(p), e.lineno)
    return certificate_from_dict(doc, g, str(p))


def write_certificate(cert: Union[FeedbackSet, LinearLayout], g: Graph, path: PathLike) -> None:
    Path(path).write_text(json.dumps(certificate_to_dict(cert, g), indent=2) + "\n", encoding="utf-8")


# ---------- CNF ----------

def read_cnf(path: PathLike) -> CNF:
    p = Path(path)
    try:
        return CNF(from_file=str(p))
    except (OSError, ValueError) as e:
        raise FormatError(f"cannot parse DIMACS: {e}", str(p))


def parse_cnf(text: str) -> CNF:
    try:
        return CNF(from_string=text)
    except ValueError as e:
        raise FormatError(f"cannot parse DIMACS: {e}")


def write_cnf(cnf: CNF, path: PathLike) -> None:
    cnf.to_file(str(path))


# ---------- DOT ----------

def to_dot(g: Graph, lists: Optional[Sequence[Iterable[int]]] = None, h: Optional[Graph] = None, name: str = "G") -> str:
    """Graph (optionally with lists rendered through h's labels) as Graphviz DOT."""

    def q(s: str) -> str:
        return '"' + s.replace('"', '\\"') + '"'

    out = [f"graph {q(name)} {{"]
    for v in range(g.n):
        label = g.label(v)
        if lists is not None:
            lst = sorted(lists[v])
            members = [h.label(x) for x in lst] if h is not None else [str(x) for x in lst]
            label += "\\n{" + ",".join(members) + "}"
        out.append(f"  {q(g.label(v))} [label={q(label)}];")
    for u, v in sorted(g.edges):
        out.append(f"  {q(g.label(u))} -- {q(g.label(v))};")
    out.append("}")
    return "\n".join(out) + "\n"
