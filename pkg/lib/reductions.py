# lib/reductions.py
"""
CNF-SAT -> LHom(H) reductions.

The n variables are split into t groups of at most c variables, c the largest
integer with 2^c <= k^p (k = |S|). Group i owns p vertices x_1^i..x_p^i with
list S; a group assignment is read as a number and written in base k over S,
giving the colouring of those p vertices.

Every clause C becomes a path x_C, T, T, ..., T, y_C of switching gadgets
(r of one gadget is p of the next) with L(x_C) = {alpha'}, L(y_C) = {beta'}.
There is one switching gadget per group touching C and per assignment of
that group satisfying C; its q vertex carries assignment gadgets
A_{f(1)}, .., A_{f(p)} tying q = gamma to x^i coloured f.

reduce_sat_fvs keeps the x vertices shared, so they form a feedback vertex
set of size t * p. reduce_sat_ctw splits every x vertex into one copy per
incident edge (copies chained by identity paths S, S', .., S) and hands each
assignment gadget its own q_j vertices on a path hanging from q; the output is
subcubic with large girth and comes with a layout of width <= t * p + C.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pysat.formula import CNF
from pysat.solvers import Glucose3

from lib.errors import PreconditionViolated, TripleCaseUnsupported
from lib.gadgets import Canvas, build_assignment, build_switching, chain_lists, check_colour_set
from lib.graphs import Graph, check_incomparable, induced_subgraph
from lib.instances import ListInstance, decode_assignment, lhom_to_bcsp
from lib.layouts import FeedbackSet, LinearLayout, cutwidth_of_order, is_feedback_set, make_layout
from lib.solvers import SolveResult, brute_force, fvs_solve
from lib.walks import CornerTriple, check_corner_triple

logger = logging.getLogger(__name__)

Clause = Sequence[int]


@dataclass(frozen=True)
class ReductionParams:
    k: int
    p: int
    t: int
    g: int
    n: int
    capacity: int


@dataclass(frozen=True)
class ReductionOutput:
    mode: str  # "fvs" or "ctw"
    instance: ListInstance
    certificate: Union[FeedbackSet, LinearLayout]
    params: ReductionParams
    colours: Tuple[int, ...]  # S, sorted; digit d is colours[d]
    groups: Tuple[Tuple[int, ...], ...]  # CNF variables (1-based) per group
    var_map: Tuple[Tuple[int, ...], ...]  # x_1^i..x_p^i (first copies when split)
    clause_map: Tuple[Tuple[int, ...], ...]  # P_C in path order
    width_constant: Optional[int] = None


# ==========================================================
# Formulas and group encodings
# ==========================================================

def random_cnf(n: int, m: int, width: int, seed: int) -> CNF:
    """m clauses of 1..width distinct variables out of n, random signs."""
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(m):
        size = int(rng.integers(1, min(n, width) + 1))
        picked = rng.choice(n, size=size, replace=False)
        clauses.append([int(v) + 1 if rng.random() < 0.5 else -(int(v) + 1) for v in picked])
    cnf = CNF(from_clauses=clauses)
    cnf.nv = n
    return cnf


def formula_satisfiable(cnf: CNF) -> bool:
    with Glucose3(bootstrap_with=cnf.clauses) as solver:
        return solver.solve()


def cnf_satisfied(cnf: CNF, values: Sequence[bool]) -> bool:
    return all(any(values[abs(l) - 1] == (l > 0) for l in clause) for clause in cnf.clauses)


def group_capacity(k: int, p: int) -> int:
    """Largest c with 2^c <= k^p, by integer arithmetic."""
    return (k ** p).bit_length() - 1


def partition_variables(n: int, capacity: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(tuple(range(s, min(s + capacity, n + 1))) for s in range(1, n + 1, capacity))


def encode_group(values: Sequence[bool], colours: Sequence[int], p: int) -> Tuple[int, ...]:
    """Group assignment (first variable most significant) as p base-k digits over S."""
    number = 0
    for v in values:
        number = 2 * number + int(v)
    k = len(colours)
    digits = []
    for _ in range(p):
        number, d = divmod(number, k)
        digits.append(colours[d])
    if number:
        raise ValueError("group does not fit into p digits")
    return tuple(reversed(digits))


def decode_group(colouring: Sequence[int], colours: Sequence[int], size: int) -> Tuple[bool, ...]:
    """Inverse of encode_group; colourings encoding no assignment read as all-False."""
    number = 0
    for c in colouring:
        number = number * len(colours) + colours.index(c)
    if number >= 1 << size:
        return (False,) * size
    return tuple(bool(number >> (size - 1 - j) & 1) for j in range(size))


def satisfying_assignments(clause: Clause, group: Sequence[int]) -> List[Tuple[bool, ...]]:
    """Assignments of the group, in lexicographic order, that satisfy the clause on their own."""
    pos = {v: j for j, v in enumerate(group)}
    lits = [(pos[abs(l)], l > 0) for l in clause if abs(l) in pos]
    if not lits:
        return []
    return [vals for vals in itertools.product((False, True), repeat=len(group)) if any(vals[j] == sign for j, sign in lits)]


def _prepare(cnf: CNF, h: Graph, triple: CornerTriple, s: Sequence[int], p: int) -> Tuple[Tuple[int, ...], ReductionParams, Tuple[Tuple[int, ...], ...]]:
    if p < 1:
        raise PreconditionViolated("p must be at least 1")
    problem = check_corner_triple(h, triple)
    if problem is not None:
        raise PreconditionViolated(f"corner triple: {problem}")
    colours = check_colour_set(h, triple, s)
    if any(not clause for clause in cnf.clauses):
        raise PreconditionViolated("formula has an empty clause")
    n = max([cnf.nv] + [abs(l) for clause in cnf.clauses for l in clause])
    capacity = group_capacity(len(colours), p)
    groups = partition_variables(n, capacity)
    params = ReductionParams(len(colours), p, len(groups), 0, n, capacity)
    return colours, params, groups


def _clause_lists(triple: CornerTriple, switching_lists: Sequence[FrozenSet[int]], q: int, count: int) -> Tuple[List[FrozenSet[int]], List[int]]:
    """Lists of x_C, count chained switching gadgets, y_C; and the positions of their q vertices."""
    step = len(switching_lists) - 1
    body = chain_lists(*([switching_lists] * count)) if count else []
    lists = [frozenset({triple.alpha_prime})] + body + [frozenset({triple.beta_prime})]
    return lists, [1 + j * step + q for j in range(count)]


def _sites(clause: Clause, groups: Sequence[Sequence[int]]) -> List[Tuple[int, Tuple[bool, ...]]]:
    return [(i, vals) for i, group in enumerate(groups) for vals in satisfying_assignments(clause, group)]


# ==========================================================
# Feedback-vertex-set reduction
# ==========================================================

def reduce_sat_fvs(cnf: CNF, h: Graph, triple: CornerTriple, s: Sequence[int], p: int) -> ReductionOutput:
    colours, params, groups = _prepare(cnf, h, triple, s, p)
    sw = build_switching(h, triple)
    q = sw.path.index(sw.vertex("q"))
    gadgets = {v: build_assignment(h, triple, colours, v) for v in colours}

    cv = Canvas(h)
    xs = [[cv.add(colours, f"x[{i + 1},{j + 1}]") for j in range(p)] for i in range(len(groups))]
    clause_map = []
    switches = 0
    for ci, clause in enumerate(cnf.clauses):
        sites = _sites(clause, groups)
        lists, qs = _clause_lists(triple, sw.path_lists(), q, len(sites))
        path = cv.path(lists, f"P[{ci + 1}]")
        for (i, vals), qpos in zip(sites, qs):
            for j, colour in enumerate(encode_group(vals, colours, p)):
                cv.embed(gadgets[colour], f"A[{ci + 1},{qpos},{j + 1}]", glue={"x": xs[i][j], "y": path[qpos]})
        clause_map.append(tuple(path))
        switches += len(sites)

    graph = cv.graph()
    cert = FeedbackSet(frozenset(v for row in xs for v in row))
    assert is_feedback_set(graph, cert.vertices), "x vertices do not break every cycle"
    logger.info(
        "fvs reduction: %d groups, %d switching and %d assignment gadgets, %d vertices",
        len(groups), switches, switches * p, graph.n,
    )
    return ReductionOutput(
        "fvs",
        ListInstance(graph, h, cv.frozen_lists()),
        cert,
        params,
        colours,
        groups,
        tuple(tuple(row) for row in xs),
        tuple(clause_map),
    )


# ==========================================================
# Cutwidth reduction
# ==========================================================

def _even_at_least(g: int) -> int:
    return max(2, g + g % 2)


def hanging_lists(h: Graph, triple: CornerTriple, count: int, g: int) -> Tuple[List[FrozenSet[int]], List[int]]:
    """
    Lists of the path hanging from q (q's list first) and the positions of q_1..q_count.

    With a strongly incomparable triple the path alternates {alpha, beta, gamma} with
    the private neighbours, so every q_j copies q. From an induced C6 / C8 the q_j
    get {beta, gamma}: q = gamma forces gamma on all of them, q = beta forces beta,
    q = alpha allows all-beta.
    """
    t = triple
    core = frozenset(t.core)
    if t.case == "strongly_incomparable":
        lead = [core, frozenset(t.private)]
        even, odd = core, frozenset(t.private)
    elif t.case in ("C6", "C8"):
        w = t.w
        if t.case == "C6":
            lead = [core, frozenset({w(2), w(6)})]
        else:
            lead = [core, frozenset({w(2), w(6), w(8)}), frozenset({w(3), w(7)}), frozenset({w(2), w(6)})]
        even, odd = frozenset({w(3), w(5)}), frozenset({w(2), w(6)})
    else:
        raise TripleCaseUnsupported(t.case)
    spacing = _even_at_least(g)
    first = max(len(lead), g)
    first += first % 2
    positions = [first + j * spacing for j in range(count)]
    length = positions[-1] + 1 if positions else 1
    lists = [lead[i] if i < len(lead) else (even if i % 2 == 0 else odd) for i in range(length)]
    return lists, positions


@lru_cache(maxsize=None)
def width_constant(h: Graph, triple: CornerTriple, colours: Tuple[int, ...], g: int) -> int:
    """Additive constant of the emitted layout's width for this (H, triple, S, g)."""
    k = len(colours)
    inner = 0
    for v in colours:
        a = build_assignment(h, triple, colours, v, g)
        keep = [u for u in range(a.graph.n) if u not in (a.vertex("x"), a.vertex("y"))]
        sub = induced_subgraph(a.graph, keep)
        inner = max(inner, cutwidth_of_order(sub, list(range(sub.n))))
    return 2 + (k - 1) ** 2 + (k - 1) + inner


def reduce_sat_ctw(cnf: CNF, h: Graph, triple: CornerTriple, s_strong: Sequence[int], p: int, g: int) -> ReductionOutput:
    colours, params, groups = _prepare(cnf, h, triple, s_strong, p)
    wit = check_incomparable(h, colours, strong=True)
    if not wit.ok:
        raise PreconditionViolated("S is not strongly incomparable")
    partners = frozenset(wit.private_neighbors[c] for c in colours)
    k = len(colours)
    sw = build_switching(h, triple, g)
    q = sw.path.index(sw.vertex("q"))
    gadgets = {v: build_assignment(h, triple, colours, v, g) for v in colours}

    cv = Canvas(h)
    order: List[int] = []
    copies: Dict[Tuple[int, int], List[int]] = {(i, j): [] for i in range(len(groups)) for j in range(p)}
    clause_map = []
    switches = 0

    def copy_factory(i: int, j: int, fresh: List[int]):
        def make() -> int:
            v = cv.add(colours, f"x[{i + 1},{j + 1}]#{len(copies[(i, j)]) + 1}")
            copies[(i, j)].append(v)
            fresh.append(v)
            return v

        return make

    for ci, clause in enumerate(cnf.clauses):
        sites = _sites(clause, groups)
        lists, qs = _clause_lists(triple, sw.path_lists(), q, len(sites))
        path = cv.path(lists, f"P[{ci + 1}]")
        site_at = dict(zip(qs, sites))
        for pos, v in enumerate(path):
            order.append(v)
            if pos not in site_at:
                continue
            i, vals = site_at[pos]
            qlists, qpos = hanging_lists(h, triple, p * (k - 1), g)
            hang = cv.path(qlists, f"Q[{ci + 1},{pos}]", start=v)
            q_js = [hang[x] for x in qpos]
            blocks: Dict[int, List[int]] = {}
            for j, colour in enumerate(encode_group(vals, colours, p)):
                gadget = gadgets[colour]
                mine: Iterator[int] = iter(q_js[j * (k - 1) : (j + 1) * (k - 1)])
                fresh: List[int] = []
                m = cv.embed(
                    gadget,
                    f"A[{ci + 1},{pos},{j + 1}]",
                    split={"x": copy_factory(i, j, fresh), "y": lambda it=mine: next(it)},
                )
                blocks[qpos[j * (k - 1)]] = [m[u] for u in sorted(m)] + fresh
            # q, Q_0, then each block right before its first q_j
            for x, u in enumerate(hang[1:], start=1):
                order.extend(blocks.get(x, ()))
                order.append(u)
        clause_map.append(tuple(path))
        switches += len(sites)

    # chain the copies of every x_j^i by identity paths
    length = _even_at_least(g)
    slots: Dict[int, List[int]] = {}
    isolated: List[int] = []
    for (i, j), chain in copies.items():
        if not chain:
            v = cv.add(colours, f"x[{i + 1},{j + 1}]#1")
            chain.append(v)
            isolated.append(v)
        for a, b in zip(chain, chain[1:]):
            inner = [cv.add(partners if x % 2 else colours, f"X[{i + 1},{j + 1}]@{a}.{x}") for x in range(1, length)]
            for u, w in zip([a] + inner, inner + [b]):
                cv.link(u, w)
            slots[a] = inner

    full = isolated + [u for v in order for u in [v] + slots.get(v, [])]
    graph = cv.graph()
    layout = make_layout(graph, full)
    const = width_constant(h, triple, colours, g)
    params = ReductionParams(k, p, params.t, g, params.n, params.capacity)
    logger.info(
        "ctw reduction: %d groups, %d switching gadgets, %d vertices, layout width %d (t*p + C = %d)",
        len(groups), switches, graph.n, layout.width, params.t * p + const,
    )
    return ReductionOutput(
        "ctw",
        ListInstance(graph, h, cv.frozen_lists()),
        layout,
        params,
        colours,
        groups,
        tuple(tuple(copies[(i, j)][0] for j in range(p)) for i in range(len(groups))),
        tuple(clause_map),
        const,
    )


# ==========================================================
# Solving and decoding
# ==========================================================

def branch_vertices(out: ReductionOutput) -> List[int]:
    return [v for row in out.var_map for v in row]


def solve_reduction(out: ReductionOutput, node_budget: Optional[int] = None) -> SolveResult:
    """Branch on the x vertices (first copies when split); the rest is a forest."""
    b = lhom_to_bcsp(out.instance)
    if isinstance(out.certificate, FeedbackSet):
        return fvs_solve(b, sorted(out.certificate.vertices), node_budget=node_budget)
    return brute_force(b, node_budget=node_budget, branch_priority=branch_vertices(out))


def decode_formula_assignment(out: ReductionOutput, phi: Sequence[int]) -> List[bool]:
    """Formula assignment read off a list homomorphism (H-vertex per instance vertex)."""
    values = [False] * out.params.n
    for group, xs in zip(out.groups, out.var_map):
        colouring = tuple(phi[v] for v in xs)
        for var, val in zip(group, decode_group(colouring, out.colours, len(group))):
            values[var - 1] = val
    return values


def solve_and_decode(out: ReductionOutput, node_budget: Optional[int] = None) -> Tuple[SolveResult, Optional[List[bool]]]:
    res = solve_reduction(out, node_budget)
    if not res.satisfiable:
        return res, None
    phi = decode_assignment(out.instance, res.assignment)
    return res, decode_formula_assignment(out, phi)
