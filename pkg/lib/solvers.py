# lib/solvers.py
"""
Decision engines for binary CSP and list-homomorphism instances.

brute     backtracking with arc consistency (MAC); the oracle for everything else
dp        layout sweep keeping every boundary assignment
repset    the same sweep, shrinking each table to a row basis of L[S, .] over F_p
clean     repset over the associated bipartite instance for non-bipartite targets
fvs       branch on a feedback vertex set, arc consistency on the remaining forest
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from lib import config
from lib.errors import (
    BudgetExceeded,
    DegenerateField,
    NoLayout,
    NotStrongSplit,
    SizeCapExceeded,
    TargetBipartite,
)
from lib.graphs import Graph, associated_bipartite, induced_subgraph, is_bipartite
from lib.instances import (
    BcspInstance,
    ConstraintSlices,
    ListInstance,
    compute_k_and_slices,
    lhom_to_bcsp,
    normalize_consistent,
)
from lib.layouts import LinearLayout, exact_cutwidth, exact_fvs, greedy_layout, is_feedback_set, make_layout

logger = logging.getLogger(__name__)

ENGINES = ("brute", "dp", "repset", "clean", "fvs")

_EMPTY: FrozenSet[int] = frozenset()


@dataclass
class SolveResult:
    satisfiable: bool
    assignment: Optional[Tuple[int, ...]] = None
    stats: Dict[str, Any] = field(default_factory=dict)


# ==========================================================
# Arc consistency
# ==========================================================

Supports = Dict[Tuple[int, int], Dict[int, FrozenSet[int]]]


def _supports(b: BcspInstance) -> Supports:
    """(x, y) -> value of x -> values of y it is compatible with."""
    sup: Supports = {}
    for c in b.constraints:
        fwd: Dict[int, Set[int]] = defaultdict(set)
        bwd: Dict[int, Set[int]] = defaultdict(set)
        for a, x in c.allowed:
            fwd[a].add(x)
            bwd[x].add(a)
        sup[(c.u, c.v)] = {a: frozenset(s) for a, s in fwd.items()}
        sup[(c.v, c.u)] = {a: frozenset(s) for a, s in bwd.items()}
    return sup


def _arc_consistent(b: BcspInstance, sup: Supports, doms: List[Set[int]], changed: Optional[Sequence[int]] = None) -> bool:
    """Shrinks doms in place; False once a domain empties."""
    if changed is None:
        queue = deque((x, y) for x in range(b.n) for y in b.neighbors[x])
    else:
        queue = deque((z, x) for x in changed for z in b.neighbors[x])
    while queue:
        x, y = queue.popleft()
        s, dy = sup[(x, y)], doms[y]
        keep = {a for a in doms[x] if not s.get(a, _EMPTY).isdisjoint(dy)}
        if len(keep) != len(doms[x]):
            if not keep:
                doms[x] = keep
                return False
            doms[x] = keep
            queue.extend((z, x) for z in b.neighbors[x] if z != y)
    return True


def _free_part_is_forest(b: BcspInstance, doms: List[Set[int]]) -> bool:
    parent = list(range(b.n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in b.constraints:
        if len(doms[c.u]) > 1 and len(doms[c.v]) > 1:
            ru, rv = find(c.u), find(c.v)
            if ru == rv:
                return False
            parent[ru] = rv
    return True


def _extract_on_forest(b: BcspInstance, sup: Supports, doms: List[Set[int]]) -> Tuple[int, ...]:
    """Arc-consistent domains whose free variables form a forest: pick values root to leaves."""
    value: Dict[int, int] = {v: next(iter(d)) for v, d in enumerate(doms) if len(d) == 1}
    for root in range(b.n):
        if root in value:
            continue
        value[root] = min(doms[root])
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in sorted(b.neighbors[u]):
                if w in value:
                    continue
                ok = sup[(u, w)].get(value[u], _EMPTY)
                value[w] = min(a for a in doms[w] if a in ok)
                queue.append(w)
    return tuple(value[v] for v in range(b.n))


# ==========================================================
# Brute force
# ==========================================================

def brute_force(
    b: BcspInstance,
    node_budget: Optional[int] = None,
    branch_priority: Optional[Sequence[int]] = None,
) -> SolveResult:
    """
    MAC backtracking. Variables in `branch_priority` are branched on first, in order;
    afterwards, once the undecided variables induce a forest, the answer is read off
    arc consistency. Otherwise the smallest domain is branched on.
    """
    budget = config.NODE_BUDGET if node_budget is None else node_budget
    sup = _supports(b)
    priority = list(branch_priority or [])
    nodes = 0

    def search(doms: List[Set[int]]) -> Optional[Tuple[int, ...]]:
        nonlocal nodes
        pick = next((v for v in priority if len(doms[v]) > 1), None)
        if pick is None:
            if _free_part_is_forest(b, doms):
                return _extract_on_forest(b, sup, doms)
            free = [v for v in range(b.n) if len(doms[v]) > 1]
            pick = min(free, key=lambda v: (len(doms[v]), v))
        for a in sorted(doms[pick]):
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded("brute_force", budget)
            trial = [set(d) for d in doms]
            trial[pick] = {a}
            if _arc_consistent(b, sup, trial, [pick]):
                found = search(trial)
                if found is not None:
                    return found
        return None

    doms = [set(d) for d in b.domains]
    assignment = None
    if all(doms) and _arc_consistent(b, sup, doms):
        assignment = search(doms)
    stats = {"engine": "brute", "nodes": nodes}
    if assignment is not None:
        assert b.violated(assignment) is None
    return SolveResult(assignment is not None, assignment, stats)


def all_solutions(b: BcspInstance, limit: Optional[int] = None) -> List[Tuple[int, ...]]:
    """Every solution in lexicographic order (first `limit` of them)."""
    sup = _supports(b)
    out: List[Tuple[int, ...]] = []

    def walk(v: int, doms: List[Set[int]]) -> Iterator[Tuple[int, ...]]:
        if v == b.n:
            yield tuple(next(iter(d)) for d in doms)
            return
        for a in sorted(doms[v]):
            trial = [set(d) for d in doms]
            trial[v] = {a}
            if _arc_consistent(b, sup, trial, [v]):
                yield from walk(v + 1, trial)

    doms = [set(d) for d in b.domains]
    if not all(doms) or not _arc_consistent(b, sup, doms):
        return out
    for sol in walk(0, doms):
        out.append(sol)
        if limit is not None and len(out) >= limit:
            break
    return out


def fvs_solve(b: BcspInstance, fvs: Sequence[int], node_budget: Optional[int] = None) -> SolveResult:
    """Branch on the feedback set in the given order; the rest is a forest."""
    if not is_feedback_set(b.primal_graph(), fvs):
        raise ValueError("not a feedback vertex set of the primal graph")
    res = brute_force(b, node_budget=node_budget, branch_priority=list(fvs))
    res.stats["engine"] = "fvs"
    res.stats["branch_bound"] = math.prod(len(b.domains[v]) for v in fvs)
    return res


# ==========================================================
# Layout sweep
# ==========================================================

Key = Tuple[int, ...]
Reducer = Callable[[int, Tuple[int, ...], FrozenSet[int], Dict[Key, Tuple[Key, Key]]], Dict[Key, Tuple[Key, Key]]]


def _sweep(
    b: BcspInstance,
    groups: Sequence[Tuple[int, ...]],
    choices: Sequence[Sequence[Tuple[int, ...]]],
    reducer: Optional[Reducer] = None,
) -> Tuple[Optional[Tuple[int, ...]], List[Dict[str, int]]]:
    """
    Place one group of variables per step. The table maps each assignment of the
    boundary X_i (placed variables with a later neighbour) to one parent pointer.
    """
    placed: Set[int] = set()
    boundary: Tuple[int, ...] = ()
    table: Dict[Key, Tuple[Key, Key]] = {(): ((), ())}
    history: List[Dict[Key, Tuple[Key, Key]]] = []
    steps: List[Dict[str, int]] = []

    for i, (group, opts) in enumerate(zip(groups, choices)):
        placed.update(group)
        pos_prev = {v: j for j, v in enumerate(boundary)}
        # constraints of the group towards the previous boundary and inside the group
        checks = []
        for gi, v in enumerate(group):
            for u in b.neighbors[v]:
                if u in pos_prev:
                    checks.append((0, pos_prev[u], gi, b.allowed(u, v)))
                elif u in group and group.index(u) < gi:
                    checks.append((1, group.index(u), gi, b.allowed(u, v)))
        new_boundary = tuple(sorted(v for v in placed if b.neighbors[v] - placed))
        fetch = []
        for v in new_boundary:
            fetch.append((1, group.index(v)) if v in group else (0, pos_prev[v]))

        new: Dict[Key, Tuple[Key, Key]] = {}
        for key in table:
            for choice in opts:
                if all(
                    ((key[j] if side == 0 else choice[j]), choice[gi]) in allowed
                    for side, j, gi, allowed in checks
                ):
                    nk = tuple(key[j] if side == 0 else choice[j] for side, j in fetch)
                    if nk not in new:
                        new[nk] = (key, choice)
        before = len(new)
        if reducer is not None and new:
            new = reducer(i, new_boundary, frozenset(placed), new)
        steps.append({"step": i, "boundary": len(new_boundary), "before": before, "after": len(new)})
        logger.debug("sweep step %d: |X|=%d table %d -> %d", i, len(new_boundary), before, len(new))
        history.append(new)
        table, boundary = new, new_boundary
        if not table:
            return None, steps

    # follow parent pointers back from the empty boundary
    values: Dict[int, int] = {}
    key: Key = ()
    for i in range(len(groups) - 1, -1, -1):
        key, choice = history[i][key]
        for v, a in zip(groups[i], choice):
            values[v] = a
    return tuple(values[v] for v in range(b.n)), steps


def _check_layout(b: BcspInstance, layout: LinearLayout) -> None:
    if sorted(layout.order) != list(range(b.n)):
        raise NoLayout(f"layout does not order the {b.n} variables")


def layout_dp(b: BcspInstance, layout: LinearLayout) -> SolveResult:
    _check_layout(b, layout)
    groups = [(v,) for v in layout.order]
    choices = [[(a,) for a in sorted(b.domains[v])] for v in layout.order]
    assignment, steps = _sweep(b, groups, choices)
    stats = {"engine": "dp", "steps": steps, "max_table": max((s["before"] for s in steps), default=0)}
    return SolveResult(assignment is not None, assignment, stats)


# ==========================================================
# Representative sets
# ==========================================================

def reduce_representative(
    rows: Sequence[Key], degrees: Sequence[int], k: int, prime: Optional[int] = None
) -> List[Key]:
    """
    Rows of S whose L-rows form a row basis of L[S, .] over F_p, in input order.

    L[x, .] is the tensor product over coordinates u of (1, x_u, ..., x_u^{k*deg(u)}).
    A coordinate with at most k*deg(u)+1 distinct values is rewritten in the basis
    {v(a)} of its span (unit vectors); this is injective per factor, so linear
    dependencies between rows are unchanged.
    """
    p = _field(prime)
    rows = list(rows)
    if len(rows) <= 1:
        return rows
    if not degrees:
        return rows[:1]

    factors: List[Dict[int, np.ndarray]] = []
    for j, deg in enumerate(degrees):
        vals = sorted({r[j] for r in rows})
        top = k * deg
        if len(vals) <= top + 1:
            eye = np.eye(len(vals), dtype=np.int64)
            factors.append({a: eye[i] for i, a in enumerate(vals)})
        else:
            factors.append({a: np.array([pow(a, e, p) for e in range(top + 1)], dtype=np.int64) for a in vals})

    def row_vector(r: Key) -> np.ndarray:
        vec = np.ones(1, dtype=np.int64)
        for j, a in enumerate(r):
            vec = (np.outer(vec, factors[j][a]) % p).ravel()
        return vec

    basis: List[Tuple[int, np.ndarray]] = []
    kept: List[Key] = []
    for r in rows:
        vec = row_vector(r)
        for piv, brow in basis:
            c = int(vec[piv])
            if c:
                vec = (vec - c * brow) % p
        nz = np.flatnonzero(vec)
        if len(nz) == 0:
            continue
        piv = int(nz[0])
        vec = (vec * pow(int(vec[piv]), p - 2, p)) % p
        # keep the basis fully reduced on pivot columns
        basis = [(q, (brow - int(brow[piv]) * vec) % p if brow[piv] else brow) for q, brow in basis]
        basis.append((piv, vec))
        kept.append(r)
    return kept


def moment_entry(
    slices: ConstraintSlices,
    cross_edges: Sequence[Tuple[int, int]],
    x: Dict[int, int],
    y: Dict[int, int],
    prime: Optional[int] = None,
) -> int:
    """M[x, y] = prod over cross edges uv of prod_i (x_u - sigma_uv^(i)(y_v)) mod p."""
    p = _field(prime)
    out = 1
    for u, v in cross_edges:
        for s in slices.slices[(u, v)][y[v]]:
            out = out * ((x[u] - s) % p) % p
    return out


def _repset_reducer(b: BcspInstance, k: int, prime: int, stats_steps: List[Dict[str, int]]) -> Reducer:
    def reduce(i: int, boundary: Tuple[int, ...], placed: FrozenSet[int], table: Dict[Key, Tuple[Key, Key]]):
        degrees = [len(b.neighbors[u] - placed) for u in boundary]
        rows = sorted(table)
        kept = reduce_representative(rows, degrees, k, prime)
        bound = math.prod((d + 1) ** k for d in degrees)
        stats_steps.append({"step": i, "rank": len(kept), "bound": bound, "cross_edges": sum(degrees)})
        return {r: table[r] for r in kept}

    return reduce


def _field(prime: Optional[int]) -> int:
    p = config.PRIME if prime is None else prime
    if not 2 <= p <= config.MAX_PRIME:
        raise ValueError(f"field modulus {p} outside 2..{config.MAX_PRIME}; int64 elimination would overflow")
    return p


def _prepare_field(b: BcspInstance, prime: Optional[int]) -> int:
    p = _field(prime)
    if p <= b.max_value:
        raise DegenerateField(p, b.max_value)
    return p


def _merge_step_stats(steps: List[Dict[str, int]], ranks: List[Dict[str, int]]) -> List[Dict[str, int]]:
    by_step = {r["step"]: r for r in ranks}
    return [{**s, **by_step.get(s["step"], {})} for s in steps]


def repset_solve(b: BcspInstance, layout: LinearLayout, prime: Optional[int] = None) -> SolveResult:
    _check_layout(b, layout)
    p = _prepare_field(b, prime)
    slices = compute_k_and_slices(b)
    k = slices.k
    if k == 0:
        # every constraint allows everything: only empty domains can fail
        ok = all(b.domains)
        assignment = tuple(min(d) for d in b.domains) if ok else None
        return SolveResult(ok, assignment, {"engine": "repset", "k": 0, "steps": [], "max_table": 0})

    ranks: List[Dict[str, int]] = []
    groups = [(v,) for v in layout.order]
    choices = [[(a,) for a in sorted(b.domains[v])] for v in layout.order]
    assignment, steps = _sweep(b, groups, choices, _repset_reducer(b, k, p, ranks))
    steps = _merge_step_stats(steps, ranks)
    stats = {
        "engine": "repset",
        "k": k,
        "prime": p,
        "width": layout.width,
        "steps": steps,
        "max_table": max((s["after"] for s in steps), default=0),
        "max_rank": max((s.get("rank", 0) for s in steps), default=0),
    }
    if assignment is not None:
        assert b.violated(assignment) is None
    return SolveResult(assignment is not None, assignment, stats)


# ==========================================================
# Non-bipartite targets
# ==========================================================

def clean_repset_solve(inst: ListInstance, layout: LinearLayout, prime: Optional[int] = None) -> SolveResult:
    """
    Solve LHom(H) for non-bipartite H through (G*, L*) -> H*, placing v' and v''
    together and only ever assigning clean pairs (x', x'').
    """
    h, g = inst.h, inst.g
    if not h.loops and is_bipartite(h):
        raise TargetBipartite("target is bipartite; solve the instance directly")
    if sorted(layout.order) != list(range(g.n)):
        raise NoLayout(f"layout does not order the {g.n} vertices")

    h_star = associated_bipartite(h)
    g_star = associated_bipartite(g)
    nh, ng = h.n, g.n
    lists = [inst.lists[v] for v in range(ng)] + [frozenset(nh + x for x in inst.lists[v]) for v in range(ng)]
    star = ListInstance(g_star.graph, h_star.graph, tuple(lists))
    b = lhom_to_bcsp(star)
    p = _prepare_field(b, prime)
    slices = compute_k_and_slices(b)

    groups = [(v, ng + v) for v in layout.order]
    choices = [[(x + 1, nh + x + 1) for x in sorted(inst.lists[v])] for v in layout.order]
    ranks: List[Dict[str, int]] = []
    reducer = _repset_reducer(b, slices.k, p, ranks) if slices.k else None
    star_assignment, steps = _sweep(b, groups, choices, reducer)
    steps = _merge_step_stats(steps, ranks)
    assignment = None
    if star_assignment is not None:
        assignment = tuple(star_assignment[v] - 1 for v in range(ng))
        assert inst.verify(assignment)
    stats = {
        "engine": "clean",
        "k": slices.k,
        "steps": steps,
        "max_table": max((s["after"] for s in steps), default=0),
    }
    return SolveResult(assignment is not None, assignment, stats)


def strong_split_parts(h: Graph) -> Tuple[FrozenSet[int], FrozenSet[int]]:
    """(P, B) with P the looped vertices; raises NotStrongSplit unless P is a reflexive clique and B independent."""
    P = frozenset(h.loops)
    B = frozenset(range(h.n)) - P
    for x, y in itertools.combinations(sorted(P), 2):
        if not h.has_edge(x, y):
            raise NotStrongSplit(f"looped vertices {h.label(x)}, {h.label(y)} are not adjacent")
    for x, y in itertools.combinations(sorted(B), 2):
        if h.has_edge(x, y):
            raise NotStrongSplit(f"unlooped vertices {h.label(x)}, {h.label(y)} are adjacent")
    return P, B


def strong_split_transform(inst: ListInstance) -> ListInstance:
    """
    Retarget to H~ = H minus the edges inside P (bipartite with classes P, B).

    A vertex whose list meets P can always use a P-value instead of a B-value (its
    neighbours then sit in P, which is a reflexive clique), so its list is cut down
    to P. Edges between P-listed vertices become irrelevant and are dropped; two
    adjacent B-listed vertices make the instance a no-instance.
    """
    P, B = strong_split_parts(inst.h)
    lists = [lst & P if lst & P else lst for lst in inst.lists]
    on_b = [not (lst & P) for lst in lists]
    h_tilde = Graph.from_edges(inst.h.n, [(x, y) for x, y in inst.h.edges if not (x in P and y in P)], inst.h.labels)
    clash = next(((u, v) for u, v in sorted(inst.g.edges) if on_b[u] and on_b[v]), None)
    if clash is not None:
        logger.debug("strong split: adjacent B-listed vertices %s", clash)
        lists[clash[0]] = frozenset()
        g = Graph.from_edges(inst.g.n, [], inst.g.labels)
        return ListInstance(g, h_tilde, tuple(lists))
    g = Graph.from_edges(inst.g.n, [(u, v) for u, v in inst.g.edges if on_b[u] or on_b[v]], inst.g.labels)
    return ListInstance(g, h_tilde, tuple(lists))


# ==========================================================
# Dispatch
# ==========================================================

LayoutSpec = Union[str, LinearLayout, None]


def choose_layout(g: Graph, spec: LayoutSpec = "exact") -> LinearLayout:
    if isinstance(spec, LinearLayout):
        return spec
    if spec in (None, "exact"):
        try:
            return exact_cutwidth(g)
        except SizeCapExceeded as e:
            logger.warning("%s; falling back to greedy layout", e)
            return greedy_layout(g)
    if spec == "greedy":
        return greedy_layout(g)
    raise ValueError(f"unknown layout choice {spec!r}")


def run_bcsp(b: BcspInstance, engine: str = "brute", layout: LayoutSpec = "exact", fvs: Optional[Sequence[int]] = None) -> SolveResult:
    if engine == "brute":
        return brute_force(b)
    if engine == "fvs":
        if fvs is None:
            fvs = sorted(exact_fvs(b.primal_graph()).vertices)
        return fvs_solve(b, fvs)
    lay = choose_layout(b.primal_graph(), layout)
    if engine == "dp":
        return layout_dp(b, lay)
    if engine in ("repset", "clean"):
        return repset_solve(b, lay)
    raise ValueError(f"unknown engine {engine!r}")


def _restrict_layout(g: Graph, layout: LayoutSpec, vertices: Sequence[int]) -> LayoutSpec:
    if not isinstance(layout, LinearLayout):
        return layout
    pos = {v: i for i, v in enumerate(vertices)}
    sub = [pos[v] for v in layout.order if v in pos]
    return make_layout(induced_subgraph(g, vertices), sub)


def solve_lhom(inst: ListInstance, engine: str = "brute", layout: LayoutSpec = "exact") -> SolveResult:
    """
    Bipartite targets go through normalize_consistent and are solved per component;
    strong-split targets are retargeted first; other targets use the clean engine or
    the direct encoding. The assignment maps vertices of G to vertices of H.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    h = inst.h
    if not h.loops and is_bipartite(h):
        return _solve_bipartite(inst, engine, layout)
    try:
        transformed = strong_split_transform(inst)
    except NotStrongSplit:
        transformed = None
    if transformed is not None:
        res = _solve_bipartite(transformed, "repset" if engine == "clean" else engine, layout)
        res.stats["path"] = "strong_split"
        if res.assignment is not None:
            assert inst.verify(res.assignment)
        return res
    if engine == "clean":
        res = clean_repset_solve(inst, choose_layout(inst.g, layout))
    else:
        res = run_bcsp(lhom_to_bcsp(inst), engine, layout)
        if res.assignment is not None:
            res.assignment = tuple(a - 1 for a in res.assignment)
    res.stats["path"] = "general"
    return res


def _solve_bipartite(inst: ListInstance, engine: str, layout: LayoutSpec) -> SolveResult:
    engine = "repset" if engine == "clean" else engine
    report = normalize_consistent(inst)
    stats: Dict[str, Any] = {"path": "bipartite", "normalize": report.status, "components": []}
    if report.status == "rejected":
        stats["reason"] = report.reason
        return SolveResult(False, None, stats)
    phi: Dict[int, int] = {}
    for comp in report.components:
        found = None
        for option in comp.options:
            sub_layout = _restrict_layout(inst.g, layout, comp.vertices)
            res = run_bcsp(lhom_to_bcsp(option), engine, sub_layout)
            stats["components"].append(res.stats)
            if res.satisfiable:
                found = res.assignment
                break
        if found is None:
            return SolveResult(False, None, stats)
        for i, v in enumerate(comp.vertices):
            phi[v] = found[i] - 1
    assignment = tuple(phi[v] for v in range(inst.g.n))
    assert inst.verify(assignment)
    return SolveResult(True, assignment, stats)
