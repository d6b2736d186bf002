# lib/invariants.py
"""
Structural invariants of target graphs: bipartite decompositions, the
complement-of-circular-arc oracle, i / mim / gamma and their starred versions.

All searches are exhaustive and meant for small targets.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from lib import config
from lib.errors import OracleUnknown
from lib.graphs import (
    Graph,
    associated_bipartite,
    bipartition,
    check_incomparable,
    induced_subgraph,
    is_bipartite,
)

logger = logging.getLogger(__name__)

KINDS = ("i", "mim", "gamma")


@dataclass(frozen=True)
class BipartiteDecomposition:
    d_set: FrozenSet[int]
    n_set: FrozenSet[int]
    r_set: FrozenSet[int]


@dataclass(frozen=True)
class CoCaResult:
    answer: str  # "yes" | "no" | "unknown"
    witness: Optional[Tuple[int, ...]] = None  # induced long cycle, or the vertices beyond the cap
    model: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None  # two orders of V(h)


@dataclass(frozen=True)
class InvariantReport:
    kind: str
    value: int
    vertices: FrozenSet[int] = frozenset()  # achieving induced subgraph, in indices of `graph`
    sets: Tuple[FrozenSet[int], ...] = ()
    graph: Optional[Graph] = field(default=None, compare=False)


# ==========================================================
# Bipartite decompositions
# ==========================================================

def _common_neighbours(h: Graph, vertices: Iterable[int], universe: FrozenSet[int]) -> FrozenSet[int]:
    out = universe
    for v in vertices:
        out = out & h.adj[v]
    return out


def check_decomposition(h: Graph, dec: BipartiteDecomposition) -> Optional[str]:
    """None when (D, N, R) satisfies all four conditions, else the failing one."""
    bp = bipartition(h)
    D, N, R = dec.d_set, dec.n_set, dec.r_set
    if D & N or D & R or N & R or (D | N | R) != frozenset(range(h.n)):
        return "sets do not partition V(H)"
    if not N:
        return "N is empty"
    if any(h.adj[d] & R for d in D):
        return "N does not separate D from R"
    if len(D & bp.class_x) < 2 and len(D & bp.class_y) < 2:
        return "D has fewer than two vertices in each class"
    for side_a, side_b, what in (
        (N & bp.class_x, N & bp.class_y, "N"),
        (D & bp.class_x, N & bp.class_y, "(D cap X) cup (N cap Y)"),
        (D & bp.class_y, N & bp.class_x, "(D cap Y) cup (N cap X)"),
    ):
        if any(not h.has_edge(a, b) for a in side_a for b in side_b):
            return f"{what} does not induce a biclique"
    return None


def find_bipartite_decomposition(h: Graph) -> Optional[BipartiteDecomposition]:
    """
    First decomposition found: N = A cup B with A in X, B in Y complete to each other
    (masks ascending), D = every component of H - N that fits the biclique conditions.
    """
    bp = bipartition(h)
    xs, ys = sorted(bp.class_x), sorted(bp.class_y)
    full_x, full_y = frozenset(xs), frozenset(ys)
    nxg = h.to_networkx()
    for amask in range(1 << len(xs)):
        A = frozenset(xs[i] for i in range(len(xs)) if amask >> i & 1)
        cn_a = _common_neighbours(h, A, full_y)
        cand_b = sorted(cn_a)
        for bmask in range(1 << len(cand_b)):
            B = frozenset(cand_b[i] for i in range(len(cand_b)) if bmask >> i & 1)
            if not A and not B:
                continue
            cn_b = _common_neighbours(h, B, full_x)
            N = A | B
            rest = nxg.subgraph(v for v in range(h.n) if v not in N)
            D: Set[int] = set()
            for comp in nx.connected_components(rest):
                if (comp & full_x) <= cn_b and (comp & full_y) <= cn_a:
                    D |= comp
            if len(D & full_x) >= 2 or len(D & full_y) >= 2:
                R = frozenset(range(h.n)) - N - D
                return BipartiteDecomposition(frozenset(D), N, R)
    return None


def is_undecomposable(h: Graph) -> bool:
    return find_bipartite_decomposition(h) is None


# ==========================================================
# Complement of circular-arc graphs
# ==========================================================

def find_induced_long_cycle(h: Graph, min_len: int = 6) -> Optional[Tuple[int, ...]]:
    """An induced cycle with at least min_len vertices, smallest start vertex first."""

    def extend(path: List[int]) -> Optional[List[int]]:
        s, last = path[0], path[-1]
        for v in sorted(h.adj[last]):
            if v <= s or v in path:
                continue
            if any(h.has_edge(v, p) for p in path[1:-1]):
                continue
            if len(path) >= 2 and h.has_edge(v, s):
                if len(path) + 1 >= min_len:
                    return path + [v]
                continue
            found = extend(path + [v])
            if found:
                return found
        return None

    for s in range(h.n):
        found = extend([s])
        if found:
            return tuple(found)
    return None


def verify_two_order_model(h: Graph, bp_side: Sequence[int], first: Sequence[int], second: Sequence[int]) -> bool:
    """x in X, y in Y adjacent iff x precedes y in both orders."""
    p1 = {v: i for i, v in enumerate(first)}
    p2 = {v: i for i, v in enumerate(second)}
    for x in range(h.n):
        if bp_side[x] != 0:
            continue
        for y in range(h.n):
            if bp_side[y] != 1:
                continue
            if h.has_edge(x, y) != (p1[x] < p1[y] and p2[x] < p2[y]):
                return False
    return True


def _path_model(h: Graph, comp: List[int], side: Sequence[int]) -> Tuple[List[int], List[int]]:
    ends = [v for v in comp if h.degree(v) <= 1]
    start = min(ends)
    walk = [start]
    while len(walk) < len(comp):
        walk.append(next(w for w in h.adj[walk[-1]] if w not in walk))
    # x_1 y_1 x_2 y_2 ...; a path starting in Y gets a phantom x_1
    offset = 1 if side[walk[0]] == 1 else 0
    key1: Dict[int, float] = {}
    key2: Dict[int, float] = {}
    for pos, v in enumerate(walk, start=offset):
        idx = pos // 2 + 1
        if pos % 2 == 0:
            key1[v], key2[v] = idx - 1, -idx
        else:
            key1[v], key2[v] = idx + 0.5, -idx + 0.5
    return sorted(comp, key=key1.__getitem__), sorted(comp, key=key2.__getitem__)


def _search_model(h: Graph, comp: List[int], side: Sequence[int]) -> Optional[Tuple[List[int], List[int]]]:
    """
    Backtrack over the first order: an x goes before all its neighbours, a y after
    all of its neighbours, same-class runs in increasing index. The second order
    must put every edge x -> y and, for non-adjacent x placed before y, y -> x;
    it exists iff those arcs stay acyclic.
    """
    xs = [v for v in comp if side[v] == 0]
    arcs = nx.DiGraph()
    arcs.add_nodes_from(comp)
    order: List[int] = []
    placed: Set[int] = set()

    def can_place(v: int) -> bool:
        if order and side[order[-1]] == side[v] and order[-1] > v:
            return False
        if side[v] == 0:
            return not (h.adj[v] & placed)
        return h.adj[v] <= placed

    def place_y(y: int) -> Optional[List[Tuple[int, int]]]:
        into = [x for x in xs if x in placed and h.has_edge(x, y)]
        out = [x for x in xs if x in placed and not h.has_edge(x, y)]
        # adding x -> y -> x' closes a cycle iff x' already reaches x
        for x2 in out:
            for x1 in into:
                if nx.has_path(arcs, x2, x1):
                    return None
        new = [(x, y) for x in into] + [(y, x) for x in out]
        arcs.add_edges_from(new)
        return new

    def backtrack() -> bool:
        if len(order) == len(comp):
            return True
        for v in sorted(set(comp) - placed):
            if not can_place(v):
                continue
            new: List[Tuple[int, int]] = []
            if side[v] == 1:
                got = place_y(v)
                if got is None:
                    continue
                new = got
            order.append(v)
            placed.add(v)
            if backtrack():
                return True
            order.pop()
            placed.discard(v)
            arcs.remove_edges_from(new)
        return False

    if not backtrack():
        return None
    second = list(nx.lexicographical_topological_sort(arcs))
    return order, second


def is_complement_circular_arc(h: Graph, cap: Optional[int] = None) -> CoCaResult:
    """
    Decide whether the complement of bipartite h is a circular-arc graph, using the
    equivalent two-order model (x ~ y iff x precedes y in both orders). Components
    are decided separately and stacked: increasing in the first order, reversed in
    the second.
    """
    cap = config.CA_CAP if cap is None else cap
    bp = bipartition(h)
    cycle = find_induced_long_cycle(h, 6)
    if cycle is not None:
        return CoCaResult("no", cycle)
    blocks: List[Tuple[List[int], List[int]]] = []
    for comp in h.components():
        sub_degrees = [h.degree(v) for v in comp]
        is_path = len(comp) == 1 or (max(sub_degrees) <= 2 and sum(sub_degrees) == 2 * (len(comp) - 1))
        if is_path:
            blocks.append(_path_model(h, comp, bp.side) if len(comp) > 1 else (comp, comp))
            continue
        if len(comp) > cap:
            logger.info("circular-arc oracle: component of %d vertices exceeds cap %d", len(comp), cap)
            return CoCaResult("unknown", tuple(comp))
        model = _search_model(h, comp, bp.side)
        if model is None:
            return CoCaResult("no", tuple(comp))
        blocks.append(model)
    first = [v for b1, _ in blocks for v in b1]
    second = [v for _, b2 in reversed(blocks) for v in b2]
    assert verify_two_order_model(h, bp.side, first, second)
    return CoCaResult("yes", None, (tuple(first), tuple(second)))


# ==========================================================
# i, mim, gamma
# ==========================================================

def _incomparable_subsets(h: Graph, cls: Sequence[int], strong: bool = False) -> Iterator[Tuple[int, ...]]:
    """Incomparable subsets of one class, largest first, lexicographic within a size."""
    for size in range(len(cls), 0, -1):
        for s in itertools.combinations(sorted(cls), size):
            if check_incomparable(h, s, strong).ok:
                yield s


def _best_in_classes(h: Graph, strong: bool) -> Tuple[int, FrozenSet[int]]:
    bp = bipartition(h)
    best: Tuple[int, FrozenSet[int]] = (0, frozenset())
    for cls in (bp.class_x, bp.class_y):
        if not cls:
            continue
        first = next(_incomparable_subsets(h, sorted(cls), strong), None)
        if first is not None and len(first) > best[0]:
            best = (len(first), frozenset(first))
    return best


def invariant_i(h: Graph) -> InvariantReport:
    value, s = _best_in_classes(h, strong=False)
    return InvariantReport("i", value, frozenset(range(h.n)), (s,), h)


def invariant_mim(h: Graph) -> InvariantReport:
    """Largest strongly incomparable set in a class, i.e. a maximum induced matching."""
    value, s = _best_in_classes(h, strong=True)
    sets: Tuple[FrozenSet[int], ...] = (s,)
    if s:
        res = check_incomparable(h, s, strong=True)
        sets = (s, frozenset(res.private_neighbors.values()))
    return InvariantReport("mim", value, frozenset(range(h.n)), sets, h)


def gamma_of_pair(h: Graph, s1: Iterable[int], s2: Iterable[int]) -> int:
    s2 = frozenset(s2)
    return max(len(s2 - h.adj[x]) for x in s1)


def is_gamma_pair(h: Graph, s1: Iterable[int], s2: Iterable[int]) -> bool:
    s1, s2 = frozenset(s1), frozenset(s2)
    if not s1 or not s2:
        return False
    if not (check_incomparable(h, s1).ok and check_incomparable(h, s2).ok):
        return False
    return all(h.adj[x] & s2 for x in s1) and all(h.adj[y] & s1 for y in s2)


def invariant_gamma(h: Graph) -> InvariantReport:
    """
    max over pairs (S1, S2) of incomparable sets from different classes, each member
    having a neighbour on the other side, of max_{x in S1} |S2 \\ N(x)|.
    """
    bp = bipartition(h)
    best = (0, frozenset(), frozenset())
    inc_x = [frozenset(s) for s in _incomparable_subsets(h, sorted(bp.class_x))]
    inc_y = [frozenset(s) for s in _incomparable_subsets(h, sorted(bp.class_y))]
    for left, right in ((inc_x, inc_y), (inc_y, inc_x)):
        for s1 in left:
            for s2 in right:
                if len(s2) <= best[0]:
                    continue
                if not (all(h.adj[x] & s2 for x in s1) and all(h.adj[y] & s1 for y in s2)):
                    continue
                value = gamma_of_pair(h, s1, s2)
                if value > best[0]:
                    best = (value, s1, s2)
    return InvariantReport("gamma", best[0], frozenset(range(h.n)), (best[1], best[2]), h)


_BASE = {"i": invariant_i, "mim": invariant_mim, "gamma": invariant_gamma}


# ==========================================================
# Starred invariants
# ==========================================================

def connected_induced_subsets(g: Graph) -> Iterator[FrozenSet[int]]:
    """Every connected vertex set exactly once, each grown from its smallest vertex."""

    def extend(sub: FrozenSet[int], frontier: FrozenSet[int], ext: Set[int], root: int) -> Iterator[FrozenSet[int]]:
        yield sub
        ext = set(ext)
        while ext:
            w = min(ext)
            ext.remove(w)
            exclusive = {u for u in g.adj[w] if u > root and u not in sub and u not in frontier}
            yield from extend(sub | {w}, frontier | g.adj[w], ext | exclusive, root)

    for v in range(g.n):
        yield from extend(frozenset({v}), frozenset(g.adj[v]) | {v}, {u for u in g.adj[v] if u > v}, v)


def invariant_star(h: Graph, kind: str, cap: Optional[int] = None) -> InvariantReport:
    """
    Maximum of the base invariant over connected, undecomposable induced subgraphs
    that are not complements of circular-arc graphs; non-bipartite or looped targets
    are handled through H*. gamma* is 1 when no subgraph qualifies.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown invariant {kind!r}")
    target = h
    if h.loops or not is_bipartite(h):
        target = associated_bipartite(h).graph
    base = _BASE[kind]

    best: Optional[InvariantReport] = None
    examined = 0
    for vs in sorted(connected_induced_subsets(target), key=lambda s: tuple(sorted(s))):
        if len(vs) < 4:
            continue
        sub = induced_subgraph(target, vs)
        rep = base(sub)
        if best is not None and rep.value <= best.value:
            continue
        examined += 1
        if not is_undecomposable(sub):
            continue
        ca = is_complement_circular_arc(sub, cap)
        if ca.answer == "unknown":
            keep = sorted(vs)
            raise OracleUnknown([keep[i] for i in ca.witness or ()])
        if ca.answer == "yes":
            continue
        keep = sorted(vs)
        best = InvariantReport(
            kind + "_star",
            rep.value,
            frozenset(vs),
            tuple(frozenset(keep[i] for i in s) for s in rep.sets),
            target,
        )
    logger.debug("invariant_star(%s): %d candidate subgraphs examined", kind, examined)
    if best is None:
        return InvariantReport(kind + "_star", 1 if kind == "gamma" else 0, frozenset(), (), target)
    return best


def invariant_report_problem(report: InvariantReport) -> Optional[str]:
    """Re-verify a report's witness; None when it reproduces the value."""
    g = report.graph
    if g is None:
        return "report carries no graph"
    if not report.sets or not report.vertices:
        return None if report.value in (0, 1) else "missing witness"
    base = report.kind.replace("_star", "")
    if base == "i":
        (s,) = report.sets[:1]
        return None if check_incomparable(g, s).ok and len(s) == report.value else "incomparable witness fails"
    if base == "mim":
        s = report.sets[0]
        return None if check_incomparable(g, s, strong=True).ok and len(s) == report.value else "induced matching witness fails"
    s1, s2 = report.sets
    if not is_gamma_pair(g, s1, s2):
        return "gamma pair fails the mutual-neighbour condition"
    return None if gamma_of_pair(g, s1, s2) == report.value else "gamma value mismatch"
