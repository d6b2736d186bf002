# lib/layouts.py
"""
Linear layouts (cutwidth), feedback vertex sets and the two decomposition conversions.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from lib import config
from lib.errors import NoLayout, SizeCapExceeded
from lib.graphs import Graph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearLayout:
    order: Tuple[int, ...]
    width: int


@dataclass(frozen=True)
class FeedbackSet:
    vertices: FrozenSet[int]


@dataclass(frozen=True)
class TreeDecomposition:
    tree: Graph
    bags: Tuple[FrozenSet[int], ...]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1


# ==========================================================
# Cutwidth
# ==========================================================

def cut_profile(g: Graph, order: Sequence[int]) -> np.ndarray:
    """Entry p = number of edges between order[:p+1] and order[p+1:]."""
    n = g.n
    if sorted(order) != list(range(n)):
        raise NoLayout(f"order is not a permutation of the {n} vertices")
    pos = np.empty(n, dtype=np.int64)
    pos[np.asarray(order, dtype=np.int64)] = np.arange(n)
    diff = np.zeros(n + 1, dtype=np.int64)
    for u, v in g.edges:
        if u == v:
            continue
        a, b = sorted((int(pos[u]), int(pos[v])))
        diff[a] += 1
        diff[b] -= 1
    return np.cumsum(diff)[:n]


def cutwidth_of_order(g: Graph, order: Sequence[int]) -> int:
    prof = cut_profile(g, order)
    return int(prof.max()) if len(prof) else 0


def make_layout(g: Graph, order: Sequence[int]) -> LinearLayout:
    return LinearLayout(tuple(order), cutwidth_of_order(g, order))


def exact_cutwidth(g: Graph, cap: Optional[int] = None) -> LinearLayout:
    """
    Minimum-width layout by dynamic programming over placed sets.
    best[S] = min over last vertex v in S of max(best[S - v], cut(S)).
    """
    cap = config.CUTWIDTH_CAP if cap is None else cap
    n = g.n
    if n > cap:
        raise SizeCapExceeded("exact_cutwidth", n, cap)
    if n == 0:
        return LinearLayout((), 0)

    masks = np.arange(1 << n, dtype=np.int64)
    cut = np.zeros(1 << n, dtype=np.int32)
    for u, v in g.edges:
        if u != v:
            cut += (((masks >> u) ^ (masks >> v)) & 1).astype(np.int32)
    popcount = np.zeros(1 << n, dtype=np.int8)
    for v in range(n):
        popcount += ((masks >> v) & 1).astype(np.int8)

    inf = np.iinfo(np.int32).max
    best = np.full(1 << n, inf, dtype=np.int32)
    best[0] = 0
    for k in range(1, n + 1):
        layer = masks[popcount == k]
        cand = np.full(len(layer), inf, dtype=np.int32)
        for v in range(n):
            has = ((layer >> v) & 1).astype(bool)
            prev = best[layer[has] ^ (1 << v)]
            cand[has] = np.minimum(cand[has], prev)
        best[layer] = np.maximum(cand, cut[layer])

    # walk back from the full set, removing the lowest admissible last vertex
    order: List[int] = []
    mask = (1 << n) - 1
    while mask:
        for v in range(n):
            if mask >> v & 1 and max(best[mask ^ (1 << v)], cut[mask]) == best[mask]:
                order.append(v)
                mask ^= 1 << v
                break
    order.reverse()
    layout = make_layout(g, order)
    assert layout.width == int(best[-1])
    return layout


def greedy_layout(g: Graph) -> LinearLayout:
    """Start at a minimum-degree vertex, then always place the vertex that leaves the smallest cut."""
    n = g.n
    if n == 0:
        return LinearLayout((), 0)
    placed: Set[int] = set()
    order: List[int] = []
    cut = 0
    start = min(range(n), key=lambda v: (g.degree(v), v))
    remaining = set(range(n))
    nxt = start
    while True:
        # edges to placed vertices leave the cut, the others join it
        to_placed = len((g.adj[nxt] - {nxt}) & placed)
        cut += len(g.adj[nxt] - {nxt}) - 2 * to_placed
        placed.add(nxt)
        remaining.discard(nxt)
        order.append(nxt)
        if not remaining:
            break
        nxt = min(
            remaining,
            key=lambda v: (len(g.adj[v] - {v}) - 2 * len((g.adj[v] - {v}) & placed), v),
        )
    return make_layout(g, order)


# ==========================================================
# Feedback vertex sets
# ==========================================================

def _strip_trees(adj: Dict[int, Set[int]]) -> Dict[int, Set[int]]:
    adj = {v: set(nb) for v, nb in adj.items()}
    queue = deque(v for v, nb in adj.items() if len(nb) <= 1)
    while queue:
        v = queue.popleft()
        if v not in adj or len(adj[v]) > 1:
            continue
        for w in adj.pop(v):
            adj[w].discard(v)
            if len(adj[w]) <= 1:
                queue.append(w)
    return adj


def _shortest_cycle(adj: Dict[int, Set[int]]) -> Optional[List[int]]:
    best: Optional[List[int]] = None
    for s in sorted(adj):
        parent: Dict[int, Optional[int]] = {s: None}
        dist = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if best is not None and 2 * dist[u] >= len(best):
                break
            for w in sorted(adj[u]):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    cyc = _close_cycle(_tree_path(parent, u), _tree_path(parent, w))
                    if best is None or len(cyc) < len(best):
                        best = cyc
    return best


def _tree_path(parent: Dict[int, Optional[int]], v: int) -> List[int]:
    out = [v]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])  # type: ignore[arg-type]
    return list(reversed(out))


def _close_cycle(pu: List[int], pw: List[int]) -> List[int]:
    """Two root paths joined by the edge u-w; cut them at their last common vertex."""
    c = 0
    while c < min(len(pu), len(pw)) and pu[c] == pw[c]:
        c += 1
    return pu[c - 1:] + list(reversed(pw[c:]))


def exact_fvs(g: Graph, cap: Optional[int] = None) -> FeedbackSet:
    """Minimum feedback vertex set by iterative deepening, branching on a shortest cycle."""
    cap = config.FVS_CAP if cap is None else cap
    if g.n > cap:
        raise SizeCapExceeded("exact_fvs", g.n, cap)
    forced = set(g.loops)
    adj = {v: set(g.adj[v]) - {v} for v in range(g.n) if v not in forced}
    for v in adj:
        adj[v] -= forced

    def solve(adj: Dict[int, Set[int]], budget: int) -> Optional[Set[int]]:
        adj = _strip_trees(adj)
        if not adj:
            return set()
        if budget == 0:
            return None
        cycle = _shortest_cycle(adj)
        assert cycle is not None
        for v in sorted(cycle):
            rest = {u: nb - {v} for u, nb in adj.items() if u != v}
            sub = solve(rest, budget - 1)
            if sub is not None:
                return sub | {v}
        return None

    k = 0
    while True:
        found = solve(adj, k)
        if found is not None:
            fs = FeedbackSet(frozenset(found | forced))
            logger.debug("exact_fvs: size %d", len(fs.vertices))
            return fs
        k += 1


def is_feedback_set(g: Graph, f: Iterable[int]) -> bool:
    f = set(f)
    if g.loops - f:
        return False
    rest = g.to_networkx()
    rest.remove_nodes_from(f)
    rest.remove_edges_from(nx.selfloop_edges(rest))
    return nx.is_forest(rest) if rest.number_of_nodes() else True


# ==========================================================
# Decompositions
# ==========================================================

def fvs_to_tree_decomposition(g: Graph, f: FeedbackSet) -> TreeDecomposition:
    """
    Bags {v, parent(v)} of the rooted forest G - F, with F added to every bag.
    Roots of later trees hang off the first root bag.
    """
    if not is_feedback_set(g, f.vertices):
        raise ValueError("not a feedback vertex set")
    F = frozenset(f.vertices)
    rest = [v for v in range(g.n) if v not in F]
    if not rest:
        return TreeDecomposition(Graph.from_edges(1, []), (F,))

    bag_of: Dict[int, int] = {}
    bags: List[FrozenSet[int]] = []
    tree_edges: List[Tuple[int, int]] = []
    first_root_bag: Optional[int] = None
    for root in rest:
        if root in bag_of:
            continue
        bag_of[root] = len(bags)
        bags.append(F | {root})
        if first_root_bag is None:
            first_root_bag = bag_of[root]
        else:
            tree_edges.append((first_root_bag, bag_of[root]))
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in sorted(g.adj[u]):
                if w in F or w in bag_of:
                    continue
                bag_of[w] = len(bags)
                bags.append(F | {u, w})
                tree_edges.append((bag_of[u], bag_of[w]))
                queue.append(w)
    td = TreeDecomposition(Graph.from_edges(len(bags), tree_edges), tuple(bags))
    problem = validate_tree_decomposition(g, td)
    if problem:
        raise AssertionError(f"fvs_to_tree_decomposition: {problem}")
    return td


def layout_to_path_decomposition(g: Graph, layout: LinearLayout) -> TreeDecomposition:
    order = list(layout.order)
    n = len(order)
    pos = {v: i for i, v in enumerate(order)}
    last = {v: max([pos[w] for w in g.adj[v]] + [pos[v]]) for v in order}
    bags = []
    for p in range(n):
        bag = {order[i] for i in range(p) if last[order[i]] >= p}
        bag.add(order[p])
        bags.append(frozenset(bag))
    path = Graph.from_edges(max(n, 1), [(i, i + 1) for i in range(n - 1)])
    td = TreeDecomposition(path, tuple(bags) if bags else (frozenset(),))
    problem = validate_tree_decomposition(g, td)
    if problem:
        raise AssertionError(f"layout_to_path_decomposition: {problem}")
    return td


def validate_tree_decomposition(g: Graph, td: TreeDecomposition) -> Optional[str]:
    """None if td is a tree decomposition of g, else the first failing condition."""
    if len(td.bags) != td.tree.n or td.tree.n == 0:
        return "bag count does not match tree"
    if not nx.is_tree(td.tree.to_networkx()):
        return "decomposition graph is not a tree"
    covered = set().union(*td.bags)
    missing = set(range(g.n)) - covered
    if missing:
        return f"vertex {g.label(min(missing))} in no bag"
    for u, v in sorted(g.edges):
        if not any(u in b and v in b for b in td.bags):
            return f"edge {g.label(u)}{g.label(v)} in no bag"
    tree = td.tree.to_networkx()
    for v in range(g.n):
        holding = [t for t, b in enumerate(td.bags) if v in b]
        if not nx.is_connected(tree.subgraph(holding)):
            return f"bags holding {g.label(v)} are not connected"
    return None
