# lib/graphs.py
"""
Graphs with loops, bipartitions, incomparable sets and the associated bipartite graph.

Vertices are dense indices 0..n-1. Labels are only used by file formats and reports.
A loop at v is stored as the edge (v, v); N(v) then contains v and the loop counts
once towards deg(v).
"""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from lib.errors import NotBipartite

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def _norm(u: int, v: int) -> Edge:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: FrozenSet[Edge]
    labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("vertex count must be nonnegative")
        for u, v in self.edges:
            if not (0 <= u <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range or not normalized for n={self.n}")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.n)))
        elif len(self.labels) != self.n:
            raise ValueError(f"{len(self.labels)} labels for {self.n} vertices")

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[Tuple[int, int]], labels: Optional[Sequence[str]] = None
    ) -> "Graph":
        return cls(n, frozenset(_norm(u, v) for u, v in edges), tuple(labels) if labels else ())

    # ---------- adjacency ----------

    @cached_property
    def adj(self) -> Tuple[FrozenSet[int], ...]:
        nb: List[set] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return tuple(frozenset(s) for s in nb)

    @cached_property
    def _label_index(self) -> Dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(self.n)

    def neighbors(self, v: int) -> FrozenSet[int]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def has_loop(self, v: int) -> bool:
        return v in self.adj[v]

    @cached_property
    def loops(self) -> FrozenSet[int]:
        return frozenset(u for u, v in self.edges if u == v)

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def label(self, v: int) -> str:
        return self.labels[v]

    def index(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise KeyError(f"unknown vertex label {label!r}")

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(self.edges)
        return G

    def components(self) -> List[List[int]]:
        """Connected components, each sorted, ordered by their lowest vertex."""
        comps = [sorted(c) for c in nx.connected_components(self.to_networkx())]
        return sorted(comps, key=lambda c: c[0])

    def is_connected(self) -> bool:
        return self.n == 0 or len(self.components()) == 1


@dataclass(frozen=True)
class Bipartition:
    class_x: FrozenSet[int]
    class_y: FrozenSet[int]
    side: Tuple[int, ...]  # 0 for class_x, 1 for class_y

    def same_class(self, u: int, v: int) -> bool:
        return self.side[u] == self.side[v]

    def class_of(self, v: int) -> FrozenSet[int]:
        return self.class_x if self.side[v] == 0 else self.class_y

    def other_class(self, v: int) -> FrozenSet[int]:
        return self.class_y if self.side[v] == 0 else self.class_x


@dataclass(frozen=True)
class IncomparabilityWitness:
    set: FrozenSet[int]
    kind: str  # "incomparable" | "strongly_incomparable"
    private_neighbors: Dict[int, int] = field(default_factory=dict)
    # for every ordered pair (u, v): some u' in N(u) \ N(v)
    separators: Dict[Tuple[int, int], int] = field(default_factory=dict)

    ok = True


@dataclass(frozen=True)
class IncomparabilityFailure:
    reason: str
    pair: Tuple[int, Optional[int]]

    ok = False


@dataclass(frozen=True)
class PairedGraph:
    """H* together with the pairing v <-> (v', v'')."""

    graph: Graph
    prime: Tuple[int, ...]
    double_prime: Tuple[int, ...]
    origin: Tuple[Tuple[int, int], ...]  # H* vertex -> (v, 0 for ' / 1 for '')


@dataclass(frozen=True)
class GraphMetrics:
    girth: Union[int, float]
    max_degree: int
    distances: Optional[Dict[int, Dict[int, int]]] = None


# ==========================================================
# Bipartition
# ==========================================================

def _odd_walk(parent: Dict[int, Optional[int]], u: int, v: int) -> List[int]:
    def up(x: int) -> List[int]:
        out = [x]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])  # type: ignore[arg-type]
        return out

    pu, pv = up(u), up(v)
    # root ... u, then v ... root closes an odd walk
    return list(reversed(pu)) + pv


def bipartition(g: Graph) -> Bipartition:
    """
    2-colour every component by BFS; the lowest vertex of each component goes to class_x.
    Raises NotBipartite with an odd closed walk ([v, v] for a loop).
    """
    for v in sorted(g.loops):
        raise NotBipartite([v, v])

    side: List[int] = [-1] * g.n
    for root in range(g.n):
        if side[root] != -1:
            continue
        side[root] = 0
        parent: Dict[int, Optional[int]] = {root: None}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in sorted(g.adj[u]):
                if side[w] == -1:
                    side[w] = 1 - side[u]
                    parent[w] = u
                    queue.append(w)
                elif side[w] == side[u]:
                    raise NotBipartite(_odd_walk(parent, u, w))

    xs = frozenset(v for v in range(g.n) if side[v] == 0)
    ys = frozenset(v for v in range(g.n) if side[v] == 1)
    return Bipartition(xs, ys, tuple(side))


def is_bipartite(g: Graph) -> bool:
    try:
        bipartition(g)
    except NotBipartite:
        return False
    return True


# ==========================================================
# Associated bipartite graph H*
# ==========================================================

def associated_bipartite(h: Graph) -> PairedGraph:
    n = h.n
    edges = set()
    for u, v in h.edges:
        edges.add((u, n + v))
        edges.add((v, n + u))
    labels = [f"{lab}'" for lab in h.labels] + [f"{lab}''" for lab in h.labels]
    star = Graph.from_edges(2 * n, edges, labels)
    origin = tuple((v, 0) for v in range(n)) + tuple((v, 1) for v in range(n))
    return PairedGraph(star, tuple(range(n)), tuple(range(n, 2 * n)), origin)


# ==========================================================
# Incomparability
# ==========================================================

def check_incomparable(
    h: Graph, s: Iterable[int], strong: bool = False
) -> Union[IncomparabilityWitness, IncomparabilityFailure]:
    members = sorted(set(s))
    if not members:
        raise ValueError("check_incomparable needs a nonempty set")

    separators: Dict[Tuple[int, int], int] = {}
    for u in members:
        for v in members:
            if u == v:
                continue
            diff = h.adj[u] - h.adj[v]
            if not diff:
                return IncomparabilityFailure(
                    f"N({h.label(u)}) is contained in N({h.label(v)})", (u, v)
                )
            separators[(u, v)] = min(diff)

    if not strong:
        return IncomparabilityWitness(frozenset(members), "incomparable", {}, separators)

    private: Dict[int, int] = {}
    for u in members:
        others = [w for w in members if w != u]
        cands = [p for p in sorted(h.adj[u]) if not any(h.has_edge(p, w) for w in others)]
        if not cands:
            return IncomparabilityFailure(f"{h.label(u)} has no private neighbor", (u, None))
        private[u] = cands[0]
    return IncomparabilityWitness(frozenset(members), "strongly_incomparable", private, separators)


# ==========================================================
# Metrics
# ==========================================================

def girth(g: Graph, below: Optional[int] = None) -> Union[int, float]:
    """
    Length of a shortest cycle (inf for forests, 1 with a loop).

    With `below` set, BFS balls are cut at radius below//2 + 1: the result is exact
    whenever it is < below, otherwise some value >= below (possibly inf).
    """
    if g.loops:
        return 1
    best: Union[int, float] = math.inf
    radius = None if below is None else below // 2 + 1
    for s in range(g.n):
        dist = {s: 0}
        parent = {s: -1}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] >= best:
                break
            if radius is not None and dist[u] >= radius:
                continue
            for w in g.adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def graph_metrics(g: Graph, with_distances: bool = True) -> GraphMetrics:
    distances = None
    if with_distances:
        distances = {s: dict(d) for s, d in nx.all_pairs_shortest_path_length(g.to_networkx())}
    return GraphMetrics(girth(g), g.max_degree, distances)


def in_class_cg(g: Graph, girth_bound: int) -> Optional[str]:
    """
    None when g is subcubic bipartite with girth >= girth_bound and degree-3
    vertices pairwise at distance >= girth_bound, else the failing condition.
    """
    if not is_bipartite(g):
        return "not bipartite"
    if g.max_degree > 3:
        return f"max degree {g.max_degree} > 3"
    gi = girth(g, below=girth_bound)
    if gi < girth_bound:
        return f"girth {gi} < {girth_bound}"
    nxg = g.to_networkx()
    heavy = {v for v in range(g.n) if g.degree(v) >= 3}
    for v in sorted(heavy):
        near = nx.single_source_shortest_path_length(nxg, v, cutoff=girth_bound - 1)
        for w, d in near.items():
            if w != v and w in heavy:
                return f"degree-3 vertices {g.label(v)} and {g.label(w)} at distance {d} < {girth_bound}"
    return None


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> Graph:
    """Induced subgraph; new index i corresponds to sorted(vertices)[i]."""
    keep = sorted(set(vertices))
    pos = {v: i for i, v in enumerate(keep)}
    edges = [(pos[u], pos[v]) for u, v in g.edges if u in pos and v in pos]
    return Graph.from_edges(len(keep), edges, [g.labels[v] for v in keep])


# ==========================================================
# Families
# ==========================================================

def path_graph(n: int, prefix: str = "v") -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], [f"{prefix}{i + 1}" for i in range(n)])


def cycle_graph(n: int, prefix: str = "w") -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], [f"{prefix}{i + 1}" for i in range(n)])


def complete_graph(k: int) -> Graph:
    return Graph.from_edges(k, [(i, j) for i in range(k) for j in range(i + 1, k)], [f"k{i + 1}" for i in range(k)])


def complete_bipartite(a: int, b: int) -> Graph:
    edges = [(i, a + j) for i in range(a) for j in range(b)]
    labels = [f"x{i}" for i in range(a)] + [f"y{j}" for j in range(b)]
    return Graph.from_edges(a + b, edges, labels)


def crown_graph(r: int) -> Graph:
    """K_{r,r} minus a perfect matching: x_i ~ y_j iff i != j."""
    edges = [(i, r + j) for i in range(r) for j in range(r) if i != j]
    labels = [f"x{i}" for i in range(r)] + [f"y{j}" for j in range(r)]
    return Graph.from_edges(2 * r, edges, labels)


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)], ["c"] + [f"l{i}" for i in range(1, leaves + 1)])


def random_graph(n: int, density: float, seed: int, loops: bool = False) -> Graph:
    """G(n, p) with an optional loop per vertex at the same rate; fully determined by seed."""
    rng = np.random.default_rng(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < density]
    if loops:
        edges += [(v, v) for v in range(n) if rng.random() < density]
    return Graph.from_edges(n, edges)
