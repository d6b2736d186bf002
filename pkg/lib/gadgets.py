# lib/gadgets.py
"""
Gadgets for the CNF-SAT reductions.

A gadget is a graph with H-lists and named interface vertices. Its relation is
the set of interface tuples realized by list homomorphisms; every builder
computes it by enumeration and checks it against the relation the gadget is
meant to realize.

Lists along paths are written as sequences of vertex sets. When the corner
triple comes from an induced C6 / C8 the lists are given explicitly in terms of
the cycle vertices w1..w8; otherwise they are built from the triple's walk
certificates.
"""
from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from lib import config
from lib.errors import PreconditionViolated, SynthesisBudgetExceeded
from lib.graphs import Graph, bipartition, check_incomparable, girth
from lib.instances import BcspInstance, ListInstance, lhom_to_bcsp
from lib.solvers import brute_force
from lib.walks import CornerTriple, Walk, avoids, is_walk

logger = logging.getLogger(__name__)

Lists = Tuple[FrozenSet[int], ...]
Relation = FrozenSet[Tuple[int, ...]]


@dataclass(frozen=True)
class Gadget:
    kind: str
    h: Graph
    graph: Graph
    lists: Lists
    interface: Tuple[Tuple[str, int], ...]
    relation: Relation
    meta: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def vertex(self, name: str) -> int:
        for key, v in self.interface:
            if key == name:
                return v
        raise KeyError(f"{self.kind} gadget has no interface vertex {name!r}")

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(k for k, _ in self.interface)

    @property
    def instance(self) -> ListInstance:
        return ListInstance(self.graph, self.h, self.lists)

    @property
    def path(self) -> Optional[Tuple[int, ...]]:
        return self.meta.get("path")

    def path_lists(self) -> List[FrozenSet[int]]:
        if self.path is None:
            raise ValueError(f"{self.kind} gadget is not a path")
        return [self.lists[v] for v in self.path]

    def project(self, *names: str) -> Relation:
        idx = [self.names.index(n) for n in names]
        return frozenset(tuple(row[i] for i in idx) for row in self.relation)


# ==========================================================
# Relations
# ==========================================================

def _adjacency(h: Graph) -> np.ndarray:
    adj = np.zeros((h.n, h.n), dtype=np.int64)
    for u, v in h.edges:
        adj[u, v] = adj[v, u] = 1
    return adj


def _mask(h: Graph, lst: Iterable[int]) -> np.ndarray:
    m = np.zeros(h.n, dtype=bool)
    m[list(lst)] = True
    return m


def path_relation(h: Graph, lists: Sequence[Iterable[int]]) -> Relation:
    """(value of the first, value of the last) over list homomorphisms of a path."""
    adj = _adjacency(h)
    reach = np.diag(_mask(h, lists[0])).astype(np.int64)
    for lst in lists[1:]:
        reach = ((reach @ adj) > 0) & _mask(h, lst)[None, :]
        reach = reach.astype(np.int64)
    rows, cols = np.nonzero(reach)
    return frozenset((int(a), int(b)) for a, b in zip(rows, cols))


def join(r1: Relation, r2: Relation) -> Relation:
    """Relational composition of binary relations."""
    by_first: Dict[int, Set[int]] = {}
    for a, b in r2:
        by_first.setdefault(a, set()).add(b)
    return frozenset((a, c) for a, b in r1 for c in by_first.get(b, ()))


def enumerate_relation(
    h: Graph, graph: Graph, lists: Sequence[FrozenSet[int]], iface: Sequence[int], node_budget: Optional[int] = None
) -> Relation:
    """
    Every interface tuple, decided by brute force with the interface branched first.
    Gadgets minus their x-vertex are trees, so this is exact without real search.
    """
    b = lhom_to_bcsp(ListInstance(graph, h, tuple(lists)))
    cons = [(c.u, c.v, c.allowed) for c in b.constraints]
    out = set()
    for combo in itertools.product(*(sorted(lists[v]) for v in iface)):
        fixed: Dict[int, int] = {}
        if any(fixed.setdefault(v, a) != a for v, a in zip(iface, combo)):
            continue
        doms = list(b.domains)
        for v, a in fixed.items():
            doms[v] = b.domains[v] & {a + 1}
        sub = BcspInstance.build(b.variables, doms, cons)
        if brute_force(sub, node_budget=node_budget, branch_priority=list(iface)).satisfiable:
            out.add(combo)
    return frozenset(out)


# ==========================================================
# Canvas: vertices, paths and embedded gadgets
# ==========================================================

class Canvas:
    """Mutable graph-with-lists that gadgets are glued into."""

    def __init__(self, h: Graph):
        self.h = h
        self.lists: List[Set[int]] = []
        self.labels: List[str] = []
        self.edges: Set[Tuple[int, int]] = set()

    @property
    def n(self) -> int:
        return len(self.lists)

    def add(self, lst: Iterable[int], label: str) -> int:
        self.lists.append(set(lst))
        self.labels.append(label)
        return len(self.lists) - 1

    def restrict(self, v: int, lst: Iterable[int]) -> None:
        self.lists[v] &= set(lst)

    def link(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError(f"loop at {self.labels[u]}")
        self.edges.add((min(u, v), max(u, v)))

    def path(self, lists: Sequence[Iterable[int]], label: str, start: Optional[int] = None) -> List[int]:
        """A fresh path with the given lists; when start is given it is the first vertex."""
        out: List[int] = []
        for i, lst in enumerate(lists):
            if i == 0 and start is not None:
                self.restrict(start, lst)
                v = start
            else:
                v = self.add(lst, f"{label}.{i}")
            if out:
                self.link(out[-1], v)
            out.append(v)
        return out

    def embed(
        self,
        gadget: Gadget,
        tag: str,
        glue: Optional[Mapping[str, int]] = None,
        split: Optional[Mapping[str, Callable[[], int]]] = None,
    ) -> Dict[int, int]:
        """
        Copy a gadget in. Interface vertices named in `glue` are identified with
        existing vertices (lists intersected); those named in `split` are not
        created and each of their edges goes to a fresh vertex from the factory.
        Returns gadget vertex -> canvas vertex for the created or glued vertices.
        """
        glue = glue or {}
        split = split or {}
        glued = {gadget.vertex(k): v for k, v in glue.items()}
        factories = {gadget.vertex(k): f for k, f in split.items()}
        mapping: Dict[int, int] = {}
        for v in range(gadget.graph.n):
            if v in factories:
                continue
            if v in glued:
                self.restrict(glued[v], gadget.lists[v])
                mapping[v] = glued[v]
            else:
                mapping[v] = self.add(gadget.lists[v], f"{tag}.{gadget.graph.label(v)}")
        for a, b in sorted(gadget.graph.edges):
            if a in factories and b in factories:
                raise ValueError("split interface vertices are adjacent")
            if a in factories:
                self.link(factories[a](), mapping[b])
            elif b in factories:
                self.link(mapping[a], factories[b]())
            else:
                self.link(mapping[a], mapping[b])
        return mapping

    def graph(self) -> Graph:
        return Graph.from_edges(self.n, self.edges, self.labels)

    def frozen_lists(self) -> Lists:
        return tuple(frozenset(l) for l in self.lists)


def _finish(
    kind: str, cv: Canvas, interface: Sequence[Tuple[str, int]], meta: Dict[str, Any], path: Optional[Sequence[int]] = None
) -> Gadget:
    graph, lists = cv.graph(), cv.frozen_lists()
    iface = [v for _, v in interface]
    if path is not None and [v for _, v in interface] == [path[0], path[-1]]:
        relation = path_relation(cv.h, [lists[v] for v in path])
    else:
        relation = enumerate_relation(cv.h, graph, lists, iface)
    if path is not None:
        meta = dict(meta, path=tuple(path))
    return Gadget(kind, cv.h, graph, lists, tuple(interface), relation, meta)


def path_gadget(
    h: Graph,
    lists: Sequence[Iterable[int]],
    kind: str = "path",
    marks: Optional[Mapping[str, int]] = None,
    meta: Optional[Dict[str, Any]] = None,
) -> Gadget:
    """Path with the given lists; interface x (first), y (last) unless marks name positions."""
    cv = Canvas(h)
    vs = cv.path(lists, kind)
    marks = marks or {"x": 0, "y": len(vs) - 1}
    return _finish(kind, cv, [(k, vs[i]) for k, i in marks.items()], dict(meta or {}), vs)


def chain_lists(*pieces: Sequence[FrozenSet[int]]) -> List[FrozenSet[int]]:
    """Concatenate list sequences, identifying the last vertex of each with the first of the next."""
    out: List[FrozenSet[int]] = []
    for piece in pieces:
        piece = [frozenset(l) for l in piece]
        if out:
            out[-1] = out[-1] & piece[0]
            out.extend(piece[1:])
        else:
            out.extend(piece)
    return out


def compose_paths(p1: Gadget, p2: Gadget) -> Gadget:
    """Output of p1 glued to the input of p2."""
    lists = chain_lists(p1.path_lists(), p2.path_lists())
    return path_gadget(p1.h, lists, "path", meta={k: v for k, v in p1.meta.items() if k == "triple"})


# ==========================================================
# Walk paths
# ==========================================================

def walk_lists(walks: Sequence[Walk]) -> List[FrozenSet[int]]:
    return [frozenset(w[i] for w in walks) for i in range(len(walks[0]))]


def build_walk_path(h: Graph, group_a: Sequence[Walk], group_b: Sequence[Walk], mutual: bool = False) -> Gadget:
    """
    The path whose i-th list holds the i-th vertices of all walks. Starts in A never
    reach ends in B; with mutual avoidance starts in B never reach ends in A either.
    """
    walks = list(group_a) + list(group_b)
    if not group_a or not group_b:
        raise PreconditionViolated("both walk groups must be nonempty")
    if len({w.length for w in walks}) != 1:
        raise PreconditionViolated("walks of unequal length")
    if walks[0].length < 1:
        raise PreconditionViolated("walks must have length at least 1")
    if not all(is_walk(h, w.vertices) for w in walks):
        raise PreconditionViolated("not a walk in H")
    s_a, s_b = {w.start for w in group_a}, {w.start for w in group_b}
    t_a, t_b = {w.end for w in group_a}, {w.end for w in group_b}
    if s_a & s_b:
        raise PreconditionViolated("S(A) and S(B) intersect")
    if t_a & t_b:
        raise PreconditionViolated("T(A) and T(B) intersect")
    if not all(avoids(h, p, q) for p in group_a for q in group_b):
        raise PreconditionViolated("A does not avoid B")
    if mutual and not all(avoids(h, q, p) for p in group_a for q in group_b):
        raise PreconditionViolated("B does not avoid A")
    meta = {
        "walks": tuple(walks),
        "S_A": frozenset(s_a),
        "S_B": frozenset(s_b),
        "T_A": frozenset(t_a),
        "T_B": frozenset(t_b),
        "mutual": mutual,
    }
    return path_gadget(h, walk_lists(walks), "walk_path", meta=meta)


# ==========================================================
# Extenders
# ==========================================================

def extender_lists(t: CornerTriple, length: int) -> List[FrozenSet[int]]:
    """{a,b},{a',b'},...,{a,b} of even length >= length."""
    length += length % 2
    ab, ab_prime = frozenset({t.alpha, t.beta}), frozenset({t.alpha_prime, t.beta_prime})
    return [ab if i % 2 == 0 else ab_prime for i in range(length + 1)]


def extend_path(gadget: Gadget, at: str, length: int, triple: Optional[CornerTriple] = None) -> Gadget:
    """
    Hang an extender of even length >= length at interface vertex `at` (list within
    {alpha, beta}); its far end takes over the name. The relation is unchanged.
    """
    t = triple or gadget.meta["triple"]
    if length <= 0:
        return gadget
    v = gadget.vertex(at)
    if not gadget.lists[v] <= {t.alpha, t.beta}:
        raise PreconditionViolated(f"list of {at} is not within {{alpha, beta}}")
    ext = extender_lists(t, length)
    path = gadget.path
    if path is not None and v in (path[0], path[-1]):
        lists = gadget.path_lists()
        if v == path[0]:
            lists = chain_lists(list(reversed(ext)), lists)
            shift = len(ext) - 1
            marks = {k: (0 if u == v else shift + path.index(u)) for k, u in gadget.interface}
        else:
            lists = chain_lists(lists, ext)
            marks = {k: (len(lists) - 1 if u == v else path.index(u)) for k, u in gadget.interface}
        return path_gadget(gadget.h, lists, gadget.kind, marks, gadget.meta)

    cv = Canvas(gadget.h)
    mapping = cv.embed(gadget, gadget.kind)
    tail = cv.path(ext, "ext", start=mapping[v])
    interface = [(k, tail[-1] if u == v else mapping[u]) for k, u in gadget.interface]
    return _finish(gadget.kind, cv, interface, dict(gadget.meta))


def path_length(gadget: Gadget, a: str, b: str) -> int:
    return nx.shortest_path_length(gadget.graph.to_networkx(), gadget.vertex(a), gadget.vertex(b))


# ==========================================================
# Explicit lists for the cycle cases
# ==========================================================

def _w(t: CornerTriple, *idx: int) -> FrozenSet[int]:
    return frozenset(t.w(i) for i in idx)


def _cycle_lists(t: CornerTriple, table: Mapping[str, Sequence[Sequence[int]]], key: str) -> List[FrozenSet[int]]:
    return [_w(t, *ix) for ix in table[key]]


_NAND2 = {
    "C6": [(1, 5), (2, 6), (1, 3), (2, 4), (1, 5)],
    "C8": [(1, 5), (2, 4, 8), (1, 3, 7), (2, 6), (1, 5)],
}

# x = {w1, w5} first, the shared centre {w1, w3, w5} last
_R = {
    ("C6", "alpha"): [(1, 5), (4, 6), (3, 5), (2, 4), (1, 3, 5)],
    ("C6", "beta"): [(1, 5), (4, 6), (1, 3), (2, 4), (1, 3, 5)],
    ("C6", "gamma"): [(1, 5), (4, 6), (1, 3, 5)],
    ("C8", "alpha"): [(1, 5), (4, 8), (5, 7), (4, 6), (3, 5), (2, 4), (1, 3, 5)],
    ("C8", "beta"): [(1, 5), (4, 8), (1, 3), (2, 4), (1, 3, 5)],
    ("C8", "gamma"): [(1, 5), (6, 8), (5, 7), (4, 6, 8), (1, 3, 5)],
}

_P_U = {
    "C6": [(1, 5), (2, 6), (1, 3, 5)],
    "C8": [(1, 5), (2, 6), (1, 3, 7), (2, 4, 6, 8), (1, 3, 5)],
}

_SWITCH = [(1, 5), (2, 4), (1, 3, 5), (2, 4), (1, 5)]


def _walks(t: CornerTriple, c: str, reverse: bool = False) -> List[Walk]:
    out = [t.walk(f"X_{c}"), t.walk(f"Y_{c}"), t.walk(f"Z_{c}")]
    return [w.reversed() for w in out] if reverse else out


def _cyclic(t: CornerTriple) -> bool:
    return t.case in ("C6", "C8")


# ==========================================================
# Relation gadgets
# ==========================================================

def _ab(t: CornerTriple) -> Tuple[int, int]:
    return (t.alpha, t.beta)


def or_relation(t: CornerTriple, k: int) -> Relation:
    return frozenset(r for r in itertools.product(_ab(t), repeat=k) if r != (t.alpha,) * k)


def nand_relation(t: CornerTriple, k: int) -> Relation:
    return frozenset(r for r in itertools.product(_ab(t), repeat=k) if r != (t.beta,) * k)


def switching_problems(t: CornerTriple, relation: Relation) -> List[str]:
    """S2-S4 over (p, q, r) tuples; empty when the relation switches correctly."""
    a, b, c = t.core
    bad = []
    if any(not any((e, q, e) in relation for q in (a, b)) for e in (a, b)):
        bad.append("S2")
    if (a, c, b) not in relation:
        bad.append("S3")
    if any(p == a and r == b and q != c for p, q, r in relation):
        bad.append("S4")
    return bad


def _expect(gadget: Gadget, relation: Relation, what: str) -> Gadget:
    if gadget.relation != relation:
        logger.error("%s relation mismatch: got %s", what, sorted(gadget.relation))
        raise PreconditionViolated(f"{what} does not realize its relation (bad corner triple?)")
    return gadget


@lru_cache(maxsize=None)
def build_nand2(h: Graph, triple: CornerTriple, g: int = 0) -> Gadget:
    """NAND_2 on {alpha, beta}: a path of length >= g with both ends as interface."""
    t = triple
    if _cyclic(t):
        lists = _cycle_lists(t, _NAND2, t.case)
    else:
        lists = chain_lists(walk_lists(_walks(t, "gamma")), walk_lists(_walks(t, "alpha", reverse=True)))
    gadget = path_gadget(h, lists, "nand2", {"x1": 0, "x2": len(lists) - 1}, {"triple": t, "g": g})
    gadget = extend_path(gadget, "x2", g - (len(lists) - 1))
    return _expect(gadget, nand_relation(t, 2), "NAND_2")


def r_lists(h: Graph, t: CornerTriple, c: str) -> List[FrozenSet[int]]:
    """Path x -> y realizing {alpha,beta} x {alpha,beta,gamma} minus (alpha, c)."""
    if _cyclic(t):
        return _cycle_lists(t, _R, (t.case, c))  # type: ignore[arg-type]
    a = next(x for x in ("alpha", "beta", "gamma") if x != c)
    return chain_lists(
        walk_lists([t.walk("X"), t.walk("Y")]),
        walk_lists(_walks(t, a)),
        walk_lists(_walks(t, c, reverse=True)),
        walk_lists(_walks(t, c)),
    )


@lru_cache(maxsize=None)
def build_or_k(h: Graph, triple: CornerTriple, k: int, g: int = 0) -> Gadget:
    """
    OR_k on {alpha, beta} (not all alpha): a tree with leaf interface x1..xk, max
    degree 3 and degree-3 vertices pairwise >= g apart.
    """
    t = triple
    if k < 2:
        raise PreconditionViolated("OR_k needs k >= 2")
    meta = {"triple": t, "g": g, "k": k}
    if k == 2:
        base = build_or_k(h, t, 3, g)
        lists = list(base.lists)
        lists[base.vertex("x3")] = lists[base.vertex("x3")] & {t.alpha}
        cv = Canvas(h)
        for v in range(base.graph.n):
            cv.add(lists[v], base.graph.label(v))
        for u, v in base.graph.edges:
            cv.link(u, v)
        gadget = _finish("or", cv, [("x1", base.vertex("x1")), ("x2", base.vertex("x2"))], meta)
        return _expect(gadget, or_relation(t, 2), "OR_2")

    cv = Canvas(h)
    if k == 3:
        centre = cv.add({t.alpha, t.beta, t.gamma}, "centre")
        ends = []
        for c in ("alpha", "beta", "gamma"):
            lists = list(reversed(r_lists(h, t, c)))
            vs = cv.path(lists, f"R_{c}", start=centre)
            ends.append(vs[-1])
        gadget = _finish("or", cv, [(f"x{i + 1}", v) for i, v in enumerate(ends)], meta)
        return _expect(gadget, or_relation(t, 3), "OR_3")

    prev = build_or_k(h, t, k - 1, g)
    nand = build_nand2(h, t, g)
    or3 = build_or_k(h, t, 3, g)
    m_prev = cv.embed(prev, f"or{k - 1}")
    y = m_prev[prev.vertex(f"x{k - 1}")]
    m_nand = cv.embed(nand, "nand", glue={"x1": y})
    z = m_nand[nand.vertex("x2")]
    m_or3 = cv.embed(or3, "or3", glue={"x1": z})
    interface = [(f"x{i + 1}", m_prev[prev.vertex(f"x{i + 1}")]) for i in range(k - 2)]
    interface += [(f"x{k - 1}", m_or3[or3.vertex("x2")]), (f"x{k}", m_or3[or3.vertex("x3")])]
    gadget = _finish("or", cv, interface, meta)
    return _expect(gadget, or_relation(t, k), f"OR_{k}")


# ==========================================================
# Distinguishers
# ==========================================================

def check_colour_set(h: Graph, t: CornerTriple, s: Iterable[int]) -> Tuple[int, ...]:
    """S sorted, once it is an incomparable set of size >= 2 in the class of alpha and beta."""
    members = tuple(sorted(set(s)))
    if len(members) < 2:
        raise PreconditionViolated("|S| >= 2")
    if not check_incomparable(h, members).ok:
        raise PreconditionViolated("S is not incomparable")
    side = bipartition(h).side
    if len({side[v] for v in members + (t.alpha, t.beta)}) != 1:
        raise PreconditionViolated("S and alpha, beta are not in one class")
    return members


def _subsets(pool: FrozenSet[int]) -> Iterable[FrozenSet[int]]:
    items = sorted(pool)
    for size in range(len(items), 0, -1):
        for combo in itertools.combinations(items, size):
            yield frozenset(combo)


@lru_cache(maxsize=None)
def _distinguisher_lists(
    h: Graph, t: CornerTriple, s: Tuple[int, ...], a: int, b: int, max_depth: int, max_states: int
) -> Tuple[FrozenSet[int], ...]:
    target = frozenset({t.alpha, t.beta})
    ia, ib = s.index(a), s.index(b)
    Profile = Tuple[FrozenSet[int], ...]

    def step(prof: Profile, lst: FrozenSet[int]) -> Profile:
        return tuple(frozenset(y for x in p for y in h.adj[x]) & lst for p in prof)

    def done(prof: Profile) -> bool:
        return prof[ia] == {t.alpha} and t.beta in prof[ib]

    start: Profile = tuple(frozenset({x}) for x in s)
    parent: Dict[Profile, Optional[Tuple[Profile, FrozenSet[int]]]] = {start: None}
    queue = deque([(start, 0)])
    explored = 0
    goal: Optional[Tuple[Profile, Profile]] = None
    while queue and goal is None:
        prof, d = queue.popleft()
        if d + 1 > max_depth:
            continue
        reach = frozenset(y for p in prof for x in p for y in h.adj[x])
        if d % 2 == 1 and reach & target:
            last = step(prof, target)
            if all(last) and done(last):
                goal = (prof, last)
                break
        for lst in _subsets(reach):
            nxt = step(prof, lst)
            if not all(nxt) or nxt in parent:
                continue
            parent[nxt] = (prof, lst)
            explored += 1
            if explored > max_states:
                raise SynthesisBudgetExceeded(explored)
            queue.append((nxt, d + 1))
    if goal is None:
        raise SynthesisBudgetExceeded(explored)

    lists: List[FrozenSet[int]] = [target]
    node: Optional[Profile] = goal[0]
    while node is not None:
        link = parent[node]
        if link is None:
            break
        lists.append(link[1])
        node = link[0]
    lists.append(frozenset(s))
    lists.reverse()
    logger.debug("distinguisher %s/%s: length %d after %d states", a, b, len(lists) - 1, explored)
    return tuple(lists)


def synthesize_distinguisher(
    h: Graph,
    triple: CornerTriple,
    s: Iterable[int],
    a: int,
    b: int,
    max_depth: Optional[int] = None,
    max_states: Optional[int] = None,
) -> Gadget:
    """
    Path x -> y with L(x) = S, L(y) = {alpha, beta}: x = a forces y = alpha,
    x = b allows y = beta, every other c in S reaches alpha or beta.

    Found by BFS over profiles (for each s in S, the set of values the current end
    can take when x = s), appending one list per step.
    """
    t = triple
    members = check_colour_set(h, t, s)
    if a == b or a not in members or b not in members:
        raise PreconditionViolated("a, b must be distinct members of S")
    depth = config.SYNTH_DEPTH if max_depth is None else max_depth
    states = config.SYNTH_STATES if max_states is None else max_states
    lists = _distinguisher_lists(h, t, members, a, b, depth, states)
    return path_gadget(h, lists, "distinguisher", meta={"triple": t, "S": members, "a": a, "b": b})


# ==========================================================
# Detector, P_u, assignment, switching
# ==========================================================

@lru_cache(maxsize=None)
def _detector(h: Graph, t: CornerTriple, s: Tuple[int, ...], u: int, g: int) -> Gadget:
    k = len(s)
    cv = Canvas(h)
    xu = cv.add(s, "x_u")
    outs: List[int] = []
    for w in s:
        if w == u:
            continue
        d = synthesize_distinguisher(h, t, s, u, w)
        d = extend_path(d, "y", g - (len(d.path) - 1))
        m = cv.embed(d, f"D[{h.label(u)}/{h.label(w)}]", glue={"x": xu})
        outs.append(m[d.vertex("y")])
    ork = build_or_k(h, t, k, g)
    m = cv.embed(ork, "or", glue={f"x{i + 1}": v for i, v in enumerate(outs)})
    cu = m[ork.vertex(f"x{k}")]
    return _finish("detector", cv, [("x_u", xu), ("c_u", cu)], {"triple": t, "S": s, "u": u, "g": g})


def build_detector(h: Graph, triple: CornerTriple, s: Iterable[int], u: int, g: int = 0) -> Gadget:
    """x_u = u forces c_u = beta; every other colour of x_u allows c_u = alpha."""
    members = check_colour_set(h, triple, s)
    if u not in members:
        raise PreconditionViolated("u must be in S")
    gadget = _detector(h, triple, members, u, g)
    expected = frozenset((x, triple.beta) for x in members) | frozenset((x, triple.alpha) for x in members if x != u)
    return _expect(gadget, expected, "detector")


@lru_cache(maxsize=None)
def build_p_u(h: Graph, triple: CornerTriple, g: int = 0) -> Gadget:
    """Path c -> y: c = beta excludes y = gamma, all else in {alpha,beta} x {alpha,beta} plus (alpha, gamma)."""
    t = triple
    if _cyclic(t):
        lists = _cycle_lists(t, _P_U, t.case)
    else:
        lists = chain_lists(
            walk_lists(_walks(t, "alpha")),
            walk_lists(_walks(t, "gamma", reverse=True)),
            walk_lists(_walks(t, "gamma")),
        )
    gadget = path_gadget(h, lists, "p_u", {"c": 0, "y": len(lists) - 1}, {"triple": t, "g": g})
    gadget = extend_path(gadget, "c", g - (len(lists) - 1))
    a, b, c = t.core
    expected = frozenset({(a, a), (a, b), (b, a), (b, b), (a, c)})
    return _expect(gadget, expected, "P_u")


@lru_cache(maxsize=None)
def _assignment(h: Graph, t: CornerTriple, s: Tuple[int, ...], v: int, g: int) -> Gadget:
    cv = Canvas(h)
    x = cv.add(s, "x")
    y = cv.add(t.core, "y")
    pu = build_p_u(h, t, g)
    for u in s:
        if u == v:
            continue
        det = build_detector(h, t, s, u, g)
        m = cv.embed(det, f"F[{h.label(u)}]", glue={"x_u": x})
        cv.embed(pu, f"P[{h.label(u)}]", glue={"c": m[det.vertex("c_u")], "y": y})
    return _finish("assignment", cv, [("x", x), ("y", y)], {"triple": t, "S": s, "v": v, "g": g})


def build_assignment(h: Graph, triple: CornerTriple, s: Iterable[int], v: int, g: int = 0) -> Gadget:
    """y = gamma forces x = v; any x with y in {alpha, beta} extends."""
    members = check_colour_set(h, triple, s)
    if v not in members:
        raise PreconditionViolated("v must be in S")
    gadget = _assignment(h, triple, members, v, g)
    expected = frozenset((x, c) for x in members for c in _ab(triple)) | {(v, triple.gamma)}
    return _expect(gadget, expected, "assignment")


@lru_cache(maxsize=None)
def build_switching(h: Graph, triple: CornerTriple, g: int = 0) -> Gadget:
    """
    Path p .. q .. r of even length, L(p) = L(r) = {alpha, beta}, L(q) = {alpha, beta, gamma}:
    p = alpha, r = beta forces q = gamma; p = r allows q != gamma. dist(p, q), dist(q, r) >= g / 2.
    """
    t = triple
    if _cyclic(t):
        lists = [_w(t, *ix) for ix in _SWITCH]
        q = 2
    else:
        first = walk_lists(_walks(t, "beta"))
        lists = chain_lists(first, walk_lists(_walks(t, "alpha", reverse=True)), walk_lists([t.walk("X'"), t.walk("Y'")]))
        q = len(first) - 1
    gadget = path_gadget(h, lists, "switching", {"p": 0, "q": q, "r": len(lists) - 1}, {"triple": t, "g": g})
    half = (g + 1) // 2
    gadget = extend_path(gadget, "p", half - q)
    gadget = extend_path(gadget, "r", half - (len(lists) - 1 - q))
    problems = switching_problems(t, gadget.relation)
    if problems:
        logger.error("switching relation fails %s: got %s", problems, sorted(gadget.relation))
        raise PreconditionViolated(f"switching gadget fails {', '.join(problems)} (bad corner triple?)")
    return gadget


# ==========================================================
# Property checks
# ==========================================================

def _heavy(graph: Graph, skip: Iterable[int] = ()) -> List[int]:
    skip = set(skip)
    return [v for v in range(graph.n) if graph.degree(v) >= 3 and v not in skip]


def _far_apart(graph: Graph, vertices: Sequence[int], g: int) -> bool:
    if g <= 1 or len(vertices) < 2:
        return True
    nxg = graph.to_networkx()
    pool = set(vertices)
    for v in vertices:
        near = nx.single_source_shortest_path_length(nxg, v, cutoff=g - 1)
        if any(w != v and w in pool for w in near):
            return False
    return True


def _is_tree_without(graph: Graph, removed: Iterable[int] = ()) -> bool:
    nxg = graph.to_networkx()
    nxg.remove_nodes_from(list(removed))
    return nxg.number_of_nodes() > 0 and nx.is_tree(nxg)


def _structure_problems(gadget: Gadget, x: str, others: Sequence[str], g: int) -> List[str]:
    """Girth and distance guarantees shared by detector and assignment gadgets."""
    out = []
    graph = gadget.graph
    if girth(graph, below=g) < g:
        out.append("girth")
    xv = gadget.vertex(x)
    special = [xv] + [gadget.vertex(n) for n in others]
    heavy = _heavy(graph, special)
    if not _far_apart(graph, heavy, g):
        out.append("degree3_distance")
    for name in [x, *others]:
        if not _far_apart(graph, heavy + [gadget.vertex(name)], g):
            out.append(f"{name}_distance")
    return out


def check_gadget_properties(kind: str, gadget: Gadget) -> List[str]:
    """Names of the violated properties of a built gadget (empty when all hold)."""
    bad: List[str] = []
    meta = gadget.meta
    t: Optional[CornerTriple] = meta.get("triple")
    g = meta.get("g", 0)
    rel = gadget.relation

    if kind == "walk_path":
        x, y = gadget.vertex("x"), gadget.vertex("y")
        if gadget.lists[x] != meta["S_A"] | meta["S_B"] or gadget.lists[y] != meta["T_A"] | meta["T_B"]:
            bad.append("a")
        if any((w.start, w.end) not in rel for w in meta["walks"]):
            bad.append("b")
        if any(s in meta["S_A"] and e in meta["T_B"] for s, e in rel):
            bad.append("c")
        if meta["mutual"] and any(s in meta["S_B"] and e in meta["T_A"] for s, e in rel):
            bad.append("d")
        return bad

    assert t is not None, f"{kind} gadget carries no corner triple"
    a, b, c = t.core
    ab = frozenset({a, b})

    if kind == "nand2":
        if rel != nand_relation(t, 2):
            bad.append("relation")
        if gadget.path is None:
            bad.append("path")
        elif len(gadget.path) - 1 < g:
            bad.append("length")
        return bad

    if kind == "or":
        k = meta["k"]
        if rel != or_relation(t, k):
            bad.append("relation")
        if not _is_tree_without(gadget.graph):
            bad.append("tree")
        if any(gadget.graph.degree(v) != 1 for _, v in gadget.interface):
            bad.append("leaves")
        if gadget.graph.max_degree > 3:
            bad.append("max_degree")
        if not _far_apart(gadget.graph, _heavy(gadget.graph), g):
            bad.append("degree3_distance")
        return bad

    if kind == "distinguisher":
        s, ua, ub = meta["S"], meta["a"], meta["b"]
        x, y = gadget.vertex("x"), gadget.vertex("y")
        if gadget.lists[x] != frozenset(s) or gadget.lists[y] != ab:
            bad.append("D1")
        if (ua, a) not in rel:
            bad.append("D2")
        if (ub, b) not in rel:
            bad.append("D3")
        if any(not any((cc, e) in rel for e in ab) for cc in s if cc not in (ua, ub)):
            bad.append("D4")
        if (ua, b) in rel:
            bad.append("D5")
        return bad

    if kind == "detector":
        s, u = meta["S"], meta["u"]
        xu, cu = gadget.vertex("x_u"), gadget.vertex("c_u")
        if gadget.lists[xu] != frozenset(s) or gadget.lists[cu] != ab:
            bad.append("F~1")
        if any((x, b) not in rel for x in s):
            bad.append("F~2")
        if any((x, a) not in rel for x in s if x != u):
            bad.append("F~3")
        if (u, a) in rel:
            bad.append("F~4")
        if not _is_tree_without(gadget.graph, [xu]):
            bad.append("F~5")
        if gadget.graph.degree(xu) != len(s) - 1 or gadget.graph.degree(cu) != 1:
            bad.append("F~6")
        if any(gadget.graph.degree(v) > 3 for v in range(gadget.graph.n) if v != xu):
            bad.append("F~7")
        return bad + _structure_problems(gadget, "x_u", [], g)

    if kind == "p_u":
        cv, yv = gadget.vertex("c"), gadget.vertex("y")
        if gadget.lists[cv] != ab or gadget.lists[yv] != frozenset(t.core):
            bad.append("lists")
        if any((p, q) not in rel for p in ab for q in ab):
            bad.append("P1")
        if (a, c) not in rel:
            bad.append("P2")
        if (b, c) in rel:
            bad.append("P3")
        if gadget.path is None or len(gadget.path) - 1 < g:
            bad.append("P4")
        return bad

    if kind == "assignment":
        s, v = meta["S"], meta["v"]
        xv, yv = gadget.vertex("x"), gadget.vertex("y")
        k = len(s)
        if gadget.lists[xv] != frozenset(s) or gadget.lists[yv] != frozenset(t.core):
            bad.append("A1")
        if any((x, e) not in rel for x in s for e in ab):
            bad.append("A2")
        if (v, c) not in rel:
            bad.append("A3")
        if any(e == c and x != v for x, e in rel):
            bad.append("A4")
        if not _is_tree_without(gadget.graph, [xv]):
            bad.append("A5")
        if gadget.graph.degree(xv) != (k - 1) ** 2 or gadget.graph.degree(yv) != k - 1:
            bad.append("A6")
        if any(gadget.graph.degree(w) > 3 for w in range(gadget.graph.n) if w not in (xv, yv)):
            bad.append("A7")
        problems = _structure_problems(gadget, "x", ["y"], g)
        if g > 1 and nx.shortest_path_length(gadget.graph.to_networkx(), xv, yv) < g:
            problems.append("xy_distance")
        return bad + problems

    if kind == "switching":
        p, q, r = gadget.vertex("p"), gadget.vertex("q"), gadget.vertex("r")
        if gadget.lists[p] != ab or gadget.lists[r] != ab or gadget.lists[q] != frozenset(t.core):
            bad.append("S1")
        bad.extend(switching_problems(t, rel))
        path = gadget.path
        if path is None or (len(path) - 1) % 2:
            bad.append("even_path")
        elif path.index(q) % 2:
            bad.append("q_class")
        if path is not None and 2 * min(path.index(q), len(path) - 1 - path.index(q)) < g:
            bad.append("pq_distance")
        return bad

    raise ValueError(f"unknown gadget kind {kind!r}")
