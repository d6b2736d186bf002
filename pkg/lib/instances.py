# lib/instances.py
"""
List-homomorphism instances, consistency normalization and the binary CSP model.

BCSP domain values are positive integers; a list instance encodes H-vertex x as x + 1,
which keeps 0 free as the "no forbidden partner" slot value.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from lib.errors import InvalidCover, NotBipartite, TargetNotBipartite
from lib.graphs import Graph, bipartition, induced_subgraph

logger = logging.getLogger(__name__)


# ==========================================================
# List instances
# ==========================================================

@dataclass(frozen=True)
class ListInstance:
    g: Graph
    h: Graph
    lists: Tuple[FrozenSet[int], ...]

    def __post_init__(self) -> None:
        if len(self.lists) != self.g.n:
            raise ValueError(f"{len(self.lists)} lists for {self.g.n} vertices")
        for v, lst in enumerate(self.lists):
            bad = [x for x in lst if not 0 <= x < self.h.n]
            if bad:
                raise ValueError(f"list of {self.g.label(v)} names unknown target vertices {bad}")

    @classmethod
    def build(cls, g: Graph, h: Graph, lists: Optional[Mapping[int, Iterable[int]]] = None) -> "ListInstance":
        """Vertices missing from `lists` get the full V(h)."""
        full = frozenset(range(h.n))
        lists = lists or {}
        return cls(g, h, tuple(frozenset(lists[v]) if v in lists else full for v in range(g.n)))

    def with_lists(self, lists: Sequence[Iterable[int]]) -> "ListInstance":
        return ListInstance(self.g, self.h, tuple(frozenset(l) for l in lists))

    def list_union(self, vertices: Iterable[int]) -> FrozenSet[int]:
        out: set = set()
        for v in vertices:
            out |= self.lists[v]
        return frozenset(out)

    def verify(self, phi: Sequence[int]) -> bool:
        """True iff phi is a list homomorphism (G, L) -> H."""
        if len(phi) != self.g.n:
            return False
        if any(phi[v] not in self.lists[v] for v in range(self.g.n)):
            return False
        return all(self.h.has_edge(phi[u], phi[v]) for u, v in self.g.edges)


@dataclass(frozen=True)
class ComponentReport:
    vertices: Tuple[int, ...]
    status: str  # "consistent" | "split" | "rejected"
    options: Tuple[ListInstance, ...] = ()
    reason: Optional[str] = None


@dataclass(frozen=True)
class ConsistencyReport:
    status: str  # "consistent" | "split" | "rejected"
    components: Tuple[ComponentReport, ...]
    removed_dominated: Tuple[Tuple[int, int], ...] = ()
    reason: Optional[str] = None

    @property
    def instances(self) -> Tuple[ListInstance, ...]:
        """Sub-instances of a connected input: one when consistent, two when split."""
        if len(self.components) != 1:
            raise ValueError("instances is only defined for a connected instance graph; use components")
        return self.components[0].options


def merge_reports(report: ConsistencyReport) -> List[List[ListInstance]]:
    """Per component, the alternatives of which at least one must be satisfiable."""
    if report.status == "rejected":
        return []
    return [list(c.options) for c in report.components]


def _remove_dominated(h: Graph, lst: FrozenSet[int]) -> Tuple[FrozenSet[int], List[int]]:
    removed = []
    for x in sorted(lst):
        for y in sorted(lst):
            if y == x:
                continue
            nx_, ny_ = h.adj[x], h.adj[y]
            if nx_ < ny_ or (nx_ == ny_ and x < y):
                removed.append(x)
                break
    return frozenset(lst - set(removed)), removed


def normalize_consistent(inst: ListInstance) -> ConsistencyReport:
    """
    Split (G, L) into consistent sub-instances, one connected component of G at a time.

    Each bipartite component yields the two orientations (X_G -> X, Y_G -> Y and the
    swap) with lists restricted to the matching class of H and dominated values
    removed. A component with a loop, an odd cycle or an empty list is rejected.
    """
    try:
        hb = bipartition(inst.h)
    except NotBipartite as e:
        raise TargetNotBipartite(f"target is not bipartite: {e}")

    comps: List[ComponentReport] = []
    removed_all: List[Tuple[int, int]] = []
    for comp in inst.g.components():
        sub = induced_subgraph(inst.g, comp)
        if any(not inst.lists[v] for v in comp):
            comps.append(ComponentReport(tuple(comp), "rejected", (), "empty list"))
            continue
        try:
            gb = bipartition(sub)
        except NotBipartite as e:
            comps.append(ComponentReport(tuple(comp), "rejected", (), f"instance graph not bipartite: {e}"))
            continue

        already = all(
            inst.lists[comp[i]] <= (hb.class_x if gb.side[i] == 0 else hb.class_y) for i in range(len(comp))
        ) or all(
            inst.lists[comp[i]] <= (hb.class_y if gb.side[i] == 0 else hb.class_x) for i in range(len(comp))
        )
        orientations = [(hb.class_x, hb.class_y), (hb.class_y, hb.class_x)]
        options: List[ListInstance] = []
        for to_x, to_y in orientations:
            lists = []
            for i, v in enumerate(comp):
                lst = inst.lists[v] & (to_x if gb.side[i] == 0 else to_y)
                lst, removed = _remove_dominated(inst.h, lst)
                removed_all.extend((v, x) for x in removed)
                lists.append(lst)
            option = ListInstance(sub, inst.h, tuple(lists))
            if already and any(not l for l in lists):
                continue
            options.append(option)
        if already:
            comps.append(ComponentReport(tuple(comp), "consistent", tuple(options[:1])))
        else:
            comps.append(ComponentReport(tuple(comp), "split", tuple(options)))

    if any(c.status == "rejected" for c in comps):
        status = "rejected"
        reason = next(c.reason for c in comps if c.status == "rejected")
    elif all(c.status == "consistent" for c in comps):
        status, reason = "consistent", None
    else:
        status, reason = "split", None
    logger.debug("normalize_consistent: %s over %d component(s)", status, len(comps))
    return ConsistencyReport(status, tuple(comps), tuple(removed_all), reason)


def prune_unsupported(inst: ListInstance) -> ListInstance:
    """Arc consistency on the lists: drop every value with no neighbour in an adjacent list."""
    lists = [set(l) for l in inst.lists]
    for v in inst.g.loops:
        lists[v] = {x for x in lists[v] if inst.h.has_loop(x)}
    changed = True
    while changed:
        changed = False
        for u, v in sorted(inst.g.edges):
            if u == v:
                continue
            for a, b in ((u, v), (v, u)):
                keep = {x for x in lists[a] if inst.h.adj[x] & lists[b]}
                if keep != lists[a]:
                    lists[a] = keep
                    changed = True
    return inst.with_lists(lists)


# ==========================================================
# Binary CSP
# ==========================================================

@dataclass(frozen=True)
class Constraint:
    u: int
    v: int
    allowed: FrozenSet[Tuple[int, int]]  # pairs (value of u, value of v), u < v


@dataclass(frozen=True)
class BcspInstance:
    variables: Tuple[str, ...]
    domains: Tuple[FrozenSet[int], ...]
    constraints: Tuple[Constraint, ...]

    def __post_init__(self) -> None:
        if len(self.domains) != len(self.variables):
            raise ValueError("one domain per variable required")
        for v, dom in enumerate(self.domains):
            if any(a < 1 for a in dom):
                raise ValueError(f"domain of {self.variables[v]} holds a value < 1")
        seen = set()
        for c in self.constraints:
            if not (0 <= c.u < c.v < len(self.variables)):
                raise ValueError(f"constraint ({c.u}, {c.v}) is not a pair of distinct variables in order")
            if (c.u, c.v) in seen:
                raise ValueError(f"duplicate constraint on ({c.u}, {c.v})")
            seen.add((c.u, c.v))
            for a, b in c.allowed:
                if a not in self.domains[c.u] or b not in self.domains[c.v]:
                    raise ValueError(f"allowed pair ({a}, {b}) outside the domains of ({c.u}, {c.v})")

    @classmethod
    def build(
        cls,
        variables: Sequence[str],
        domains: Sequence[Iterable[int]],
        constraints: Iterable[Tuple[int, int, Iterable[Tuple[int, int]]]],
    ) -> "BcspInstance":
        """
        Normalizes every (u, v, S) to u < v; (u, v, S) and (v, u, S transposed) are the
        same constraint, so repeated pairs are intersected. Pairs outside the domains
        are dropped.
        """
        doms = tuple(frozenset(d) for d in domains)
        merged: Dict[Tuple[int, int], FrozenSet[Tuple[int, int]]] = {}
        for u, v, allowed in constraints:
            if u == v:
                raise ValueError(f"constraint on a single variable {variables[u]}")
            pairs = frozenset((a, b) if u < v else (b, a) for a, b in allowed)
            key = (min(u, v), max(u, v))
            pairs = frozenset((a, b) for a, b in pairs if a in doms[key[0]] and b in doms[key[1]])
            merged[key] = merged[key] & pairs if key in merged else pairs
        cons = tuple(Constraint(u, v, s) for (u, v), s in sorted(merged.items()))
        return cls(tuple(variables), doms, cons)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def d_max(self) -> int:
        return max((len(d) for d in self.domains), default=0)

    @property
    def max_value(self) -> int:
        return max((max(d) for d in self.domains if d), default=0)

    @cached_property
    def _oriented(self) -> Dict[Tuple[int, int], FrozenSet[Tuple[int, int]]]:
        out: Dict[Tuple[int, int], FrozenSet[Tuple[int, int]]] = {}
        for c in self.constraints:
            out[(c.u, c.v)] = c.allowed
            out[(c.v, c.u)] = frozenset((b, a) for a, b in c.allowed)
        return out

    def allowed(self, u: int, v: int) -> Optional[FrozenSet[Tuple[int, int]]]:
        """Allowed (value of u, value of v) pairs, or None when u and v are unconstrained."""
        return self._oriented.get((u, v))

    @cached_property
    def neighbors(self) -> Tuple[FrozenSet[int], ...]:
        nb: List[set] = [set() for _ in range(self.n)]
        for c in self.constraints:
            nb[c.u].add(c.v)
            nb[c.v].add(c.u)
        return tuple(frozenset(s) for s in nb)

    def primal_graph(self) -> Graph:
        return Graph.from_edges(self.n, [(c.u, c.v) for c in self.constraints], self.variables)

    def violated(self, assignment: Sequence[int]) -> Optional[str]:
        """None if the assignment satisfies every domain and constraint."""
        if len(assignment) != self.n:
            return f"assignment has {len(assignment)} values for {self.n} variables"
        for v, a in enumerate(assignment):
            if a not in self.domains[v]:
                return f"{self.variables[v]}={a} outside its domain"
        for c in self.constraints:
            if (assignment[c.u], assignment[c.v]) not in c.allowed:
                return f"constraint ({self.variables[c.u]}, {self.variables[c.v]}) violated"
        return None


@dataclass(frozen=True)
class ConstraintSlices:
    k: int
    # (u, v) -> {a in D_v: (sigma^(1)(a), ..., sigma^(K)(a))}, forbidden b in D_u ascending, 0-padded
    slices: Dict[Tuple[int, int], Dict[int, Tuple[int, ...]]] = field(default_factory=dict)

    def forbidden(self, u: int, v: int, a: int) -> FrozenSet[int]:
        return frozenset(b for b in self.slices[(u, v)][a] if b != 0)


def lhom_to_bcsp(inst: ListInstance) -> BcspInstance:
    """
    Variables are V(G); D_v = {x + 1 : x in L(v)}; one constraint per non-loop edge.
    A loop at v restricts D_v to looped target vertices.
    """
    h = inst.h
    domains = []
    for v in range(inst.g.n):
        lst = inst.lists[v]
        if inst.g.has_loop(v):
            lst = frozenset(x for x in lst if h.has_loop(x))
        domains.append(frozenset(x + 1 for x in lst))
    cons = []
    for u, v in sorted(inst.g.edges):
        if u == v:
            continue
        allowed = [(a, b) for a in domains[u] for b in domains[v] if h.has_edge(a - 1, b - 1)]
        cons.append((u, v, allowed))
    return BcspInstance.build(inst.g.labels, domains, cons)


def decode_assignment(inst: ListInstance, assignment: Sequence[int]) -> List[int]:
    """BCSP values of lhom_to_bcsp(inst) back to target vertices."""
    return [a - 1 for a in assignment]


def compute_k_and_slices(b: BcspInstance) -> ConstraintSlices:
    forbidden: Dict[Tuple[int, int], Dict[int, List[int]]] = {}
    k = 0
    for c in b.constraints:
        for u, v in ((c.u, c.v), (c.v, c.u)):
            allowed = b.allowed(u, v)
            per: Dict[int, List[int]] = {}
            for a in sorted(b.domains[v]):
                bad = [x for x in sorted(b.domains[u]) if (x, a) not in allowed]  # type: ignore[operator]
                per[a] = bad
                k = max(k, len(bad))
            forbidden[(u, v)] = per
    slices = {
        key: {a: tuple(bad) + (0,) * (k - len(bad)) for a, bad in per.items()}
        for key, per in forbidden.items()
    }
    return ConstraintSlices(k, slices)


def dp_cover_to_bcsp(g: Graph, cover_h: Graph, cover_lists: Mapping[int, Iterable[int]]) -> BcspInstance:
    """
    Encode a DP-coloring cover: the lists partition V(cover_h) (1), each list is a
    clique (2), edges between lists of adjacent vertices form a matching (3) and
    there are no other edges (4). Allowed pairs are the non-adjacent cross pairs.
    """
    lists = {v: frozenset(cover_lists.get(v, ())) for v in range(g.n)}
    owner: Dict[int, int] = {}
    for v in range(g.n):
        for x in sorted(lists[v]):
            if not 0 <= x < cover_h.n:
                raise InvalidCover(1, f"list of {g.label(v)} names unknown vertex {x}")
            if x in owner:
                raise InvalidCover(1, f"{cover_h.label(x)} is in the lists of {g.label(owner[x])} and {g.label(v)}")
            owner[x] = v
    missing = [x for x in range(cover_h.n) if x not in owner]
    if missing:
        raise InvalidCover(1, f"{cover_h.label(missing[0])} is in no list")

    for v in range(g.n):
        for x in sorted(lists[v]):
            if cover_h.has_loop(x):
                raise InvalidCover(2, f"{cover_h.label(x)} has a loop")
            for y in sorted(lists[v]):
                if x < y and not cover_h.has_edge(x, y):
                    raise InvalidCover(2, f"list of {g.label(v)} is not a clique: {cover_h.label(x)} {cover_h.label(y)}")

    for x, y in sorted(cover_h.edges):
        if x == y:
            continue
        u, v = owner[x], owner[y]
        if u != v and not g.has_edge(u, v):
            raise InvalidCover(4, f"edge {cover_h.label(x)}{cover_h.label(y)} joins non-adjacent {g.label(u)}, {g.label(v)}")

    for u, v in sorted(g.edges):
        if u == v:
            continue
        cross = nx.Graph()
        cross.add_edges_from(
            (x, y) for x in lists[u] for y in lists[v] if cover_h.has_edge(x, y)
        )
        for node in cross.nodes:
            if cross.degree(node) > 1:
                raise InvalidCover(3, f"edges between lists of {g.label(u)} and {g.label(v)} are not a matching at {cover_h.label(node)}")

    domains = [frozenset(x + 1 for x in lists[v]) for v in range(g.n)]
    cons = []
    for u, v in sorted(g.edges):
        if u == v:
            continue
        allowed = [(x + 1, y + 1) for x in lists[u] for y in lists[v] if not cover_h.has_edge(x, y)]
        cons.append((u, v, allowed))
    return BcspInstance.build(g.labels, domains, cons)


# ==========================================================
# Seeded generators
# ==========================================================

def random_bcsp(n: int, d_max: int, density: float, seed: int, tightness: float = 0.3) -> BcspInstance:
    """
    n variables with domains drawn from 1..d_max (possibly empty), a G(n, density)
    primal graph and each cross pair forbidden with probability `tightness`.
    """
    rng = np.random.default_rng(seed)
    domains = []
    for _ in range(n):
        size = int(rng.integers(0 if rng.random() < 0.05 else 1, d_max + 1))
        domains.append(sorted(int(a) for a in rng.choice(np.arange(1, d_max + 1), size=size, replace=False)))
    cons = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < density:
                allowed = [(a, b) for a in domains[u] for b in domains[v] if rng.random() >= tightness]
                cons.append((u, v, allowed))
    return BcspInstance.build([f"v{i}" for i in range(n)], domains, cons)


def random_list_instance(g: Graph, h: Graph, seed: int, keep: float = 0.6) -> ListInstance:
    """Each target vertex enters each list with probability `keep`."""
    rng = np.random.default_rng(seed)
    lists = {v: [x for x in range(h.n) if rng.random() < keep] for v in range(g.n)}
    return ListInstance.build(g, h, lists)
