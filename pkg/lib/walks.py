# lib/walks.py
"""
Walks in a target graph, the avoiding relation between them and corner triples.

P avoids Q (equal lengths, same start class) when p_1 != q_1 and no p_i is
adjacent to q_{i+1}. Searches run BFS over tuples of current vertices, one
coordinate per requested walk, so every avoidance constraint is checked on
each joint step.
"""
from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from lib import config
from lib.errors import NoTriple
from lib.graphs import Graph, bipartition, check_incomparable, is_bipartite

logger = logging.getLogger(__name__)

Pattern = Sequence[Tuple[int, int]]  # (i, j): walk i avoids walk j

CASES = ("C6", "C8", "strongly_incomparable")
CORNERS = ("alpha", "beta", "gamma")


@dataclass(frozen=True)
class Walk:
    vertices: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def reversed(self) -> "Walk":
        return Walk(tuple(reversed(self.vertices)))

    def __getitem__(self, i: int) -> int:
        return self.vertices[i]

    def __len__(self) -> int:
        return len(self.vertices)


def is_walk(h: Graph, vertices: Sequence[int]) -> bool:
    return len(vertices) >= 1 and all(h.has_edge(a, b) for a, b in zip(vertices, vertices[1:]))


def avoids(h: Graph, p: Walk, q: Walk) -> bool:
    if p.length != q.length or p.start == q.start:
        return False
    return not any(h.has_edge(p[i], q[i + 1]) for i in range(p.length))


# ==========================================================
# Product BFS
# ==========================================================

def find_avoiding_walks(
    h: Graph,
    starts: Sequence[int],
    ends: Sequence[int],
    pattern: Pattern,
    max_len: Optional[int] = None,
    min_len: int = 1,
) -> Optional[Tuple[Walk, ...]]:
    """
    Walks W_i: starts[i] -> ends[i] of one common length such that W_i avoids W_j
    for every (i, j) in pattern. Shortest first; among shortest, the BFS visits
    successors in lexicographic order, so the answer is reproducible.
    """
    cap = config.WALK_MAX_LEN if max_len is None else max_len
    r = len(starts)
    if r != len(ends) or r == 0:
        raise ValueError("one start and one end per walk")
    start, goal = tuple(starts), tuple(ends)
    for i, j in pattern:
        if start[i] == start[j]:
            return None
    if is_bipartite(h):
        side = bipartition(h).side
        if any(side[start[i]] != side[start[j]] for i, j in pattern):
            return None

    parent: Dict[Tuple[int, ...], Optional[Tuple[int, ...]]] = {start: None}
    depth = {start: 0}
    queue = deque([start])
    nbrs = [sorted(h.adj[v]) for v in range(h.n)]
    found: Optional[Tuple[int, ...]] = None
    parent_of_goal: Optional[Tuple[int, ...]] = None
    while queue:
        cur = queue.popleft()
        d = depth[cur]
        if d >= cap:
            continue
        for nxt in itertools.product(*(nbrs[v] for v in cur)):
            if any(h.has_edge(cur[i], nxt[j]) for i, j in pattern):
                continue
            if nxt == goal and d + 1 >= min_len:
                found = nxt
                parent_of_goal = cur
                break
            if nxt not in parent:
                parent[nxt] = cur
                depth[nxt] = d + 1
                queue.append(nxt)
        if found is not None:
            break
    if found is None:
        logger.debug("no avoiding walks %s -> %s within length %d", start, goal, cap)
        return None

    states = [found]
    node: Optional[Tuple[int, ...]] = parent_of_goal
    while node is not None:
        states.append(node)
        node = parent[node]
    states.reverse()
    return tuple(Walk(tuple(s[i] for s in states)) for i in range(r))


def check_pattern(h: Graph, walks: Sequence[Walk], pattern: Pattern) -> bool:
    return all(is_walk(h, w.vertices) for w in walks) and all(avoids(h, walks[i], walks[j]) for i, j in pattern)


# ==========================================================
# Corner triples
# ==========================================================

@dataclass(frozen=True)
class CornerTriple:
    alpha: int
    beta: int
    gamma: int
    alpha_prime: int
    beta_prime: int
    case: str
    cycle: Tuple[int, ...] = ()  # w_1.. for the C6 / C8 cases
    private: Tuple[int, int, int] = ()  # (alpha bar, beta bar, gamma bar) when strongly incomparable
    walks: Tuple[Tuple[str, Walk], ...] = ()

    def corner(self, name: str) -> int:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}[name]

    def w(self, i: int) -> int:
        return self.cycle[i - 1]

    def walk(self, name: str) -> Walk:
        for key, wk in self.walks:
            if key == name:
                return wk
        raise KeyError(f"triple carries no walk {name!r}")

    def has_walk(self, name: str) -> bool:
        return any(key == name for key, _ in self.walks)

    @property
    def core(self) -> Tuple[int, int, int]:
        return (self.alpha, self.beta, self.gamma)


def _others(c: str) -> Tuple[str, str]:
    a, b = (x for x in CORNERS if x != c)
    return a, b


def _pair_walks(h: Graph, alpha: int, beta: int, max_len: Optional[int]) -> Optional[Dict[str, Walk]]:
    # (X, Y) with X avoiding Y, and (X', Y') with Y' avoiding X'; lengths chosen independently
    first = find_avoiding_walks(h, [alpha, beta], [beta, alpha], [(0, 1)], max_len)
    if first is None:
        return None
    second = find_avoiding_walks(h, [alpha, beta], [beta, alpha], [(1, 0)], max_len)
    if second is None:
        return None
    return {"X": first[0], "Y": first[1], "X'": second[0], "Y'": second[1]}


def _triple_walks(h: Graph, core: Dict[str, int], max_len: Optional[int]) -> Optional[Dict[str, Walk]]:
    out: Dict[str, Walk] = {}
    for c in CORNERS:
        a, b = _others(c)
        found = find_avoiding_walks(
            h,
            [core["alpha"], core["alpha"], core["beta"]],
            [core[a], core[b], core[c]],
            [(0, 2), (1, 2), (2, 0), (2, 1)],
            max_len,
        )
        if found is None:
            return None
        out[f"X_{c}"], out[f"Y_{c}"], out[f"Z_{c}"] = found
    return out


def _induced_cycles(h: Graph, length: int) -> Iterator[Tuple[int, ...]]:
    """Induced cycles with exactly `length` vertices, each once, smallest vertex first."""

    def extend(path: List[int]) -> Iterator[List[int]]:
        s, last = path[0], path[-1]
        for v in sorted(h.adj[last]):
            if v <= s or v in path:
                continue
            if any(h.has_edge(v, p) for p in path[1:-1]):
                continue
            closes = len(path) >= 2 and h.has_edge(v, s)
            if closes:
                if len(path) + 1 == length and path[1] < v:
                    yield path + [v]
                continue
            if len(path) + 1 < length:
                yield from extend(path + [v])

    for s in range(h.n):
        for cyc in extend([s]):
            yield tuple(cyc)


def _cycle_triple(cyc: Sequence[int], side: Sequence[int], cls: int, case: str) -> Optional[CornerTriple]:
    n = len(cyc)
    for shift in range(n):
        for direction in (1, -1):
            w = tuple(cyc[(shift + direction * i) % n] for i in range(n))
            if side[w[0]] != cls:
                continue
            # alpha = w1, beta = w5, gamma = w3, alpha' = w2, beta' = w4
            return CornerTriple(w[0], w[4], w[2], w[1], w[3], case, w)
    return None


def _attach_certificates(h: Graph, t: CornerTriple, max_len: Optional[int]) -> Optional[CornerTriple]:
    pair = _pair_walks(h, t.alpha, t.beta, max_len)
    if pair is None:
        return None
    walks = dict(pair)
    if t.case == "strongly_incomparable":
        extra = _triple_walks(h, {"alpha": t.alpha, "beta": t.beta, "gamma": t.gamma}, max_len)
        if extra is None:
            return None
        walks.update(extra)
    return CornerTriple(
        t.alpha, t.beta, t.gamma, t.alpha_prime, t.beta_prime, t.case, t.cycle, t.private, tuple(sorted(walks.items()))
    )


def find_corner_triple(h: Graph, side: Optional[int] = None, max_len: Optional[int] = None) -> CornerTriple:
    """
    A corner triple inside one bipartition class (side 0 or 1; default: try 0 then 1).
    Induced C6 first, then induced C8, then strongly incomparable triples with walk
    certificates. h must be connected, bipartite, undecomposable and not the
    complement of a circular-arc graph; NoTriple otherwise.
    """
    bp = bipartition(h)
    sides = [side] if side is not None else [0, 1]
    for cls in sides:
        for case, length in (("C6", 6), ("C8", 8)):
            for cyc in _induced_cycles(h, length):
                t = _cycle_triple(cyc, bp.side, cls, case)
                if t is None:
                    continue
                t = _attach_certificates(h, t, max_len)
                if t is not None:
                    logger.info("corner triple from an induced %s: %s", case, [h.label(v) for v in t.core])
                    return t

        members = sorted(bp.class_x if cls == 0 else bp.class_y)
        for alpha, beta, gamma in itertools.permutations(members, 3):
            wit = check_incomparable(h, (alpha, beta, gamma), strong=True)
            if not wit.ok:
                continue
            a_prime = min(h.adj[alpha] - h.adj[beta])
            b_prime = min(h.adj[beta] - h.adj[alpha])
            private = (wit.private_neighbors[alpha], wit.private_neighbors[beta], wit.private_neighbors[gamma])
            t = CornerTriple(alpha, beta, gamma, a_prime, b_prime, "strongly_incomparable", (), private)
            t = _attach_certificates(h, t, max_len)
            if t is not None:
                logger.info("strongly incomparable corner triple: %s", [h.label(v) for v in t.core])
                return t
    raise NoTriple(f"no corner triple in {h.n}-vertex target (is it undecomposable and not co-circular-arc?)")


def check_corner_triple(h: Graph, t: CornerTriple) -> Optional[str]:
    """None when every condition re-verifies, else the first failing one."""
    bp = bipartition(h)
    if len({bp.side[v] for v in t.core}) != 1:
        return "corners are not in one class"
    a, b, ap, bp_ = t.alpha, t.beta, t.alpha_prime, t.beta_prime
    if not (h.has_edge(a, ap) and h.has_edge(b, bp_)) or h.has_edge(a, bp_) or h.has_edge(b, ap) or ap == bp_:
        return "alpha alpha', beta beta' do not induce a matching"
    if not check_incomparable(h, t.core).ok:
        return "corners are not pairwise incomparable"
    try:
        pair = (t.walk("X"), t.walk("Y"), t.walk("X'"), t.walk("Y'"))
    except KeyError:
        return "missing pair walks"
    X, Y, Xp, Yp = pair
    if not (X.start == a and X.end == b and Y.start == b and Y.end == a and check_pattern(h, [X, Y], [(0, 1)])):
        return "X does not avoid Y"
    if not (Xp.start == a and Xp.end == b and Yp.start == b and Yp.end == a and check_pattern(h, [Xp, Yp], [(1, 0)])):
        return "Y' does not avoid X'"
    if t.case in ("C6", "C8"):
        n = 6 if t.case == "C6" else 8
        cyc = t.cycle
        if len(cyc) != n or len(set(cyc)) != n:
            return f"{t.case} cycle malformed"
        for i in range(n):
            for j in range(i + 1, n):
                adjacent = (j - i) in (1, n - 1)
                if h.has_edge(cyc[i], cyc[j]) != adjacent:
                    return f"{t.case} cycle is not induced"
        if (t.w(1), t.w(5), t.w(3)) != t.core:
            return "corners are not w1, w5, w3"
        return None
    if t.case != "strongly_incomparable":
        return f"unknown case {t.case!r}"
    if not check_incomparable(h, t.core, strong=True).ok:
        return "corners are not strongly incomparable"
    core = {"alpha": t.alpha, "beta": t.beta, "gamma": t.gamma}
    for c in CORNERS:
        x_, y_ = _others(c)
        try:
            Xc, Yc, Zc = t.walk(f"X_{c}"), t.walk(f"Y_{c}"), t.walk(f"Z_{c}")
        except KeyError:
            return f"missing walks for {c}"
        ends_ok = (Xc.start, Xc.end, Yc.start, Yc.end, Zc.start, Zc.end) == (a, core[x_], a, core[y_], b, core[c])
        if not ends_ok or not check_pattern(h, [Xc, Yc, Zc], [(0, 2), (1, 2), (2, 0), (2, 1)]):
            return f"walk certificate for {c} fails"
    return None
