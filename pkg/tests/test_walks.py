from __future__ import annotations

import pytest

from conftest import w
from lib.errors import NoTriple
from lib.graphs import Graph, bipartition, complete_bipartite, cycle_graph, path_graph
from lib.walks import (
    CornerTriple,
    Walk,
    avoids,
    check_corner_triple,
    check_pattern,
    find_avoiding_walks,
    find_corner_triple,
    is_walk,
)


def test_walk_basics(c6):
    wk = Walk(tuple(w(c6, "w1", "w2", "w3")))
    assert wk.length == 2 and len(wk) == 3
    assert wk.reversed().start == wk.end
    assert is_walk(c6, wk.vertices)
    assert not is_walk(c6, w(c6, "w1", "w3"))


def test_avoidance_definition(c6):
    x = Walk(tuple(w(c6, "w1", "w2", "w3")))
    y = Walk(tuple(w(c6, "w5", "w4", "w3")))
    # x[0] = w1 is not adjacent to y[1] = w4, x[1] = w2 is adjacent to y[2] = w3
    assert not avoids(c6, x, y)
    assert not avoids(c6, x, x)


def test_pair_walks_on_c6(c6):
    a, b = w(c6, "w1", "w5")
    found = find_avoiding_walks(c6, [a, b], [b, a], [(0, 1)])
    assert found is not None
    x, y = found
    assert (x.start, x.end, y.start, y.end) == (a, b, b, a)
    assert x.length == y.length
    assert check_pattern(c6, found, [(0, 1)])


def test_reversed_walks_swap_avoidance(c6):
    a, b = w(c6, "w1", "w5")
    x, y = find_avoiding_walks(c6, [a, b], [b, a], [(0, 1)])
    assert avoids(c6, y.reversed(), x.reversed())


def test_equal_starts_never_avoid(c6):
    a = c6.index("w1")
    assert find_avoiding_walks(c6, [a, a], [a, a], [(0, 1)]) is None


def test_starts_in_different_classes(c6):
    a, b = w(c6, "w1", "w2")
    assert find_avoiding_walks(c6, [a, b], [b, a], [(0, 1)]) is None


def test_disconnected_endpoints():
    h = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert find_avoiding_walks(h, [0, 2], [2, 0], [(0, 1)]) is None


def test_length_cap(c6):
    a, b = w(c6, "w1", "w5")
    assert find_avoiding_walks(c6, [a, b], [b, a], [(0, 1)], max_len=1) is None


def test_c6_triple(c6):
    t = find_corner_triple(c6)
    assert t.case == "C6"
    assert [c6.label(v) for v in t.core] == ["w1", "w5", "w3"]
    assert (c6.label(t.alpha_prime), c6.label(t.beta_prime)) == ("w2", "w4")
    assert check_corner_triple(c6, t) is None


def test_c8_triple(c8):
    t = find_corner_triple(c8)
    assert t.case == "C8"
    assert [c8.label(v) for v in t.core] == ["w1", "w5", "w3"]
    assert check_corner_triple(c8, t) is None


def test_crown_triple_comes_from_a_c6(crown3):
    t = find_corner_triple(crown3)
    assert t.case == "C6"
    assert check_corner_triple(crown3, t) is None


def test_triple_on_requested_side(c6):
    t = find_corner_triple(c6, side=1)
    side = bipartition(c6).side
    assert {side[v] for v in t.core} == {1}
    assert check_corner_triple(c6, t) is None


def test_long_cycle_uses_walk_certificates():
    h = cycle_graph(10)
    t = find_corner_triple(h)
    assert t.case == "strongly_incomparable"
    assert check_corner_triple(h, t) is None
    for c in ("alpha", "beta", "gamma"):
        assert t.has_walk(f"X_{c}")


@pytest.mark.parametrize("h", [path_graph(5), complete_bipartite(2, 3)], ids=["path", "k23"])
def test_no_triple_in_easy_targets(h):
    with pytest.raises(NoTriple):
        find_corner_triple(h)


def test_tampered_triple_is_rejected(c6):
    t = find_corner_triple(c6)
    x, y = t.walk("X"), t.walk("Y")
    walks = dict(t.walks)
    walks["X"], walks["Y"] = y, x
    bad = CornerTriple(t.alpha, t.beta, t.gamma, t.alpha_prime, t.beta_prime, t.case, t.cycle, t.private,
                       tuple(sorted(walks.items())))
    assert check_corner_triple(c6, bad) == "X does not avoid Y"

    shifted = CornerTriple(t.alpha, t.gamma, t.beta, t.alpha_prime, t.beta_prime, t.case, t.cycle, t.private, t.walks)
    assert check_corner_triple(c6, shifted) is not None
