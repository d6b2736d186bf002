from __future__ import annotations

import itertools

import pytest

from conftest import w
from lib import gadgets
from lib.errors import PreconditionViolated, SynthesisBudgetExceeded
from lib.gadgets import (
    build_assignment,
    build_detector,
    build_nand2,
    build_or_k,
    build_p_u,
    build_switching,
    build_walk_path,
    check_gadget_properties,
    compose_paths,
    enumerate_relation,
    extend_path,
    join,
    nand_relation,
    or_relation,
    path_gadget,
    path_length,
    path_relation,
    switching_problems,
    synthesize_distinguisher,
)
from lib.graphs import cycle_graph
from lib.walks import Walk, find_corner_triple


@pytest.fixture(params=["C6", "C8"])
def target(request):
    h = cycle_graph(6 if request.param == "C6" else 8)
    return h, find_corner_triple(h)


def _s(h):
    return tuple(w(h, "w1", "w3", "w5"))


# ---------- relations ----------

def test_path_relation_matches_brute_force(target):
    h, t = target
    nand = build_nand2(h, t, 4)
    iface = [nand.vertex("x1"), nand.vertex("x2")]
    assert path_relation(h, nand.path_lists()) == enumerate_relation(h, nand.graph, nand.lists, iface)


def test_composition_law(target):
    h, t = target
    nand, pu = build_nand2(h, t), build_p_u(h, t)
    both = compose_paths(nand, pu)
    assert both.relation == join(nand.relation, pu.relation)


def test_single_vertex_path(c6):
    a, b = w(c6, "w1", "w3")
    assert path_relation(c6, [{a, b}]) == {(a, a), (b, b)}


def test_extension_keeps_relation(target):
    h, t = target
    pu = build_p_u(h, t)
    longer = extend_path(pu, "c", 3)
    assert longer.relation == pu.relation
    assert len(longer.path) - len(pu.path) == 4
    assert path_length(longer, "c", "y") == len(longer.path) - 1


def test_extension_needs_an_alpha_beta_list(target):
    h, t = target
    pu = build_p_u(h, t)
    with pytest.raises(PreconditionViolated):
        extend_path(pu, "y", 2)


# ---------- walk paths ----------

def test_pair_walk_path(target):
    h, t = target
    gadget = build_walk_path(h, [t.walk("X")], [t.walk("Y")])
    assert check_gadget_properties("walk_path", gadget) == []
    assert (t.alpha, t.alpha) not in gadget.relation


def test_walk_path_preconditions(c6):
    t = find_corner_triple(c6)
    x = t.walk("X")
    with pytest.raises(PreconditionViolated, match="S\\(A\\) and S\\(B\\) intersect"):
        build_walk_path(c6, [x], [x])
    short = Walk(x.vertices[:2])
    with pytest.raises(PreconditionViolated, match="unequal length"):
        build_walk_path(c6, [short], [t.walk("Y")])


# ---------- NAND / OR ----------

@pytest.mark.parametrize("g", [0, 4, 8])
def test_nand2(target, g):
    h, t = target
    nand = build_nand2(h, t, g)
    assert nand.relation == nand_relation(t, 2)
    assert check_gadget_properties("nand2", nand) == []


def test_c6_nand_lists(c6):
    t = find_corner_triple(c6)
    lists = build_nand2(c6, t).path_lists()
    expected = [("w1", "w5"), ("w2", "w6"), ("w1", "w3"), ("w2", "w4"), ("w1", "w5")]
    assert lists == [frozenset(w(c6, *labels)) for labels in expected]


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("g", [0, 4])
def test_or_k(target, k, g):
    h, t = target
    gadget = build_or_k(h, t, k, g)
    assert gadget.relation == or_relation(t, k)
    assert gadget.names == tuple(f"x{i + 1}" for i in range(k))
    assert check_gadget_properties("or", gadget) == []


def test_or_needs_two_inputs(c6):
    with pytest.raises(PreconditionViolated):
        build_or_k(c6, find_corner_triple(c6), 1)


# ---------- distinguishers ----------

def test_c6_distinguisher_example(c6):
    t = find_corner_triple(c6)
    a, b = w(c6, "w3", "w5")
    d = synthesize_distinguisher(c6, t, _s(c6), a, b)
    expected = [("w1", "w3", "w5"), ("w2", "w6"), ("w1", "w5")]
    assert d.path_lists() == [frozenset(w(c6, *labels)) for labels in expected]


def test_all_distinguishers(target):
    h, t = target
    s = _s(h)
    for a, b in itertools.permutations(s, 2):
        d = synthesize_distinguisher(h, t, s, a, b)
        assert check_gadget_properties("distinguisher", d) == []


def test_distinguisher_preconditions(c6):
    t = find_corner_triple(c6)
    s = _s(c6)
    with pytest.raises(PreconditionViolated):
        synthesize_distinguisher(c6, t, s, s[0], s[0])
    with pytest.raises(PreconditionViolated):
        synthesize_distinguisher(c6, t, w(c6, "w1", "w2"), s[0], s[1])


def test_distinguisher_budget(c8):
    t = find_corner_triple(c8)
    s = _s(c8)
    with pytest.raises(SynthesisBudgetExceeded):
        synthesize_distinguisher(c8, t, s, s[1], s[2], max_depth=1)


# ---------- detector, P_u, assignment, switching ----------

@pytest.mark.parametrize("g", [4, 8])
def test_detectors(target, g):
    h, t = target
    s = _s(h)
    for u in s:
        det = build_detector(h, t, s, u, g)
        assert check_gadget_properties("detector", det) == []


@pytest.mark.parametrize("g", [0, 4, 8])
def test_p_u(target, g):
    h, t = target
    assert check_gadget_properties("p_u", build_p_u(h, t, g)) == []


def test_c6_p_u_lists(c6):
    t = find_corner_triple(c6)
    expected = [("w1", "w5"), ("w2", "w6"), ("w1", "w3", "w5")]
    assert build_p_u(c6, t).path_lists() == [frozenset(w(c6, *labels)) for labels in expected]


@pytest.mark.parametrize("g", [4, 8])
def test_assignments(target, g):
    h, t = target
    s = _s(h)
    for v in s:
        gadget = build_assignment(h, t, s, v, g)
        assert check_gadget_properties("assignment", gadget) == []


def test_assignment_with_two_colours(c6):
    t = find_corner_triple(c6)
    s = tuple(w(c6, "w1", "w5"))
    gadget = build_assignment(c6, t, s, s[0], 4)
    assert check_gadget_properties("assignment", gadget) == []
    assert gadget.graph.degree(gadget.vertex("x")) == 1


@pytest.mark.parametrize("g", [0, 4, 8])
def test_switching(target, g):
    h, t = target
    gadget = build_switching(h, t, g)
    assert check_gadget_properties("switching", gadget) == []
    assert gadget.names == ("p", "q", "r")


def test_switching_relation_check(c6):
    t = find_corner_triple(c6)
    a, b, c = t.core
    good = build_switching(c6, t, 4).relation
    assert switching_problems(t, good) == []
    assert switching_problems(t, good - {(a, c, b)}) == ["S3"]
    assert "S4" in switching_problems(t, good | {(a, a, b)})
    assert "S2" in switching_problems(t, frozenset(r for r in good if r[0] != r[2]))


def test_switching_builder_rejects_a_bad_relation(c6, monkeypatch):
    t = find_corner_triple(c6)
    monkeypatch.setattr(gadgets, "switching_problems", lambda triple, rel: ["S4"])
    with pytest.raises(PreconditionViolated, match="S4"):
        build_switching.__wrapped__(c6, t, 4)


def test_tampered_gadget_is_flagged(c6):
    t = find_corner_triple(c6)
    pu = build_p_u(c6, t)
    lists = pu.path_lists()
    lists[-1] = lists[-1] - {t.gamma}
    broken = path_gadget(c6, lists, "p_u", {"c": 0, "y": len(lists) - 1}, pu.meta)
    assert "P2" in check_gadget_properties("p_u", broken)


# ---------- walk-certificate lists ----------

def test_generic_gadgets_on_c10():
    h = cycle_graph(10)
    t = find_corner_triple(h)
    assert t.case == "strongly_incomparable"
    assert check_gadget_properties("nand2", build_nand2(h, t, 4)) == []
    assert check_gadget_properties("or", build_or_k(h, t, 3, 4)) == []
    assert check_gadget_properties("p_u", build_p_u(h, t, 4)) == []
    assert check_gadget_properties("switching", build_switching(h, t, 4)) == []
