from __future__ import annotations

import dataclasses

import pytest
from pysat.formula import CNF

from conftest import CNFS, FULL_CNFS, sized_cnf, w
from lib.errors import PreconditionViolated, TripleCaseUnsupported
from lib.gadgets import path_relation
from lib.graphs import cycle_graph, in_class_cg
from lib.layouts import FeedbackSet, LinearLayout, cutwidth_of_order, is_feedback_set
from lib.reductions import (
    cnf_satisfied,
    decode_group,
    encode_group,
    formula_satisfiable,
    group_capacity,
    hanging_lists,
    partition_variables,
    random_cnf,
    reduce_sat_ctw,
    reduce_sat_fvs,
    satisfying_assignments,
    solve_and_decode,
)
from lib.walks import find_corner_triple


@pytest.fixture
def c6_setup(c6):
    return c6, find_corner_triple(c6)


def _round_trip(out, cnf):
    res, values = solve_and_decode(out)
    assert res.satisfiable == formula_satisfiable(cnf)
    if res.satisfiable:
        assert out.instance.verify([a - 1 for a in res.assignment])
        assert cnf_satisfied(cnf, values)


# ---------- encodings ----------

@pytest.mark.parametrize("k,p,expected", [(2, 1, 1), (3, 1, 1), (3, 2, 3), (3, 5, 7), (4, 3, 6), (5, 2, 4)])
def test_group_capacity(k, p, expected):
    c = group_capacity(k, p)
    assert c == expected
    assert 2 ** c <= k ** p < 2 ** (c + 1)


def test_partition_variables():
    assert partition_variables(5, 2) == ((1, 2), (3, 4), (5,))
    assert partition_variables(0, 3) == ()


def test_group_encoding_is_injective():
    colours = (0, 2, 4)
    seen = {}
    for n in range(8):
        values = tuple(bool(n >> (2 - j) & 1) for j in range(3))
        colouring = encode_group(values, colours, 2)
        assert colouring not in seen
        seen[colouring] = values
        assert decode_group(colouring, colours, 3) == values
    # 9 colourings, 8 assignments: the last one decodes to all-False
    assert decode_group((4, 4), colours, 3) == (False, False, False)


def test_first_variable_is_most_significant():
    assert encode_group((True, False), (0, 1), 2) == (1, 0)


def test_satisfying_assignments():
    assert satisfying_assignments([1, -2], (1, 2)) == [(False, False), (True, False), (True, True)]
    assert satisfying_assignments([3], (1, 2)) == []


def test_random_cnf_is_reproducible():
    a, b = random_cnf(6, 10, 3, 7), random_cnf(6, 10, 3, 7)
    assert a.clauses == b.clauses
    assert a.nv == 6
    assert all(1 <= len(c) <= 3 and len({abs(l) for l in c}) == len(c) for c in a.clauses)


# ---------- feedback-vertex-set reduction ----------

def test_fvs_satisfiable_clause(c6_setup):
    h, t = c6_setup
    cnf = CNF(from_clauses=[[1, -2]])
    out = reduce_sat_fvs(cnf, h, t, w(h, "w1", "w3", "w5"), 1)
    assert out.params.k == 3 and out.params.t == 2
    _round_trip(out, cnf)


def test_fvs_contradiction(c6_setup):
    h, t = c6_setup
    cnf = CNF(from_clauses=[[1], [-1]])
    out = reduce_sat_fvs(cnf, h, t, w(h, "w1", "w3", "w5"), 1)
    res, values = solve_and_decode(out)
    assert not res.satisfiable and values is None


def test_fvs_certificate(c6_setup):
    h, t = c6_setup
    cnf = random_cnf(5, 4, 3, 11)
    out = reduce_sat_fvs(cnf, h, t, w(h, "w1", "w3", "w5"), 2)
    assert isinstance(out.certificate, FeedbackSet)
    assert len(out.certificate.vertices) == out.params.t * out.params.p
    assert is_feedback_set(out.instance.g, out.certificate.vertices)
    assert len(out.clause_map) == len(cnf.clauses)


def _fvs_round_trips(h, seeds, n_max, m_max):
    t = find_corner_triple(h)
    for seed in seeds:
        cnf = sized_cnf(seed, n_max, m_max)
        out = reduce_sat_fvs(cnf, h, t, t.core, 2)
        assert len(out.certificate.vertices) == out.params.t * out.params.p
        assert is_feedback_set(out.instance.g, out.certificate.vertices)
        _round_trip(out, cnf)


@pytest.mark.parametrize("target", ["c6", "c8", "crown3"])
def test_fvs_random_round_trips(request, target):
    _fvs_round_trips(request.getfixturevalue(target), range(CNFS), 6, 8)


@pytest.mark.slow
@pytest.mark.parametrize("target", ["c6", "c8", "crown3"])
def test_fvs_round_trips_full_size(request, target):
    _fvs_round_trips(request.getfixturevalue(target), range(FULL_CNFS), 10, 15)


def test_empty_clause_is_rejected(c6_setup):
    h, t = c6_setup
    cnf = CNF(from_clauses=[[1], []])
    with pytest.raises(PreconditionViolated):
        reduce_sat_fvs(cnf, h, t, w(h, "w1", "w3", "w5"), 1)


def test_colours_outside_the_triple_class(c6_setup):
    h, t = c6_setup
    with pytest.raises(PreconditionViolated):
        reduce_sat_fvs(CNF(from_clauses=[[1]]), h, t, w(h, "w2", "w4"), 1)


# ---------- cutwidth reduction ----------

def test_hanging_path_on_cycles():
    for n in (6, 8):
        h = cycle_graph(n)
        t = find_corner_triple(h)
        lists, positions = hanging_lists(h, t, 3, 4)
        assert positions[0] >= 4 and all(b - a >= 4 for a, b in zip(positions, positions[1:]))
        rel = path_relation(h, lists[: positions[-1] + 1])
        assert {e for s, e in rel if s == t.gamma} == {t.gamma}
        assert {e for s, e in rel if s == t.beta} == {t.beta}
        assert t.beta in {e for s, e in rel if s == t.alpha}


@pytest.mark.parametrize("g", [4, 6])
def test_ctw_output_class_and_layout(c6_setup, g):
    h, t = c6_setup
    cnf = random_cnf(4, 4, 3, 3)
    out = reduce_sat_ctw(cnf, h, t, w(h, "w1", "w5"), 1, g)
    graph = out.instance.g
    assert in_class_cg(graph, g) is None
    assert isinstance(out.certificate, LinearLayout)
    assert cutwidth_of_order(graph, out.certificate.order) == out.certificate.width
    assert out.certificate.width <= out.params.t * out.params.p + out.width_constant


def test_ctw_random_round_trips(c6_setup):
    h, t = c6_setup
    s = w(h, "w1", "w5")
    for seed in range(CNFS):
        cnf = sized_cnf(100 + seed, 6, 8)
        _round_trip(reduce_sat_ctw(cnf, h, t, s, 1, 4), cnf)


@pytest.mark.slow
def test_ctw_round_trips_full_size(c6_setup):
    h, t = c6_setup
    s = w(h, "w1", "w5")
    for seed in range(FULL_CNFS):
        cnf = sized_cnf(100 + seed)
        _round_trip(reduce_sat_ctw(cnf, h, t, s, 1, 4), cnf)



def test_ctw_contradiction(c6_setup):
    h, t = c6_setup
    out = reduce_sat_ctw(CNF(from_clauses=[[1, 2], [-1], [-2]]), h, t, w(h, "w1", "w5"), 2, 4)
    res, _ = solve_and_decode(out)
    assert not res.satisfiable


def test_ctw_needs_strong_incomparability(c6_setup):
    h, t = c6_setup
    with pytest.raises(PreconditionViolated):
        reduce_sat_ctw(CNF(from_clauses=[[1]]), h, t, w(h, "w1", "w3", "w5"), 1, 4)


def test_ctw_with_a_strongly_incomparable_triple():
    h = cycle_graph(10)
    t = find_corner_triple(h)
    s = (t.alpha, t.beta)
    for clauses, sat in (([[1]], True), ([[1], [-1]], False)):
        cnf = CNF(from_clauses=clauses)
        out = reduce_sat_ctw(cnf, h, t, s, 1, 4)
        assert in_class_cg(out.instance.g, 4) is None
        res, _ = solve_and_decode(out)
        assert res.satisfiable == sat


def test_strongly_incomparable_layout_width_is_linear_in_the_groups():
    h = cycle_graph(10)
    t = find_corner_triple(h)
    assert t.case == "strongly_incomparable"
    s = (t.alpha, t.beta)
    constants = set()
    for seed in range(CNFS):
        cnf = sized_cnf(300 + seed, 6, 8)
        out = reduce_sat_ctw(cnf, h, t, s, 1, 4)
        graph = out.instance.g
        assert in_class_cg(graph, 4) is None
        assert cutwidth_of_order(graph, out.certificate.order) == out.certificate.width
        assert out.certificate.width <= out.params.t * out.params.p + out.width_constant
        constants.add(out.width_constant)
    assert len(constants) == 1


def test_hanging_path_rejects_unknown_case(c6_setup):
    h, t = c6_setup
    with pytest.raises(TripleCaseUnsupported):
        hanging_lists(h, dataclasses.replace(t, case="C10"), 2, 4)
