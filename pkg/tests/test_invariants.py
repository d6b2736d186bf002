from __future__ import annotations

import networkx as nx
import pytest

from conftest import SEEDS, w
from lib.errors import OracleUnknown
from lib.graphs import (
    Graph,
    associated_bipartite,
    bipartition,
    check_incomparable,
    complete_bipartite,
    complete_graph,
    crown_graph,
    cycle_graph,
    is_bipartite,
    path_graph,
    random_graph,
)
from lib import invariants
from lib.invariants import (
    CoCaResult,
    BipartiteDecomposition,
    check_decomposition,
    connected_induced_subsets,
    find_bipartite_decomposition,
    find_induced_long_cycle,
    invariant_gamma,
    invariant_i,
    invariant_mim,
    invariant_report_problem,
    invariant_star,
    is_complement_circular_arc,
    is_undecomposable,
    verify_two_order_model,
)


def _atlas_corpus():
    """Connected bipartite graphs from the atlas (up to seven vertices)."""
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() < 2 or not nx.is_connected(g) or not nx.is_bipartite(g):
            continue
        yield Graph.from_edges(g.number_of_nodes(), list(g.edges()))


def _eight_vertex_corpus(samples: int = SEEDS):
    """Connected bipartite graphs on eight vertices: every tree plus seeded random ones, up to isomorphism."""
    seen = {}
    candidates = list(nx.nonisomorphic_trees(8))
    for seed in range(samples):
        left = 1 + seed % 4
        candidates.append(nx.bipartite.random_graph(left, 8 - left, 0.3 + 0.5 * (seed % 5) / 4, seed=seed))
    for g in candidates:
        if not nx.is_connected(g):
            continue
        g = nx.convert_node_labels_to_integers(g)
        bucket = seen.setdefault(nx.weisfeiler_lehman_graph_hash(g), [])
        if any(nx.is_isomorphic(g, other) for other in bucket):
            continue
        bucket.append(g)
        yield Graph.from_edges(8, list(g.edges()))


def _small_corpus():
    yield from _atlas_corpus()
    yield from _eight_vertex_corpus()


# ---------- decompositions ----------

def test_c6_and_edge_are_undecomposable(c6):
    assert find_bipartite_decomposition(c6) is None
    assert find_bipartite_decomposition(path_graph(2)) is None


def test_star_decomposes_behind_its_centre():
    h = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)], ["ny", "dx1", "dx2", "rx"])
    dec = find_bipartite_decomposition(h)
    assert dec is not None
    assert check_decomposition(h, dec) is None


def test_hand_built_decomposition_checks():
    # D = {dx1, dx2, dy}, N = {nx_, ny}, R = {rx}
    labels = ["dx1", "dx2", "dy", "nx_", "ny", "rx"]
    edges = [(0, 4), (1, 4), (2, 3), (3, 4), (0, 2), (5, 4)]
    h = Graph.from_edges(6, edges, labels)
    good = BipartiteDecomposition(frozenset({0, 1, 2}), frozenset({3, 4}), frozenset({5}))
    assert check_decomposition(h, good) is None
    leaky = BipartiteDecomposition(frozenset({0, 1}), frozenset({3, 4}), frozenset({2, 5}))
    assert check_decomposition(h, leaky) == "N does not separate D from R"


def test_found_decompositions_verify():
    found = 0
    for seed in range(SEEDS):
        g = random_graph(7, 0.5, seed)
        h = Graph.from_edges(7, [(u, v) for u, v in g.edges if (u - v) % 2])
        if not h.is_connected():
            continue
        dec = find_bipartite_decomposition(h)
        if dec is not None:
            assert check_decomposition(h, dec) is None
            found += 1
    assert found > 0


# ---------- complement of circular-arc ----------

def test_long_cycles_are_not_co_ca(c6, c8):
    for h in (c6, c8):
        res = is_complement_circular_arc(h)
        assert res.answer == "no"
        assert len(res.witness) == h.n


def test_edge_and_paths_are_co_ca():
    for n in (2, 3, 6, 9):
        h = path_graph(n)
        res = is_complement_circular_arc(h)
        assert res.answer == "yes"
        assert verify_two_order_model(h, bipartition(h).side, *res.model)


def test_model_search_on_small_graphs():
    h = complete_bipartite(2, 3)
    res = is_complement_circular_arc(h)
    assert res.answer == "yes"
    assert verify_two_order_model(h, bipartition(h).side, *res.model)
    assert is_complement_circular_arc(cycle_graph(4)).answer == "yes"


def test_oracle_reports_unknown_beyond_cap():
    assert is_complement_circular_arc(complete_bipartite(2, 3), cap=3).answer == "unknown"
    # paths never need the search
    assert is_complement_circular_arc(path_graph(8), cap=3).answer == "yes"


def test_induced_long_cycle_skips_chorded_cycles():
    # C6 with the chord w1-w4
    h = Graph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)] + [(0, 3)])
    assert find_induced_long_cycle(h) is None
    assert find_induced_long_cycle(cycle_graph(8)) is not None


def test_oracle_models_verify_on_small_graphs():
    for h in _small_corpus():
        res = is_complement_circular_arc(h)
        if res.answer == "yes":
            assert verify_two_order_model(h, bipartition(h).side, *res.model)
        else:
            assert res.answer == "no"


# ---------- i, mim, gamma ----------

def test_c6_values(c6):
    assert invariant_i(c6).value == 3
    mim = invariant_mim(c6)
    assert mim.value == 2
    assert invariant_gamma(c6).value == 1
    for rep in (invariant_i(c6), mim, invariant_gamma(c6)):
        assert invariant_report_problem(rep) is None


def test_c6_induced_matching_example(c6):
    # {w1w2, w4w5} is induced
    s = w(c6, "w1", "w5")
    assert check_incomparable(c6, s, strong=True).ok


@pytest.mark.parametrize("r", [3, 4, 5])
def test_crown_values(r):
    h = crown_graph(r)
    assert invariant_i(h).value == r
    assert invariant_gamma(h).value == 1


def test_inequality_chain_on_small_graphs():
    checked = 0
    for h in _small_corpus():
        if not is_undecomposable(h):
            continue
        if is_complement_circular_arc(h).answer != "no":
            continue
        i, mim, gamma = invariant_i(h), invariant_mim(h), invariant_gamma(h)
        assert mim.value - 1 <= gamma.value <= i.value - 1
        for rep in (i, mim, gamma):
            assert invariant_report_problem(rep) is None
        checked += 1
    assert checked > 0


# ---------- starred ----------

@pytest.mark.parametrize("k", [3, 4, 5])
def test_cliques(k):
    kk = complete_graph(k)
    assert invariant_star(kk, "i").value == k
    assert invariant_star(kk, "mim").value == 2
    assert invariant_star(kk, "gamma").value == 1


@pytest.mark.parametrize("k,expected", [(5, 3), (6, 2), (7, 4), (8, 2), (9, 6)])
def test_cycle_mim_star(k, expected):
    assert invariant_star(cycle_graph(k), "mim").value == expected


def test_star_of_co_ca_graph_falls_back():
    p = path_graph(5)
    assert invariant_star(p, "gamma").value == 1
    assert invariant_star(p, "i").value == 0


def test_star_matches_associated_bipartite(c6):
    for kind in ("i", "mim", "gamma"):
        assert invariant_star(c6, kind).value == invariant_star(associated_bipartite(c6).graph, kind).value


def test_star_witnesses_verify():
    for kind in ("i", "mim", "gamma"):
        rep = invariant_star(complete_graph(4), kind)
        assert invariant_report_problem(rep) is None
        assert rep.value <= complete_graph(4).n


def test_star_propagates_unknown(c6, monkeypatch):
    monkeypatch.setattr(invariants, "is_complement_circular_arc", lambda h, cap=None: CoCaResult("unknown", (0,)))
    with pytest.raises(OracleUnknown):
        invariant_star(c6, "i")


def test_connected_subsets_enumerated_once():
    g = cycle_graph(5)
    subsets = list(connected_induced_subsets(g))
    assert len(subsets) == len(set(subsets))
    # five singletons, arcs of lengths 2..4 (five each), and the whole cycle
    assert len(subsets) == 5 * 4 + 1


def test_eight_vertex_corpus_is_deduplicated():
    graphs = list(_eight_vertex_corpus(samples=20))
    assert len(graphs) >= 23
    assert all(g.n == 8 and g.is_connected() and is_bipartite(g) for g in graphs)
