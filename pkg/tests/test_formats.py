from __future__ import annotations

import json

import pytest

from conftest import w
from lib.errors import FormatError
from lib.formats import (
    bcsp_from_dict,
    bcsp_to_dict,
    format_graph,
    parse_cnf,
    parse_graph,
    read_certificate,
    read_layout,
    read_list_instance,
    to_dot,
    write_certificate,
    write_layout,
    write_list_instance,
)
from lib.graphs import cycle_graph, path_graph
from lib.instances import BcspInstance, ListInstance
from lib.layouts import FeedbackSet, make_layout


def test_parse_graph_infers_labels():
    g = parse_graph("# a path\n4 2\na b\nb c\n")
    assert g.n == 4 and g.m == 2
    assert g.labels[:3] == ("a", "b", "c")
    assert g.degree(g.index("b")) == 2
    assert g.degree(3) == 0


def test_parse_graph_with_loop():
    g = parse_graph("2 2\nlabels: x y\nx x\nx y\n")
    assert g.loops == frozenset({0})


def test_format_graph_is_parseable(c6):
    assert parse_graph(format_graph(c6)) == c6


@pytest.mark.parametrize(
    "text,line",
    [
        ("2 1\nlabels: a b\na c\n", 3),
        ("2\n", 1),
        ("2 1\na b c\n", 2),
        ("2 2\na b\n", None),
    ],
)
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(FormatError) as e:
        parse_graph(text, "g.txt")
    assert e.value.line == line
    assert e.value.path == "g.txt"


def test_duplicate_edge_is_rejected():
    with pytest.raises(FormatError, match="duplicate edge"):
        parse_graph("2 2\na b\nb a\n")


def test_list_instance_file(tmp_path, c6):
    inst = ListInstance.build(path_graph(3), c6, {0: w(c6, "w1"), 2: w(c6, "w3", "w5")})
    path = tmp_path / "inst.txt"
    write_list_instance(inst, path, tmp_path / "c6.txt")
    assert (tmp_path / "c6.txt").exists()
    assert "target c6.txt" in path.read_text()
    back = read_list_instance(path)
    assert back.lists == inst.lists
    assert back.h == c6


def test_list_instance_unknown_label(tmp_path, c6):
    (tmp_path / "c6.txt").write_text(format_graph(c6))
    (tmp_path / "inst.txt").write_text("1 0\nlabels: a\ntarget c6.txt\na: w1 w9\n")
    with pytest.raises(FormatError) as e:
        read_list_instance(tmp_path / "inst.txt")
    assert e.value.line == 4


def test_missing_target_line(tmp_path):
    (tmp_path / "inst.txt").write_text("1 0\nlabels: a\n")
    with pytest.raises(FormatError, match="target"):
        read_list_instance(tmp_path / "inst.txt")


def test_bcsp_dict():
    b = BcspInstance.build(["a", "b"], [[1, 2], [2]], [(1, 0, [(2, 1)])])
    doc = bcsp_to_dict(b)
    assert json.loads(json.dumps(doc)) == doc
    assert bcsp_from_dict(doc) == b


def test_bcsp_dict_errors():
    with pytest.raises(FormatError):
        bcsp_from_dict({"variables": ["a"], "domains": [[0]], "constraints": []})
    with pytest.raises(FormatError):
        bcsp_from_dict({"variables": ["a"]})


def test_layout_file(tmp_path, c6):
    layout = make_layout(c6, [1, 0, 2, 3, 4, 5])
    path = tmp_path / "c6.layout"
    write_layout(layout, c6, path)
    assert read_layout(path, c6) == layout
    path.write_text("w1 w2 w3\n")
    with pytest.raises(FormatError, match="permutation"):
        read_layout(path, c6)


def test_certificates_keep_declared_width(tmp_path, c6):
    path = tmp_path / "cert.json"
    write_certificate(FeedbackSet(frozenset({0})), c6, path)
    assert read_certificate(path, c6) == FeedbackSet(frozenset({0}))
    path.write_text(json.dumps({"kind": "layout", "order": list(c6.labels), "width": 7}))
    assert read_certificate(path, c6).width == 7
    path.write_text(json.dumps({"kind": "tree"}))
    with pytest.raises(FormatError, match="unknown certificate kind"):
        read_certificate(path, c6)


def test_parse_cnf():
    cnf = parse_cnf("p cnf 3 2\n1 -2 0\n3 0\n")
    assert cnf.nv == 3
    assert cnf.clauses == [[1, -2], [3]]


def test_dot_renders_lists():
    h = cycle_graph(6)
    g = path_graph(2)
    dot = to_dot(g, [w(h, "w1"), w(h, "w2", "w4")], h, "inst")
    assert dot.startswith('graph "inst" {')
    assert "{w2,w4}" in dot
    assert '"v1" -- "v2"' in dot
