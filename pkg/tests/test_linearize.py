import json
import random

import pytest

from amrpe.amr import parse_penman
from amrpe.errors import PointerRedefinition, UnknownLabelShape
from amrpe.linearize import Label, LabelKind, LabelSequence, bfs_linearize, parse_labels, render_labels
from amrpe.synthetic import random_graph

from conftest import WORKED_LABELS


def test_worked_linearization(worked_seq):
    assert render_labels(worked_seq) == WORKED_LABELS
    assert len(worked_seq) == 12
    assert worked_seq.alignment == tuple(range(12))


def test_single_node_and_leaf_child():
    assert render_labels(bfs_linearize(parse_penman("(a / alpha)"))) == "<P0> alpha <stop>"
    seq = bfs_linearize(parse_penman("(a / alpha :ARG0 (b / beta))"))
    assert render_labels(seq) == "<P0> alpha :ARG0 <P1> beta <stop>"
    assert len(seq) == 4


def test_parse_labels_kinds():
    seq = parse_labels(WORKED_LABELS)
    short = {LabelKind.CONCEPT: "C", LabelKind.ROLE: "R", LabelKind.POINTER: "P", LabelKind.STOP: "S"}
    assert [short[lab.kind] for lab in seq] == list("CRCRCSPRCRPS")
    assert parse_labels("<P0> alpha <stop>").labels == (Label.concept(0, "alpha"), Label.stop())


def test_parse_labels_errors():
    with pytest.raises(PointerRedefinition):
        parse_labels("<P0> alpha <P0> beta")
    with pytest.raises(UnknownLabelShape):
        parse_labels("alpha <stop>")


def test_parse_render_round_trip_on_random_graphs():
    rng = random.Random(7)
    for _ in range(200):
        seq = bfs_linearize(random_graph(rng))
        again = parse_labels(render_labels(seq))
        assert again.labels == seq.labels


def test_quoted_attribute_values_survive_round_trip():
    seq = bfs_linearize(parse_penman('(n / name :op1 "New York")'))
    assert render_labels(seq) == '<P0> name :op1 <P1> "New York" <stop>'
    assert parse_labels(render_labels(seq)).labels == seq.labels


def _check_invariants(graph, seq):
    labels = seq.labels
    concepts = [lab for lab in labels if lab.kind is LabelKind.CONCEPT]
    # one definition per graph node, pointers numbered 0..n-1 in order of appearance
    assert [lab.pointer for lab in concepts] == list(range(len(graph.nodes)))
    for lab in labels:
        if lab.kind is LabelKind.POINTER:
            assert lab.pointer < len(concepts)
    expanded = 1 + sum(1 for n in graph.nodes if graph.out_edges.get(n.id) and n.id != graph.root)
    assert sum(lab.kind is LabelKind.STOP for lab in labels) == expanded
    roles = sum(lab.kind is LabelKind.ROLE for lab in labels)
    assert roles == len(graph.edges)
    assert labels[-1].kind is LabelKind.STOP


def test_structural_invariants_on_random_graphs():
    rng = random.Random(8)
    for _ in range(300):
        g = random_graph(rng)
        _check_invariants(g, bfs_linearize(g))


def test_bfs_order_is_level_order():
    g = parse_penman("(a / r :ARG0 (b / x :ARG0 (d / y)) :ARG1 (c / z :ARG0 (e / w)))")
    assert render_labels(bfs_linearize(g)) == (
        "<P0> r :ARG0 <P1> x :ARG1 <P2> z <stop> <P1> :ARG0 <P3> y <stop> <P2> :ARG0 <P4> w <stop>"
    )


def test_label_shape_validation():
    with pytest.raises(UnknownLabelShape):
        Label(LabelKind.ROLE, "ARG0")
    with pytest.raises(UnknownLabelShape):
        Label(LabelKind.CONCEPT, "alpha")
    with pytest.raises(UnknownLabelShape):
        Label(LabelKind.STOP, "stop")


def test_alignment_must_be_injective():
    labels = [Label.concept(0, "a"), Label.stop()]
    with pytest.raises(ValueError):
        LabelSequence(labels, (0, 0))


def test_sidecar(worked_seq):
    data = json.loads(worked_seq.sidecar())
    assert data["graph_id"] == "worked"
    assert data["labels"][0] == {"kind": "ConceptWithPointer", "text": "<P0> want-01", "pointer": 0, "node": 0}
    assert data["labels"][5]["kind"] == "Stop"
