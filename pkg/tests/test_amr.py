import io
import itertools
import random

import pytest

from amrpe.amr import (
    AmrEdge,
    AmrGraph,
    AmrNode,
    canonical_form,
    dumps_graph,
    graph_from_json,
    graph_stats,
    graph_to_json,
    parse_penman,
    read_corpus,
    serialize_penman,
)
from amrpe.errors import (
    CycleDetected,
    DanglingVariable,
    DataError,
    DuplicateVariableDefinition,
    EmptyInput,
    ParseErrorAt,
    PenmanSyntaxError,
    UnbalancedParens,
)
from amrpe.synthetic import random_graph

from conftest import WORKED_PENMAN


def test_worked_graph_structure(worked_graph):
    concepts = {n.id: n.concept for n in worked_graph.nodes}
    assert concepts == {"w": "want-01", "c": "child", "b": "believe-01", "p": "parent"}
    edges = {(e.source, e.target, e.role) for e in worked_graph.edges}
    assert edges == {("w", "c", ":ARG0"), ("w", "b", ":ARG1"), ("b", "p", ":ARG0"), ("b", "c", ":ARG1")}
    assert worked_graph.root == "w"


def test_single_node():
    g = parse_penman("(a / alpha)")
    assert [n.concept for n in g.nodes] == ["alpha"] and g.edges == () and g.root == "a"
    assert serialize_penman(g) == "(a / alpha)"


def test_self_loop_rejected_in_strict_mode():
    with pytest.raises(CycleDetected):
        parse_penman("(a / alpha :ARG0 a)")


def test_lenient_mode_keeps_cycle_but_ignores_it_for_depth():
    g = parse_penman("(a / alpha :ARG0 (b / beta :ARG1 a))", strict=False)
    assert len(g.back_edges) == 1 and not g.is_acyclic
    assert graph_stats(g).depth == 1


@pytest.mark.parametrize(
    "text, exc",
    [
        ("", EmptyInput),
        ("   \n", EmptyInput),
        ("(a / alpha", UnbalancedParens),
        ("(a / alpha))", UnbalancedParens),
        ("(a alpha)", PenmanSyntaxError),
        ("(a / alpha :ARG0 z)", DanglingVariable),
        ("(a / alpha :ARG0 (a / beta))", DuplicateVariableDefinition),
        ("(a / alpha) (b / beta)", PenmanSyntaxError),
    ],
)
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_penman(text)


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        parse_penman("(a / alpha")


def test_attributes_become_leaf_nodes():
    g = parse_penman('(n / name :op1 "New" :op2 "York" :polarity -)')
    attrs = [n for n in g.nodes if n.is_attribute]
    assert [a.concept for a in attrs] == ['"New"', '"York"', "-"]
    assert all(not g.out_edges.get(a.id) for a in attrs)
    assert len({a.id for a in attrs}) == 3


def test_attribute_id_avoids_variable_collision():
    g = parse_penman("(attr_0 / thing :quant 5)")
    ids = [n.id for n in g.nodes]
    assert len(set(ids)) == 2 and "attr_0" in ids


def test_inverse_role_kept_verbatim():
    g = parse_penman("(b / boy :ARG0-of (r / run-02))")
    assert g.edges == (AmrEdge("b", "r", ":ARG0-of"),)


def test_serialize_worked_reparses_isomorphic(worked_graph):
    text = serialize_penman(worked_graph)
    again = parse_penman(text)
    assert canonical_form(again) == canonical_form(worked_graph)
    assert serialize_penman(again) == text
    assert serialize_penman(worked_graph, indent=None) == WORKED_PENMAN


def test_serialize_is_idempotent_on_random_graphs():
    rng = random.Random(5)
    for _ in range(100):
        g = random_graph(rng)
        first = serialize_penman(g)
        assert serialize_penman(parse_penman(first)) == first


def test_graph_stats_worked(worked_graph):
    assert graph_stats(worked_graph).as_dict() == {
        "depth": 2,
        "node_count": 4,
        "edge_count": 4,
        "reentrancy_count": 1,
    }


def test_graph_stats_single_and_chain():
    assert graph_stats(parse_penman("(a / alpha)")).as_dict() == {
        "depth": 0,
        "node_count": 1,
        "edge_count": 0,
        "reentrancy_count": 0,
    }
    chain = "(a / x :ARG0 (b / x :ARG0 (c / x :ARG0 (d / x :ARG0 (e / x)))))"
    assert graph_stats(parse_penman(chain)).depth == 4


def _depth_by_enumeration(g: AmrGraph) -> int:
    """Longest simple path from the root, by exhaustive DFS over all paths."""
    best = 0

    def walk(node, length, seen):
        nonlocal best
        best = max(best, length)
        for e in g.out_edges.get(node, ()):
            if e.target not in seen:
                walk(e.target, length + 1, seen | {e.target})

    walk(g.root, 0, {g.root})
    return best


def test_depth_matches_path_enumeration():
    rng = random.Random(11)
    for _ in range(200):
        g = random_graph(rng)
        assert graph_stats(g).depth == _depth_by_enumeration(g)


def test_reentrancy_counts_in_degree_above_one():
    rng = random.Random(3)
    for _ in range(50):
        g = random_graph(rng)
        expected = sum(1 for n in g.nodes if sum(e.target == n.id for e in g.edges) > 1)
        assert graph_stats(g).reentrancy_count == expected


def test_graph_invariants_enforced():
    with pytest.raises(DataError):
        AmrGraph([AmrNode("a", "x"), AmrNode("b", "y")], [], "a")  # b unreachable
    with pytest.raises(DataError):
        AmrGraph([AmrNode("a", "x")], [AmrEdge("a", "a", "ARG0")], "a")
    with pytest.raises(DataError):
        AmrGraph([AmrNode("a", "")], [], "a")
    with pytest.raises(DataError):
        AmrGraph(
            [AmrNode("a", "x"), AmrNode("k", "5", True), AmrNode("b", "y")],
            [AmrEdge("a", "k", ":quant"), AmrEdge("k", "b", ":op1")],
            "a",
        )


def test_json_round_trip(worked_graph):
    assert graph_from_json(graph_to_json(worked_graph)) == worked_graph
    assert dumps_graph(worked_graph) == dumps_graph(graph_from_json(graph_to_json(worked_graph)))


def test_read_corpus_schema():
    text = "# ::id x1\n# ::snt Hello.\n(h / hello-01)\n"
    (entry,) = read_corpus(io.StringIO(text))
    assert entry.id == "x1" and entry.sentence == "Hello."
    assert len(entry.graph.nodes) == 1


def test_read_corpus_empty_and_order():
    assert read_corpus(io.StringIO("")) == []
    text = "# ::id a\n(a / one)\n\n# ::id b\n(b / two)\n"
    assert [e.id for e in read_corpus(io.StringIO(text))] == ["a", "b"]


def test_read_corpus_lenient_and_strict():
    text = "# ::id ok\n(a / one)\n\n# ::id bad\n(b / two\n\n(c / three)\n"
    seen = []
    entries = read_corpus(io.StringIO(text), on_error=seen.append)
    assert [e.id for e in entries] == ["ok", "entry_3"]
    assert len(seen) == 1 and seen[0].line == 5
    with pytest.raises(ParseErrorAt) as info:
        read_corpus(io.StringIO(text), strict=True)
    assert info.value.line == 5


def test_multiline_error_line_number():
    text = "# ::id x\n(a / one\n   :ARG0 (b / two)\n   :ARG1 z9)\n"
    with pytest.raises(ParseErrorAt) as info:
        read_corpus(io.StringIO(text), strict=True)
    assert info.value.line == 4


def test_node_order_follows_text():
    g = parse_penman("(a / x :ARG1 (c / z) :ARG0 (b / y))")
    assert [n.id for n in g.nodes] == ["a", "c", "b"]
    assert [e.role for e in g.out_edges["a"]] == [":ARG1", ":ARG0"]


@pytest.mark.parametrize("seed", range(5))
def test_canonical_form_ignores_edge_listing_order(seed):
    g = random_graph(random.Random(seed))
    perm = list(g.edges)
    random.Random(seed + 100).shuffle(perm)
    assert canonical_form(AmrGraph(g.nodes, perm, g.root)) == canonical_form(g)


def test_all_permutations_of_small_graph_serialize_consistently():
    base = parse_penman("(a / x :ARG0 (b / y) :ARG1 (c / z) :ARG2 b)")
    for order in itertools.permutations(base.edges):
        g = AmrGraph(base.nodes, order, base.root)
        assert canonical_form(parse_penman(serialize_penman(g))) == canonical_form(base)
