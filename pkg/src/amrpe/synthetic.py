"""Seeded random AMR graphs and corpora for tests and benchmarks.

Graphs are built in creation order and every edge points from an earlier
node to a later one, so they are acyclic by construction.  Optional extras
are re-entrant edges, inverse (``-of``) roles and constant attributes.
"""

from __future__ import annotations

import random

from .amr import AmrEdge, AmrGraph, AmrNode, CorpusEntry, serialize_penman
from .linearize import bfs_linearize
from .spg import Spg, transform

CONCEPTS = (
    "want-01", "believe-01", "go-02", "see-01", "child", "parent", "boy", "girl", "city",
    "person", "say-01", "give-01", "book", "dog", "run-02", "know-01", "make-01", "house",
)
ROLES = (":ARG0", ":ARG1", ":ARG2", ":mod", ":time", ":location", ":manner", ":poss")
INVERSE_ROLES = (":ARG0-of", ":ARG1-of", ":part-of")
ATTR_ROLES = (":polarity", ":quant", ":name", ":value")
CONSTANTS = ("-", "3", "42", '"Paris"', '"Anna Smith"', "+", "interrogative")


def random_graph(
    rng: random.Random,
    n_nodes: int | None = None,
    *,
    reentrancy: float = 0.3,
    inverse: float = 0.1,
    attributes: float = 0.2,
) -> AmrGraph:
    """One random rooted DAG; ``n_nodes`` counts concept (non-attribute) nodes."""
    n = n_nodes if n_nodes is not None else rng.randint(1, 12)
    nodes = [AmrNode(f"x{i}", rng.choice(CONCEPTS)) for i in range(n)]
    edges: list[AmrEdge] = []
    children: dict[int, set[int]] = {i: set() for i in range(n)}

    def role() -> str:
        return rng.choice(INVERSE_ROLES) if rng.random() < inverse else rng.choice(ROLES)

    for i in range(1, n):
        parent = rng.randrange(i)
        edges.append(AmrEdge(f"x{parent}", f"x{i}", role()))
        children[parent].add(i)
    for _ in range(n):
        if n > 2 and rng.random() < reentrancy:
            u, v = sorted(rng.sample(range(n), 2))
            if v not in children[u]:
                edges.append(AmrEdge(f"x{u}", f"x{v}", role()))
                children[u].add(v)
    attr = 0
    for i in range(n):
        if rng.random() < attributes:
            nodes.append(AmrNode(f"attr_{attr}", rng.choice(CONSTANTS), True))
            edges.append(AmrEdge(f"x{i}", f"attr_{attr}", rng.choice(ATTR_ROLES)))
            attr += 1
    # shuffle each node's outgoing order so serialization order is not creation order
    rng.shuffle(edges)
    return AmrGraph(nodes, edges, "x0")


def random_corpus(n_entries: int, seed: int = 0, **kwargs) -> list[CorpusEntry]:
    rng = random.Random(seed)
    out = []
    for i in range(n_entries):
        g = random_graph(rng, **kwargs)
        out.append(CorpusEntry(f"syn_{i}", f"sentence {i}", g, serialize_penman(g), {"id": f"syn_{i}"}))
    return out


def corpus_text(entries) -> str:
    """Render entries as a Penman corpus file with ``::id`` / ``::snt`` metadata."""
    blocks = []
    for e in entries:
        blocks.append(f"# ::id {e.id}\n# ::snt {e.sentence}\n{serialize_penman(e.graph)}\n")
    return "\n".join(blocks)


def document_graph(rng: random.Random, n_sentences: int, **kwargs) -> AmrGraph:
    """A ``multi-sentence`` root with ``:snt1 .. :sntN`` sentence graphs below it."""
    nodes = [AmrNode("d", "multi-sentence")]
    edges = []
    for s in range(1, n_sentences + 1):
        g = random_graph(rng, **kwargs)
        rename = {node.id: f"s{s}{node.id}" for node in g.nodes}
        nodes.extend(AmrNode(rename[node.id], node.concept, node.is_attribute) for node in g.nodes)
        edges.extend(AmrEdge(rename[e.source], rename[e.target], e.role) for e in g.edges)
        edges.append(AmrEdge("d", rename[g.root], f":snt{s}"))
    return AmrGraph(nodes, edges, "d")


def document_spg(n: int = 2000, seed: int = 0) -> Spg:
    """SPG of a random multi-sentence document, cut to exactly ``n`` nodes.

    Sentences are added until the SPG has at least ``n`` nodes; the result
    is the subgraph induced by the first ``n`` label positions.
    """
    rng = random.Random(seed)
    sentences = max(1, n // 40)
    while True:
        spg = transform(bfs_linearize(document_graph(rng, sentences, n_nodes=None)))
        if spg.n >= n:
            break
        sentences = int(sentences * 1.5) + 1
    edges = [(u, v) for u, v in spg.edges if u < n and v < n]
    groups = {}
    for p, members in spg.pointer_groups.items():
        kept = tuple(m for m in members if m < n)
        if kept:
            groups[p] = kept
    return Spg(n, spg.node_labels[:n], edges, groups)
