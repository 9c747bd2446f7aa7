"""Penman-notation AMR graphs: data model, parser, serializer and corpus reader.

The graph model is deliberately flat.  Every concept instance and every
constant (``-``, numbers, quoted strings, bare symbols such as
``imperative``) is an :class:`AmrNode`; constants are flagged with
``is_attribute`` and get synthesized ids (``attr_0``, ``attr_1``, ...).
Edges keep their role exactly as written, so inverse roles like
``:ARG0-of`` point from the textual parent to the textual child.

Example::

    >>> g = parse_penman("(w / want-01 :ARG0 (c / child) :ARG1 (b / believe-01 :ARG0 (p / parent) :ARG1 c))")
    >>> graph_stats(g)
    GraphStats(depth=2, node_count=4, edge_count=4, reentrancy_count=1)
"""

from __future__ import annotations

import json
import logging
import re
from collections import defaultdict, deque
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, TextIO

from .errors import (
    CycleDetected,
    DanglingVariable,
    DataError,
    DuplicateVariableDefinition,
    EmptyInput,
    ParseErrorAt,
    PenmanError,
    PenmanSyntaxError,
    UnbalancedParens,
)

logger = logging.getLogger(__name__)

__all__ = [
    "AmrNode",
    "AmrEdge",
    "AmrGraph",
    "CorpusEntry",
    "GraphStats",
    "parse_penman",
    "serialize_penman",
    "read_corpus",
    "iter_corpus",
    "graph_stats",
    "canonical_form",
    "graph_to_json",
]


@dataclass(frozen=True)
class AmrNode:
    id: str
    concept: str
    is_attribute: bool = False


@dataclass(frozen=True)
class AmrEdge:
    source: str
    target: str
    role: str


@dataclass(frozen=True)
class AmrGraph:
    """Rooted, edge-labeled semantic graph.

    ``nodes`` and ``edges`` keep insertion order; the order of a node's
    outgoing edges is the order its roles appeared in the source text and
    drives both serialization and linearization.
    """

    nodes: tuple[AmrNode, ...]
    edges: tuple[AmrEdge, ...]
    root: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        self._validate()

    def _validate(self) -> None:
        ids = set()
        for node in self.nodes:
            if node.id in ids:
                raise DuplicateVariableDefinition(f"duplicate node id {node.id!r}")
            if not node.concept:
                raise DataError(f"node {node.id!r} has an empty concept")
            ids.add(node.id)
        if self.root not in ids:
            raise DataError(f"root {self.root!r} is not a node")
        attrs = {n.id for n in self.nodes if n.is_attribute}
        for edge in self.edges:
            if edge.source not in ids or edge.target not in ids:
                raise DataError(f"edge {edge} references a missing node")
            if not edge.role.startswith(":") or len(edge.role) < 2:
                raise DataError(f"malformed role {edge.role!r}")
            if edge.source in attrs:
                raise DataError(f"attribute node {edge.source!r} has an outgoing edge")
        unreachable = ids - self._reachable()
        if unreachable:
            raise DataError(f"nodes unreachable from root: {sorted(unreachable)}")

    def _reachable(self) -> set[str]:
        seen = {self.root}
        stack = [self.root]
        while stack:
            for edge in self.out_edges.get(stack.pop(), ()):
                if edge.target not in seen:
                    seen.add(edge.target)
                    stack.append(edge.target)
        return seen

    @cached_property
    def node_map(self) -> dict[str, AmrNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def out_edges(self) -> dict[str, tuple[AmrEdge, ...]]:
        grouped: dict[str, list[AmrEdge]] = defaultdict(list)
        for edge in self.edges:
            grouped[edge.source].append(edge)
        return {k: tuple(v) for k, v in grouped.items()}

    @cached_property
    def in_degree(self) -> dict[str, int]:
        deg = {n.id: 0 for n in self.nodes}
        for edge in self.edges:
            deg[edge.target] += 1
        return deg

    @cached_property
    def back_edges(self) -> frozenset[int]:
        """Indices (into ``edges``) of edges closing a cycle under DFS from the root."""
        index_of = {id(e): i for i, e in enumerate(self.edges)}
        state: dict[str, int] = {}  # 1 = on stack, 2 = finished
        back: set[int] = set()
        stack: list[tuple[str, Iterator[AmrEdge]]] = [(self.root, iter(self.out_edges.get(self.root, ())))]
        state[self.root] = 1
        while stack:
            node, it = stack[-1]
            edge = next(it, None)
            if edge is None:
                state[node] = 2
                stack.pop()
                continue
            mark = state.get(edge.target, 0)
            if mark == 1:
                back.add(index_of[id(edge)])
            elif mark == 0:
                state[edge.target] = 1
                stack.append((edge.target, iter(self.out_edges.get(edge.target, ()))))
        return frozenset(back)

    @property
    def is_acyclic(self) -> bool:
        return not self.back_edges

    def to_json(self) -> dict:
        return graph_to_json(self)


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    sentence: str
    graph: AmrGraph
    raw_penman: str
    metadata: dict = field(default_factory=dict, compare=False)
    line: int = 0


@dataclass(frozen=True)
class GraphStats:
    depth: int
    node_count: int
    edge_count: int
    reentrancy_count: int

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


# -- parsing -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
    | (?P<lp>\()
    | (?P<rp>\))
    | (?P<slash>/)
    | (?P<str>"(?:[^"\\]|\\.)*")
    | (?P<role>:[^\s()"]*)
    | (?P<sym>[^\s()/"]+)
    """,
    re.VERBOSE,
)

# Bare symbols of this shape are variables; anything else undefined is a constant.
_VARIABLE_RE = re.compile(r"^[a-z]\d*$")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int


def _tokenize(text: str) -> list[_Tok]:
    tokens: list[_Tok] = []
    pos = 0
    line = 1
    depth = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == '"':
                raise PenmanSyntaxError(f"line {line}: unterminated string literal")
            raise PenmanSyntaxError(f"line {line}: unexpected character {text[pos]!r}")
        kind = m.lastgroup
        chunk = m.group()
        if kind == "lp":
            depth += 1
        elif kind == "rp":
            depth -= 1
            if depth < 0:
                raise UnbalancedParens(f"line {line}: unexpected ')'")
        if kind != "ws":
            tokens.append(_Tok(kind, chunk, line))
        line += chunk.count("\n")
        pos = m.end()
    if depth != 0:
        raise UnbalancedParens(f"{depth} unclosed '('")
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Tok]):
        self.tokens = tokens
        self.pos = 0
        self.concepts: dict[str, str] = {}
        # (source, role, kind, text) in role order; kind is "var" for nested nodes
        self.raw_edges: list[tuple[str, str, str, str, int]] = []
        self.order: list[tuple[str, str]] = []  # ("var", id) or ("atom", edge-index)

    def peek(self) -> _Tok | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind: str, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise PenmanSyntaxError(f"unexpected end of input, expected {what}")
        if tok.kind != kind:
            raise PenmanSyntaxError(f"line {tok.line}: expected {what}, got {tok.text!r}")
        self.pos += 1
        return tok

    def node(self) -> str:
        self.take("lp", "'('")
        var = self.take("sym", "variable")
        self.take("slash", "'/'")
        tok = self.peek()
        if tok is None or tok.kind not in ("sym", "str"):
            raise PenmanSyntaxError(f"line {var.line}: missing concept for {var.text!r}")
        self.pos += 1
        if var.text in self.concepts:
            raise DuplicateVariableDefinition(f"line {var.line}: variable {var.text!r} defined twice")
        self.concepts[var.text] = tok.text
        self.order.append(("var", var.text))
        while True:
            tok = self.peek()
            if tok is None:
                raise PenmanSyntaxError("unexpected end of input inside node")
            if tok.kind == "rp":
                self.pos += 1
                return var.text
            if tok.kind != "role":
                raise PenmanSyntaxError(f"line {tok.line}: expected role or ')', got {tok.text!r}")
            self.pos += 1
            if len(tok.text) < 2:
                raise PenmanSyntaxError(f"line {tok.line}: empty role")
            target = self.peek()
            if target is None or target.kind not in ("lp", "sym", "str"):
                raise PenmanSyntaxError(f"line {tok.line}: role {tok.text} has no target")
            if target.kind == "lp":
                slot = len(self.raw_edges)
                self.raw_edges.append(None)  # keeps edges in role-token order
                child = self.node()
                self.raw_edges[slot] = (var.text, tok.text, "var", child, target.line)
            else:
                self.pos += 1
                self.order.append(("atom", str(len(self.raw_edges))))
                self.raw_edges.append((var.text, tok.text, target.kind, target.text, target.line))


def parse_penman(text: str, *, strict: bool = True) -> AmrGraph:
    """Parse one Penman expression into an :class:`AmrGraph`.

    Metadata comment lines must already be removed.  With ``strict=False`` a
    graph containing a directed cycle is accepted; the closing edges are then
    reported by :attr:`AmrGraph.back_edges` and ignored by :func:`graph_stats`.
    """
    if not text or not text.strip():
        raise EmptyInput("no Penman text")
    tokens = _tokenize(text)
    p = _Parser(tokens)
    root = p.node()
    if p.peek() is not None:
        raise PenmanSyntaxError(f"line {p.peek().line}: trailing content after graph")

    used_ids = set(p.concepts)
    attr_counter = 0

    def fresh_attr_id() -> str:
        nonlocal attr_counter
        while f"attr_{attr_counter}" in used_ids:
            attr_counter += 1
        ident = f"attr_{attr_counter}"
        attr_counter += 1
        used_ids.add(ident)
        return ident

    targets: list[str] = []
    attr_nodes: dict[int, AmrNode] = {}
    for i, (src, role, kind, text_, line) in enumerate(p.raw_edges):
        if kind == "var":
            targets.append(text_)
        elif kind == "sym" and text_ in p.concepts:
            targets.append(text_)
        elif kind == "sym" and _VARIABLE_RE.match(text_):
            raise DanglingVariable(f"line {line}: variable {text_!r} is never defined")
        else:
            node = AmrNode(fresh_attr_id(), text_, True)
            attr_nodes[i] = node
            targets.append(node.id)

    nodes = []
    for kind, ref in p.order:
        if kind == "var":
            nodes.append(AmrNode(ref, p.concepts[ref]))
        elif int(ref) in attr_nodes:
            nodes.append(attr_nodes[int(ref)])
    edges = [AmrEdge(src, tgt, role) for (src, role, *_), tgt in zip(p.raw_edges, targets)]
    graph = AmrGraph(nodes, edges, root)
    if strict and graph.back_edges:
        bad = graph.edges[min(graph.back_edges)]
        raise CycleDetected(f"edge {bad.source} {bad.role} {bad.target} closes a cycle")
    return graph


def serialize_penman(graph: AmrGraph, *, indent: int | None = 4) -> str:
    """Render ``graph`` as Penman text.

    Children follow stored edge order.  The first visit to a node in
    depth-first order defines it; later visits emit the bare variable.
    ``indent=None`` produces a single line.
    """
    visited: set[str] = set()
    node_map = graph.node_map

    def render(node_id: str, level: int) -> str:
        node = node_map[node_id]
        visited.add(node_id)
        parts = [f"({node_id} / {node.concept}"]
        for edge in graph.out_edges.get(node_id, ()):
            target = node_map[edge.target]
            if target.is_attribute:
                value = target.concept
            elif edge.target in visited:
                value = edge.target
            else:
                value = render(edge.target, level + 1)
            if indent is None:
                parts.append(f" {edge.role} {value}")
            else:
                parts.append("\n" + " " * (indent * (level + 1)) + f"{edge.role} {value}")
        return "".join(parts) + ")"

    return render(graph.root, 0)


def canonical_form(graph: AmrGraph) -> tuple:
    """Hashable form equal for isomorphic graphs that share variable names.

    Attribute ids are synthesized, so attribute nodes are keyed by their
    value and the edge that carries them.
    """
    node_map = graph.node_map
    instances = sorted((n.id, n.concept) for n in graph.nodes if not n.is_attribute)
    edges = []
    for e in graph.edges:
        tgt = node_map[e.target]
        edges.append((e.source, e.role, ("const", tgt.concept) if tgt.is_attribute else ("var", e.target)))
    return (graph.root, tuple(instances), tuple(sorted(edges)))


def graph_to_json(graph: AmrGraph) -> dict:
    return {
        "root": graph.root,
        "nodes": [{"id": n.id, "concept": n.concept, "is_attribute": n.is_attribute} for n in graph.nodes],
        "edges": [{"source": e.source, "role": e.role, "target": e.target} for e in graph.edges],
    }


def graph_from_json(data: dict) -> AmrGraph:
    nodes = [AmrNode(n["id"], n["concept"], bool(n.get("is_attribute", False))) for n in data["nodes"]]
    edges = [AmrEdge(e["source"], e["target"], e["role"]) for e in data["edges"]]
    return AmrGraph(nodes, edges, data["root"])


def graph_stats(graph: AmrGraph) -> GraphStats:
    """Depth (longest root-to-node path, in edges), sizes and re-entrancy count.

    Back edges of a cyclic graph are excluded from the depth computation.
    """
    back = graph.back_edges
    dag_out: dict[str, list[str]] = defaultdict(list)
    indeg = {n.id: 0 for n in graph.nodes}
    for i, e in enumerate(graph.edges):
        if i in back:
            continue
        dag_out[e.source].append(e.target)
        indeg[e.target] += 1
    depth = {graph.root: 0}
    queue = deque(n for n, d in indeg.items() if d == 0)
    while queue:
        u = queue.popleft()
        for v in dag_out.get(u, ()):
            if u in depth:
                depth[v] = max(depth.get(v, 0), depth[u] + 1)
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return GraphStats(
        depth=max(depth.values()),
        node_count=len(graph.nodes),
        edge_count=len(graph.edges),
        reentrancy_count=sum(1 for d in graph.in_degree.values() if d > 1),
    )


# -- corpus files ----------------------------------------------------------------

_META_RE = re.compile(r"::(\S+)(?:[ \t]+(.*?))?(?=[ \t]+::\S|$)")


def _parse_metadata(lines: Iterable[str]) -> dict[str, str]:
    meta: dict[str, str] = {}
    for line in lines:
        body = line.lstrip("#").strip()
        for m in _META_RE.finditer(body):
            meta.setdefault(m.group(1), (m.group(2) or "").strip())
    return meta


def iter_corpus(
    stream: TextIO,
    *,
    strict: bool = False,
    on_error: Callable[[ParseErrorAt], None] | None = None,
) -> Iterator[CorpusEntry]:
    """Yield corpus entries from blank-line separated blocks.

    In lenient mode a malformed block is skipped and handed to ``on_error``
    (logged as a warning when no callback is given); in strict mode the first one raises :class:`ParseErrorAt`.
    Blocks with no graph text (file headers) are ignored.
    """
    block: list[tuple[int, str]] = []
    count = 0

    def flush():
        nonlocal count
        meta_lines = [t for _, t in block if t.lstrip().startswith("#")]
        graph_lines = [(n, t) for n, t in block if not t.lstrip().startswith("#")]
        if not graph_lines:
            return None
        count += 1
        meta = _parse_metadata(meta_lines)
        raw = "\n".join(t for _, t in graph_lines)
        start = graph_lines[0][0]
        entry_id = meta.get("id") or f"entry_{count}"
        try:
            graph = parse_penman(raw, strict=strict)
        except PenmanError as exc:
            line = start + _error_line_offset(exc)
            err = ParseErrorAt(line, f"[{entry_id}] {exc}")
            if strict:
                raise err from exc
            if on_error is None:
                logger.warning("skipping malformed block: %s", err)
            else:
                logger.debug("skipping malformed block: %s", err)
                on_error(err)
            return None
        return CorpusEntry(entry_id, meta.get("snt", ""), graph, raw, meta, start)

    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if line.strip():
            block.append((lineno, line))
            continue
        if block:
            entry = flush()
            block = []
            if entry is not None:
                yield entry
    if block:
        entry = flush()
        if entry is not None:
            yield entry


def read_corpus(stream: TextIO, *, strict: bool = False, on_error=None) -> list[CorpusEntry]:
    return list(iter_corpus(stream, strict=strict, on_error=on_error))


def _error_line_offset(exc: Exception) -> int:
    m = re.match(r"line (\d+):", str(exc))
    return int(m.group(1)) - 1 if m else 0


def dumps_graph(graph: AmrGraph) -> str:
    return json.dumps(graph_to_json(graph), sort_keys=True)
